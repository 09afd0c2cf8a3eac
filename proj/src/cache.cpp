#include <algorithm>
#include <bit>
#include <cassert>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "repack/cache.hpp"
#include "repack/simplify.hpp"

namespace repack {

std::size_t StationSet::count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool StationSet::subset_of(const StationSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~other.words_[i]) return false;
    return true;
}

const char* verdict_name(CacheVerdict v) {
    switch (v) {
        case CacheVerdict::Feasible: return "FEASIBLE";
        case CacheVerdict::Infeasible: return "INFEASIBLE";
        case CacheVerdict::Miss: return "MISS";
    }
    return "MISS";
}

ContainmentCache::ContainmentCache(std::vector<StationId> universe, Channel max_channel,
                                   std::uint64_t context_key, std::size_t capacity)
    : universe_(std::move(universe)),
      max_channel_(max_channel),
      context_key_(context_key),
      capacity_(capacity) {
    std::sort(universe_.begin(), universe_.end());
    universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
    for (std::size_t i = 0; i < universe_.size(); ++i) bit_index_[universe_[i]] = i;
}

ContainmentCache::ContainmentCache(ContainmentCache&& other) noexcept {
    *this = std::move(other);
}

ContainmentCache& ContainmentCache::operator=(ContainmentCache&& other) noexcept {
    universe_ = std::move(other.universe_);
    bit_index_ = std::move(other.bit_index_);
    max_channel_ = other.max_channel_;
    context_key_ = other.context_key_;
    capacity_ = other.capacity_;
    next_seq_ = other.next_seq_;
    feasible_ = std::move(other.feasible_);
    infeasible_ = std::move(other.infeasible_);
    feasible_order_ = std::move(other.feasible_order_);
    infeasible_order_ = std::move(other.infeasible_order_);
    n_queries_ = other.n_queries_.load();
    n_feasible_hits_ = other.n_feasible_hits_.load();
    n_infeasible_hits_ = other.n_infeasible_hits_.load();
    n_misses_ = other.n_misses_.load();
    n_adds_ = other.n_adds_.load();
    n_evictions_ = other.n_evictions_.load();
    return *this;
}

namespace {

void fnv(std::uint64_t& h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xff;
        h *= 0x100000001b3ull;
    }
}

}  // namespace

std::uint64_t ContainmentCache::context_key_of(const InterferenceData& data,
                                               Channel max_channel) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    fnv(h, static_cast<std::uint64_t>(max_channel));
    for (const auto& [s, dom] : data.domains) {
        fnv(h, s);
        fnv(h, dom.mask());
    }
    for (const auto& [key, table] : data.constraints) {
        fnv(h, (std::uint64_t{key.first} << 32) | key.second);
        for (Channel c = kMinChannel; c <= kMaxChannel; ++c) fnv(h, table.fwd(c));
    }
    return h;
}

ContainmentCache ContainmentCache::for_dataset(const InterferenceData& data,
                                               Channel max_channel, std::size_t capacity) {
    std::vector<StationId> universe;
    universe.reserve(data.domains.size());
    for (const auto& [s, dom] : data.domains) universe.push_back(s);
    return ContainmentCache(std::move(universe), max_channel,
                            context_key_of(data, max_channel), capacity);
}

std::size_t ContainmentCache::bit_of(StationId s) const {
    auto it = bit_index_.find(s);
    if (it == bit_index_.end())
        throw std::invalid_argument("cache: station " + std::to_string(s) +
                                    " is outside the cache universe");
    return it->second;
}

StationSet ContainmentCache::make_set(const std::vector<StationId>& stations) const {
    StationSet set(universe_.size());
    for (StationId s : stations) set.set(bit_of(s));
    return set;
}

void ContainmentCache::add(const RepackingInstance& inst, const SolverResult& result) {
    if (inst.max_channel != max_channel_)
        throw std::invalid_argument("cache: clearing target does not match cache context");
    if (result.status == SolveStatus::TIMEOUT) return;

    if (result.status == SolveStatus::SAT) {
        if (!result.witness) throw std::invalid_argument("cache: SAT result lacks a witness");
        assert(verify_assignment(inst, *result.witness));
        add_feasible(make_set(inst.stations), *result.witness);
    } else {
        const std::vector<StationId>& set =
            result.infeasible_subset ? *result.infeasible_subset : inst.stations;
        add_infeasible(make_set(set));
    }
    n_adds_.fetch_add(1, std::memory_order_relaxed);
}

void ContainmentCache::add_feasible(StationSet set, ChannelAssignment witness) {
    std::unique_lock lock(mutex_);
    std::size_t pc = set.count();
    auto& bucket = feasible_[pc];
    for (const auto& e : bucket)
        if (e.set == set) return;
    bucket.push_back({std::move(set), std::move(witness), next_seq_});
    feasible_order_.emplace_back(pc, next_seq_);
    ++next_seq_;
    enforce_capacity();
}

void ContainmentCache::add_infeasible(StationSet set) {
    std::unique_lock lock(mutex_);
    std::size_t pc = set.count();
    auto& bucket = infeasible_[pc];
    for (const auto& e : bucket)
        if (e.set == set) return;
    bucket.push_back({std::move(set), next_seq_});
    infeasible_order_.emplace_back(pc, next_seq_);
    ++next_seq_;
    enforce_capacity();
}

void ContainmentCache::enforce_capacity() {
    if (capacity_ == 0) return;
    while (feasible_order_.size() > capacity_) {
        auto [pc, seq] = feasible_order_.front();
        feasible_order_.pop_front();
        auto& bucket = feasible_.at(pc);
        std::erase_if(bucket, [&](const FeasibleEntry& e) { return e.seq == seq; });
        if (bucket.empty()) feasible_.erase(pc);
        n_evictions_.fetch_add(1, std::memory_order_relaxed);
    }
    while (infeasible_order_.size() > capacity_) {
        auto [pc, seq] = infeasible_order_.front();
        infeasible_order_.pop_front();
        auto& bucket = infeasible_.at(pc);
        std::erase_if(bucket, [&](const InfeasibleEntry& e) { return e.seq == seq; });
        if (bucket.empty()) infeasible_.erase(pc);
        n_evictions_.fetch_add(1, std::memory_order_relaxed);
    }
}

CacheAnswer ContainmentCache::query(const std::vector<StationId>& stations) const {
    return query_set(make_set(stations));
}

CacheAnswer ContainmentCache::query_set(const StationSet& q) const {
    if (q.size() != universe_.size())
        throw std::invalid_argument("cache: query universe size mismatch");
    n_queries_.fetch_add(1, std::memory_order_relaxed);
    CacheAnswer answer;
    std::size_t qpc = q.count();
    std::shared_lock lock(mutex_);

    // Infeasible first: entries no larger than the query, ascending popcount.
    for (const auto& [pc, bucket] : infeasible_) {
        if (pc > qpc) break;
        for (const auto& entry : bucket) {
            if (entry.set.subset_of(q)) {
                answer.verdict = CacheVerdict::Infeasible;
                n_infeasible_hits_.fetch_add(1, std::memory_order_relaxed);
                return answer;
            }
        }
    }

    // Feasible entries at least as large as the query, descending popcount.
    for (auto it = feasible_.rbegin(); it != feasible_.rend(); ++it) {
        if (it->first < qpc) break;
        for (const auto& entry : it->second) {
            if (q.subset_of(entry.set)) {
                answer.verdict = CacheVerdict::Feasible;
                for (const auto& [s, c] : entry.witness)
                    if (q.test(bit_index_.at(s))) answer.witness[s] = c;
                n_feasible_hits_.fetch_add(1, std::memory_order_relaxed);
                return answer;
            }
        }
    }

    n_misses_.fetch_add(1, std::memory_order_relaxed);
    return answer;
}

std::size_t ContainmentCache::feasible_size() const {
    std::shared_lock lock(mutex_);
    return feasible_order_.size();
}

std::size_t ContainmentCache::infeasible_size() const {
    std::shared_lock lock(mutex_);
    return infeasible_order_.size();
}

CacheStats ContainmentCache::stats() const {
    CacheStats s;
    s.queries = n_queries_.load();
    s.feasible_hits = n_feasible_hits_.load();
    s.infeasible_hits = n_infeasible_hits_.load();
    s.misses = n_misses_.load();
    s.adds = n_adds_.load();
    s.evictions = n_evictions_.load();
    return s;
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr std::uint32_t kMagic = 0x52504343;  // "RPCC"
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("cache file corrupt: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("cache file corrupt: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
}

void put_set(std::ostream& out, const StationSet& set) {
    put_u64(out, set.words().size());
    for (std::uint64_t w : set.words()) put_u64(out, w);
}

StationSet get_set(std::istream& in, std::size_t n_bits) {
    StationSet set(n_bits);
    std::uint64_t n_words = get_u64(in);
    if (n_words != set.words().size())
        throw std::runtime_error("cache file corrupt: bitset width mismatch");
    for (std::size_t i = 0; i < n_words; ++i) set.words()[i] = get_u64(in);
    return set;
}

}  // namespace

void ContainmentCache::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open cache file for writing: " + path);
    std::shared_lock lock(mutex_);

    put_u32(out, kMagic);
    put_u32(out, kVersion);
    put_u64(out, context_key_);
    put_u32(out, static_cast<std::uint32_t>(max_channel_));
    put_u64(out, universe_.size());
    for (StationId s : universe_) put_u32(out, s);

    put_u64(out, feasible_order_.size());
    for (const auto& [pc, seq] : feasible_order_) {
        const auto& bucket = feasible_.at(pc);
        auto it = std::find_if(bucket.begin(), bucket.end(),
                               [&, seq = seq](const FeasibleEntry& e) { return e.seq == seq; });
        put_set(out, it->set);
        put_u64(out, it->witness.size());
        for (const auto& [s, c] : it->witness) {
            put_u32(out, s);
            put_u32(out, static_cast<std::uint32_t>(c));
        }
    }
    put_u64(out, infeasible_order_.size());
    for (const auto& [pc, seq] : infeasible_order_) {
        const auto& bucket = infeasible_.at(pc);
        auto it = std::find_if(bucket.begin(), bucket.end(),
                               [&, seq = seq](const InfeasibleEntry& e) { return e.seq == seq; });
        put_set(out, it->set);
    }
    if (!out) throw std::runtime_error("cache write failed: " + path);
}

ContainmentCache ContainmentCache::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cache file: " + path);

    if (get_u32(in) != kMagic) throw std::runtime_error("cache file corrupt: bad magic");
    if (get_u32(in) != kVersion) throw std::runtime_error("cache file corrupt: bad version");
    std::uint64_t key = get_u64(in);
    Channel max_channel = static_cast<Channel>(get_u32(in));
    std::uint64_t n_universe = get_u64(in);
    std::vector<StationId> universe;
    universe.reserve(n_universe);
    for (std::uint64_t i = 0; i < n_universe; ++i) universe.push_back(get_u32(in));

    ContainmentCache cache(std::move(universe), max_channel, key);
    std::uint64_t n_feasible = get_u64(in);
    for (std::uint64_t i = 0; i < n_feasible; ++i) {
        StationSet set = get_set(in, cache.universe_.size());
        std::uint64_t n_pairs = get_u64(in);
        ChannelAssignment witness;
        for (std::uint64_t k = 0; k < n_pairs; ++k) {
            StationId s = get_u32(in);
            witness[s] = static_cast<Channel>(get_u32(in));
        }
        cache.add_feasible(std::move(set), std::move(witness));
    }
    std::uint64_t n_infeasible = get_u64(in);
    for (std::uint64_t i = 0; i < n_infeasible; ++i)
        cache.add_infeasible(get_set(in, cache.universe_.size()));
    return cache;
}

ContainmentCache ContainmentCache::load_checked(const std::string& path,
                                                const InterferenceData& data,
                                                Channel max_channel) {
    ContainmentCache cache = load(path);
    if (cache.context_key_ != context_key_of(data, max_channel))
        throw std::runtime_error(
            "cache context mismatch: file was built for a different dataset or "
            "clearing target");
    return cache;
}

std::string ContainmentCache::to_json() const {
    using nlohmann::json;
    std::shared_lock lock(mutex_);
    json doc;
    doc["context_key"] = context_key_;
    doc["max_channel"] = max_channel_;
    doc["capacity"] = capacity_;
    doc["universe"] = universe_;
    json feas = json::array();
    for (const auto& [pc, seq] : feasible_order_) {
        const auto& bucket = feasible_.at(pc);
        auto it = std::find_if(bucket.begin(), bucket.end(),
                               [&, seq = seq](const FeasibleEntry& e) { return e.seq == seq; });
        json entry;
        json stations = json::array();
        for (std::size_t i = 0; i < universe_.size(); ++i)
            if (it->set.test(i)) stations.push_back(universe_[i]);
        entry["stations"] = stations;
        json witness = json::object();
        for (const auto& [s, c] : it->witness) witness[std::to_string(s)] = c;
        entry["witness"] = witness;
        feas.push_back(entry);
    }
    doc["feasible"] = feas;
    json infeas = json::array();
    for (const auto& [pc, seq] : infeasible_order_) {
        const auto& bucket = infeasible_.at(pc);
        auto it = std::find_if(bucket.begin(), bucket.end(),
                               [&, seq = seq](const InfeasibleEntry& e) { return e.seq == seq; });
        json stations = json::array();
        for (std::size_t i = 0; i < universe_.size(); ++i)
            if (it->set.test(i)) stations.push_back(universe_[i]);
        infeas.push_back(stations);
    }
    doc["infeasible"] = infeas;
    return doc.dump(2);
}

ContainmentCache ContainmentCache::from_json(const std::string& text) {
    using nlohmann::json;
    json doc = json::parse(text);
    ContainmentCache cache(doc.at("universe").get<std::vector<StationId>>(),
                           doc.at("max_channel").get<Channel>(),
                           doc.at("context_key").get<std::uint64_t>(),
                           doc.value("capacity", std::size_t{0}));
    for (const auto& entry : doc.at("feasible")) {
        StationSet set = cache.make_set(entry.at("stations").get<std::vector<StationId>>());
        ChannelAssignment witness;
        for (const auto& [key, value] : entry.at("witness").items())
            witness[static_cast<StationId>(std::stoul(key))] = value.get<Channel>();
        cache.add_feasible(std::move(set), std::move(witness));
    }
    for (const auto& entry : doc.at("infeasible"))
        cache.add_infeasible(cache.make_set(entry.get<std::vector<StationId>>()));
    return cache;
}

SolverResult cached_solve(const RepackingInstance& inst, const Portfolio& portfolio,
                          std::chrono::milliseconds cutoff, ContainmentCache& cache) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t0)
            .count();
    };

    if (!inst.trivially_infeasible && !inst.stations.empty()) {
        SimplificationReport rep = decompose(inst);
        std::vector<StationId> key_set = inst.stations;
        std::vector<StationId> certified;
        if (inst.target && rep.others_certified) {
            key_set = rep.target_component;
            for (const auto& c : rep.components)
                if (std::find(c.begin(), c.end(), *inst.target) == c.end())
                    certified.insert(certified.end(), c.begin(), c.end());
        }

        CacheAnswer answer = cache.query(key_set);
        if (answer.verdict == CacheVerdict::Infeasible) {
            SolverResult result;
            result.status = SolveStatus::UNSAT;
            result.solver_name = "cache";
            result.cache_hit = true;
            result.infeasible_subset = std::move(key_set);
            result.runtime_ms = elapsed();
            return result;
        }
        if (answer.verdict == CacheVerdict::Feasible) {
            ChannelAssignment gamma = std::move(answer.witness);
            for (StationId s : certified) gamma[s] = inst.previous->at(s);
            if (verify_assignment(inst, gamma)) {
                SolverResult result;
                result.status = SolveStatus::SAT;
                result.solver_name = "cache";
                result.cache_hit = true;
                result.witness = std::move(gamma);
                result.runtime_ms = elapsed();
                return result;
            }
            assert(false);  // sound stores always restrict to verifying witnesses
        }
    }

    SolverResult result = run_portfolio(inst, portfolio, cutoff);
    if (result.status != SolveStatus::TIMEOUT) cache.add(inst, result);
    result.runtime_ms = elapsed();
    return result;
}

}  // namespace repack
