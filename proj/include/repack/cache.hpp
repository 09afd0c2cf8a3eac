#pragma once

#include <atomic>
#include <deque>
#include <shared_mutex>
#include <string>

#include "repack/model.hpp"
#include "repack/solve.hpp"

namespace repack {

// Bitset over a cache's station universe (bit i = i-th station in canonical
// id order).
class StationSet {
public:
    StationSet() = default;
    explicit StationSet(std::size_t n_bits)
        : n_bits_(n_bits), words_((n_bits + 63) / 64, 0) {}

    void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    bool test(std::size_t i) const {
        return words_[i / 64] & (std::uint64_t{1} << (i % 64));
    }
    std::size_t size() const { return n_bits_; }
    std::size_t count() const;
    bool subset_of(const StationSet& other) const;  // this ⊆ other
    bool operator==(const StationSet&) const = default;

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

private:
    std::size_t n_bits_ = 0;
    std::vector<std::uint64_t> words_;
};

enum class CacheVerdict { Feasible, Infeasible, Miss };
const char* verdict_name(CacheVerdict v);

struct CacheAnswer {
    CacheVerdict verdict = CacheVerdict::Miss;
    ChannelAssignment witness;  // populated on Feasible, restricted to the query
};

struct CacheStats {
    std::uint64_t queries = 0;
    std::uint64_t feasible_hits = 0;
    std::uint64_t infeasible_hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t adds = 0;
    std::uint64_t evictions = 0;
};

// Feasible store: full solved station sets with witnesses, answering queries
// by superset (witness restricts down). Infeasible store: station sets proven
// unpackable, answering queries by subset (supersets stay unpackable). The
// infeasible check runs first. Entries are bucketed by popcount; queries scan
// infeasible buckets ascending and feasible buckets descending with early
// exit. Reader-writer locked: queries share, adds serialize.
class ContainmentCache {
public:
    ContainmentCache() = default;
    ContainmentCache(std::vector<StationId> universe, Channel max_channel,
                     std::uint64_t context_key, std::size_t capacity = 0);

    // Movable (fresh lock, counters carried over); moving while other threads
    // use the source is undefined.
    ContainmentCache(ContainmentCache&& other) noexcept;
    ContainmentCache& operator=(ContainmentCache&& other) noexcept;

    // FNV-1a over the dataset's domains, constraints, and the clearing
    // target; stable across runs and platforms.
    static std::uint64_t context_key_of(const InterferenceData& data, Channel max_channel);
    static ContainmentCache for_dataset(const InterferenceData& data, Channel max_channel,
                                        std::size_t capacity = 0);

    // SAT stores (instance stations, witness); UNSAT stores
    // result.infeasible_subset (falling back to the full set); TIMEOUT is
    // ignored. Throws on clearing-target or universe mismatch.
    void add(const RepackingInstance& inst, const SolverResult& result);

    CacheAnswer query(const std::vector<StationId>& stations) const;
    CacheAnswer query_set(const StationSet& q) const;

    StationSet make_set(const std::vector<StationId>& stations) const;

    std::size_t feasible_size() const;
    std::size_t infeasible_size() const;
    std::uint64_t context_key() const { return context_key_; }
    Channel max_channel() const { return max_channel_; }
    const std::vector<StationId>& universe() const { return universe_; }
    std::size_t capacity() const { return capacity_; }
    CacheStats stats() const;

    // Length-prefixed little-endian binary records under a
    // magic/version/context header.
    void save(const std::string& path) const;
    static ContainmentCache load(const std::string& path);
    static ContainmentCache load_checked(const std::string& path, const InterferenceData& data,
                                         Channel max_channel);
    std::string to_json() const;
    static ContainmentCache from_json(const std::string& text);

private:
    struct FeasibleEntry {
        StationSet set;
        ChannelAssignment witness;
        std::uint64_t seq;
    };
    struct InfeasibleEntry {
        StationSet set;
        std::uint64_t seq;
    };

    std::size_t bit_of(StationId s) const;
    void add_feasible(StationSet set, ChannelAssignment witness);
    void add_infeasible(StationSet set);
    void enforce_capacity();

    std::vector<StationId> universe_;
    std::map<StationId, std::size_t> bit_index_;
    Channel max_channel_ = kMaxChannel;
    std::uint64_t context_key_ = 0;
    std::size_t capacity_ = 0;  // 0 = unbounded; else per-store FIFO cap
    std::uint64_t next_seq_ = 0;

    std::map<std::size_t, std::vector<FeasibleEntry>> feasible_;    // popcount buckets
    std::map<std::size_t, std::vector<InfeasibleEntry>> infeasible_;
    std::deque<std::pair<std::size_t, std::uint64_t>> feasible_order_;    // (popcount, seq)
    std::deque<std::pair<std::size_t, std::uint64_t>> infeasible_order_;

    mutable std::shared_mutex mutex_;
    mutable std::atomic<std::uint64_t> n_queries_{0}, n_feasible_hits_{0},
        n_infeasible_hits_{0}, n_misses_{0}, n_adds_{0}, n_evictions_{0};
};

// Portfolio solve with a containment-cache front end: decomposes the query,
// consults the cache on the target component (full set when no component is
// certified by previous), and adds fresh decisive answers back.
SolverResult cached_solve(const RepackingInstance& inst, const Portfolio& portfolio,
                          std::chrono::milliseconds cutoff, ContainmentCache& cache);

}  // namespace repack
