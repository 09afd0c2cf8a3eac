#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace repack {

using StationId = std::uint32_t;
using Channel = int;

inline constexpr Channel kMinChannel = 1;
inline constexpr Channel kMaxChannel = 51;

enum class Band { LVHF, HVHF, UHF, OFF };

// LVHF is 1-6, HVHF is 7-13, UHF is 14-51. Throws outside 1..51.
Band band_of(Channel c);
const char* band_name(Band b);
bool valid_channel(Channel c);

// Set of channels in 1..51 as a single-word bitmask.
class ChannelSet {
public:
    ChannelSet() = default;

    static ChannelSet range(Channel lo, Channel hi) {
        ChannelSet s;
        for (Channel c = lo; c <= hi; ++c) s.add(c);
        return s;
    }

    void add(Channel c) { bits_ |= bit(c); }
    void remove(Channel c) { bits_ &= ~bit(c); }
    bool contains(Channel c) const {
        return c >= kMinChannel && c <= kMaxChannel && (bits_ & bit(c));
    }
    bool empty() const { return bits_ == 0; }
    int count() const { return std::popcount(bits_); }
    std::uint64_t mask() const { return bits_; }
    static ChannelSet from_mask(std::uint64_t m) {
        ChannelSet s;
        s.bits_ = m;
        return s;
    }

    Channel lowest() const { return static_cast<Channel>(std::countr_zero(bits_)); }

    ChannelSet intersect(ChannelSet o) const { return from_mask(bits_ & o.bits_); }
    ChannelSet minus(ChannelSet o) const { return from_mask(bits_ & ~o.bits_); }

    bool operator==(const ChannelSet&) const = default;

    std::vector<Channel> to_vector() const {
        std::vector<Channel> v;
        v.reserve(static_cast<std::size_t>(count()));
        for (std::uint64_t m = bits_; m != 0; m &= m - 1)
            v.push_back(static_cast<Channel>(std::countr_zero(m)));
        return v;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::uint64_t m = bits_; m != 0; m &= m - 1)
            fn(static_cast<Channel>(std::countr_zero(m)));
    }

private:
    static std::uint64_t bit(Channel c) { return std::uint64_t{1} << c; }
    std::uint64_t bits_ = 0;
};

// Total or partial map station -> channel. Ordered so serialization and
// iteration are deterministic.
using ChannelAssignment = std::map<StationId, Channel>;

using StationPair = std::pair<StationId, StationId>;

// Forbidden channel combinations between one ordered station pair (a < b).
// fwd(c) is the mask of b-channels forbidden together with a on channel c;
// rev is the transpose.
class ConflictTable {
public:
    void add(Channel ca, Channel cb) {
        fwd_[static_cast<std::size_t>(ca)] |= std::uint64_t{1} << cb;
        rev_[static_cast<std::size_t>(cb)] |= std::uint64_t{1} << ca;
    }
    std::uint64_t fwd(Channel ca) const { return fwd_[static_cast<std::size_t>(ca)]; }
    std::uint64_t rev(Channel cb) const { return rev_[static_cast<std::size_t>(cb)]; }
    bool forbids(Channel ca, Channel cb) const {
        return fwd_[static_cast<std::size_t>(ca)] & (std::uint64_t{1} << cb);
    }
    bool empty() const {
        for (auto w : fwd_)
            if (w) return false;
        return true;
    }
    std::size_t pair_count() const {
        std::size_t n = 0;
        for (auto w : fwd_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    // Visits every (ca, cb) combination, ca on the lower station.
    template <typename Fn>
    void for_each_pair(Fn&& fn) const {
        for (Channel ca = kMinChannel; ca <= kMaxChannel; ++ca)
            for (std::uint64_t m = fwd_[static_cast<std::size_t>(ca)]; m != 0; m &= m - 1)
                fn(ca, static_cast<Channel>(std::countr_zero(m)));
    }

    bool operator==(const ConflictTable&) const = default;

private:
    std::array<std::uint64_t, kMaxChannel + 1> fwd_{};
    std::array<std::uint64_t, kMaxChannel + 1> rev_{};
};

using ConstraintMap = std::map<StationPair, ConflictTable>;

// Full dataset: per-station channel domains plus forbidden station-channel
// pairs. Immutable once loaded or generated.
struct InterferenceData {
    std::map<StationId, ChannelSet> domains;
    ConstraintMap constraints;
    // Constraint rows referencing channels outside a station's domain are
    // dropped at load; this counts them.
    std::size_t dropped_pairs = 0;

    bool has_station(StationId s) const { return domains.count(s) != 0; }

    // Canonicalizes order and validates the pair invariants (distinct
    // stations, channels in band, gap <= 2).
    void add_pair(StationId s1, Channel c1, StationId s2, Channel c2);

    bool forbidden(StationId s1, Channel c1, StationId s2, Channel c2) const;

    std::size_t pair_count() const {
        std::size_t n = 0;
        for (const auto& [key, table] : constraints) n += table.pair_count();
        return n;
    }

    bool operator==(const InterferenceData&) const;
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One feasibility-checking problem: a station set, a clearing target, and the
// dataset's domains/constraints restricted to both. `previous` is a packing
// known feasible on stations minus `target`.
struct RepackingInstance {
    std::vector<StationId> stations;  // sorted ascending
    Channel max_channel = kMaxChannel;
    std::map<StationId, ChannelSet> domains;
    ConstraintMap constraints;
    std::optional<ChannelAssignment> previous;
    std::optional<StationId> target;

    // Set when some station's restricted domain is empty.
    bool trivially_infeasible = false;
    std::vector<StationId> empty_domain_stations;

    bool has_station(StationId s) const { return domains.count(s) != 0; }
    const ChannelSet& domain(StationId s) const { return domains.at(s); }
    std::size_t station_count() const { return stations.size(); }

    const ConflictTable* table(StationId a, StationId b) const {
        auto it = constraints.find(a < b ? StationPair{a, b} : StationPair{b, a});
        return it == constraints.end() ? nullptr : &it->second;
    }
    bool forbidden(StationId s1, Channel c1, StationId s2, Channel c2) const;

    // Mask of s-channels that conflict with neighbor `other` sitting on `c`.
    std::uint64_t conflict_mask(StationId s, StationId other, Channel c) const;

    // True when `previous` is a verifying packing of stations minus target.
    bool previous_consistent() const;
};

struct InterferenceGraph {
    std::map<StationId, std::vector<StationId>> adjacency;  // sorted neighbor lists

    const std::vector<StationId>& neighbors(StationId s) const {
        static const std::vector<StationId> kEmpty;
        auto it = adjacency.find(s);
        return it == adjacency.end() ? kEmpty : it->second;
    }
    std::size_t edge_count() const;
};

// --- model operations -------------------------------------------------------

InterferenceData load_interference(const std::string& domains_path,
                                   const std::string& constraints_path);
void write_interference(const InterferenceData& data, const std::string& domains_path,
                        const std::string& constraints_path);

// Streams variants used by the file functions and by tests.
InterferenceData parse_interference(std::istream& domains, std::istream& constraints);

RepackingInstance build_instance(const InterferenceData& data,
                                 const std::set<StationId>& stations, Channel max_channel,
                                 std::optional<ChannelAssignment> previous = std::nullopt,
                                 std::optional<StationId> target = std::nullopt);

// Restriction of an existing instance to a station subset. Domains keep any
// pruning already applied; previous/target are restricted along.
RepackingInstance restrict_instance(const RepackingInstance& inst,
                                    const std::vector<StationId>& subset);

InterferenceGraph interference_graph(const RepackingInstance& inst);

bool verify_assignment(const RepackingInstance& inst, const ChannelAssignment& gamma);

// Stations placed uniformly in the unit square; stations within the density
// radius get CO pairs on all shared channels and ADJ+1 pairs on adjacent
// shared channels. Deterministic in seed.
InterferenceData generate_synthetic(std::size_t n_stations, Channel ch_lo, Channel ch_hi,
                                    double density, std::uint64_t seed);

// Instance file: {stations:[...], max_channel:int, previous:{...}|null,
// target:int|null}. Domains/constraints come from the dataset.
RepackingInstance load_instance_json(const std::string& path, const InterferenceData& data);
void save_instance_json(const RepackingInstance& inst, const std::string& path);
std::string instance_to_json(const RepackingInstance& inst);
RepackingInstance instance_from_json(const std::string& text, const InterferenceData& data);

}  // namespace repack
