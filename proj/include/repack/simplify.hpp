#pragma once

#include <span>
#include <string>

#include "repack/model.hpp"

namespace repack {

// Station removed by remove_unconstrained together with its domain at removal
// time. Reinsertion must draw from this snapshot: later-removed neighbors are
// reinserted first, and the blocking bound only covers channels from the
// domains as they stood at removal.
struct RemovedStation {
    StationId station;
    ChannelSet domain_at_removal;
};

struct SimplificationReport {
    std::size_t pruned_values = 0;
    std::vector<StationId> removed_stations;  // removal order
    std::vector<RemovedStation> removed_detail;
    std::vector<std::vector<StationId>> components;
    std::vector<StationId> target_component;
    bool others_certified = false;  // non-target components verified against previous

    void merge(const SimplificationReport& other);
    std::string to_json() const;
};

// AC-3 over the interference graph: repeatedly prunes channels that have no
// compatible channel on some neighbor. Preserves satisfiability; flags the
// instance infeasible if a domain wipes out.
std::pair<RepackingInstance, SimplificationReport> arc_consistency(
    const RepackingInstance& inst);

// Removes stations whose domain is larger than the number of values their
// neighbors can simultaneously block (sum over neighbors of the max values a
// single neighbor channel blocks). Sound, incomplete, iterated to fixpoint.
std::pair<RepackingInstance, SimplificationReport> remove_unconstrained(
    const RepackingInstance& inst);

// Connected components of the interference graph. With previous and target
// set, also verifies previous against every non-target component.
SimplificationReport decompose(const RepackingInstance& inst);

// Reduced instance whose free stations lie within `radius` hops of the target;
// everything else is fixed to `previous`, pruning free domains of conflicting
// channels. SAT on the result implies SAT on the original; UNSAT implies
// nothing. Requires previous and target.
RepackingInstance augmentation_ring(const RepackingInstance& inst, int radius);

// Stations within `radius` hops of the target (the ring's free set).
std::vector<StationId> ring_free_set(const RepackingInstance& inst, int radius);

// Greedily re-inserts removed stations (reverse removal order) into a partial
// assignment, checking conflicts against `base` constraints. Returns false if
// some station has no conflict-free channel (cannot happen for stations the
// counting heuristic removed).
bool reinsert_removed(const RepackingInstance& base, std::span<const RemovedStation> removed,
                      ChannelAssignment& assignment);

}  // namespace repack
