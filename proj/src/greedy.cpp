#include <stdexcept>

#include "repack/solve.hpp"

namespace repack {

// Keeps every other station on its previous channel and scans the target's
// domain for a compatible slot. Sound for SAT only: a stuck scan says nothing
// about instances that are repackable after moving incumbents, so failure is
// TIMEOUT rather than UNSAT.
SolverResult greedy_check(const RepackingInstance& inst) {
    SolverResult result;
    result.solver_name = "greedy";
    result.status = SolveStatus::TIMEOUT;
    if (!inst.target || !inst.previous)
        throw std::invalid_argument("greedy_check: previous packing and target required");
    if (inst.trivially_infeasible) return result;

    StationId target = *inst.target;
    ChannelAssignment base;
    for (StationId s : inst.stations) {
        if (s == target) continue;
        auto it = inst.previous->find(s);
        if (it == inst.previous->end() || !inst.domains.at(s).contains(it->second)) return result;
        base[s] = it->second;
    }
    for (const auto& [s, c] : base)
        for (const auto& [s2, c2] : base)
            if (s < s2 && inst.forbidden(s, c, s2, c2)) return result;

    std::uint64_t options = inst.domains.at(target).mask();
    for (const auto& [other, channel] : base)
        options &= ~inst.conflict_mask(target, other, channel);
    if (options == 0) return result;

    base[target] = ChannelSet::from_mask(options).lowest();
    result.status = SolveStatus::SAT;
    result.witness = std::move(base);
    return result;
}

}  // namespace repack
