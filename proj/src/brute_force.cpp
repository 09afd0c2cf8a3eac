#include <algorithm>
#include <stdexcept>

#include "repack/solve.hpp"

namespace repack {

namespace {

bool extend(const RepackingInstance& inst, const std::vector<StationId>& order,
            std::size_t next, ChannelAssignment& partial) {
    if (next == order.size()) return true;
    StationId s = order[next];
    std::uint64_t options = inst.domains.at(s).mask();
    for (const auto& [other, channel] : partial) {
        options &= ~inst.conflict_mask(s, other, channel);
        if (options == 0) return false;
    }
    for (Channel c : ChannelSet::from_mask(options).to_vector()) {
        partial[s] = c;
        if (extend(inst, order, next + 1, partial)) return true;
        partial.erase(s);
    }
    return false;
}

}  // namespace

SolverResult brute_force(const RepackingInstance& inst) {
    SolverResult result;
    result.solver_name = "brute_force";
    if (inst.trivially_infeasible) {
        result.status = SolveStatus::UNSAT;
        return result;
    }

    double product = 1.0;
    for (StationId s : inst.stations) product *= static_cast<double>(inst.domains.at(s).count());
    if (product > 1e8)
        throw std::invalid_argument("brute_force: search space exceeds 1e8 assignments");

    // Small domains first so dead ends surface early.
    std::vector<StationId> order = inst.stations;
    std::stable_sort(order.begin(), order.end(), [&](StationId a, StationId b) {
        return inst.domains.at(a).count() < inst.domains.at(b).count();
    });

    ChannelAssignment assignment;
    if (extend(inst, order, 0, assignment)) {
        result.status = SolveStatus::SAT;
        result.witness = std::move(assignment);
    } else {
        result.status = SolveStatus::UNSAT;
    }
    return result;
}

}  // namespace repack
