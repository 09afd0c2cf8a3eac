#include <algorithm>
#include <cassert>
#include <chrono>

#include "repack/simplify.hpp"
#include "repack/solve.hpp"

namespace repack {

namespace {

using Clock = std::chrono::steady_clock;

struct CoreOutcome {
    SolveStatus status = SolveStatus::TIMEOUT;
    ChannelAssignment witness;
    // Station set whose canonical instance (dataset domains restricted to the
    // clearing target) was proven infeasible. Only set on the full path:
    // inside an augmentation ring the domains borrow from fixed neighbours,
    // so ring UNSATs prove nothing about the set itself.
    std::optional<std::vector<StationId>> unsat_set;
};

SolverResult run_kernel(const RepackingInstance& inst, const SolverConfig& config,
                        const SolveContext& ctx) {
    switch (config.kind) {
        case SolverKind::Complete:
            return solve_complete_ctx(inst, config, ctx);
        case SolverKind::LocalSearch:
            return solve_local_ctx(inst, config, ctx);
        case SolverKind::Greedy:
            return greedy_check(inst);
    }
    return {};
}

// One component of the canonical instance: arc consistency and unconstrained
// removal to fixpoint, kernel on the remainder, removed stations reinserted.
// An UNSAT here is an UNSAT of the whole component: the fixpoint only ever
// consulted constraints between component members.
CoreOutcome solve_component(const RepackingInstance& comp, const SolverConfig& config,
                            const SolveContext& ctx) {
    CoreOutcome out;
    RepackingInstance work = comp;
    std::vector<RemovedStation> removed;
    bool changed = true;
    while (changed && !work.trivially_infeasible) {
        changed = false;
        if (config.preprocess.arc_consistency) {
            auto [next, report] = arc_consistency(work);
            if (report.pruned_values > 0) changed = true;
            work = std::move(next);
            if (work.trivially_infeasible) break;
        }
        if (config.preprocess.unconstrained_removal) {
            auto [next, report] = remove_unconstrained(work);
            if (!report.removed_detail.empty()) changed = true;
            removed.insert(removed.end(), report.removed_detail.begin(),
                           report.removed_detail.end());
            work = std::move(next);
        }
    }
    if (work.trivially_infeasible) {
        out.status = SolveStatus::UNSAT;
        out.unsat_set = comp.stations;
        return out;
    }

    SolverResult kernel;
    if (work.stations.empty()) {
        kernel.status = SolveStatus::SAT;
        kernel.witness = ChannelAssignment{};
    } else {
        kernel = run_kernel(work, config, ctx);
    }
    if (kernel.status == SolveStatus::UNSAT) {
        out.status = SolveStatus::UNSAT;
        out.unsat_set = comp.stations;
        return out;
    }
    if (kernel.status == SolveStatus::TIMEOUT) return out;

    out.witness = *kernel.witness;
    bool ok = reinsert_removed(comp, removed, out.witness);
    assert(ok);
    (void)ok;
    out.status = SolveStatus::SAT;
    return out;
}

CoreOutcome solve_core(const RepackingInstance& inst, const SolverConfig& config,
                       const SolveContext& ctx) {
    CoreOutcome out;

    std::vector<std::vector<StationId>> comps;
    std::vector<StationId> certified;  // stations covered by previous as-is
    if (config.preprocess.decomposition) {
        SimplificationReport rep = decompose(inst);
        if (inst.target && rep.others_certified) {
            comps.push_back(rep.target_component);
            for (const auto& c : rep.components)
                if (std::find(c.begin(), c.end(), *inst.target) == c.end())
                    certified.insert(certified.end(), c.begin(), c.end());
        } else {
            comps = rep.components;
        }
    } else {
        comps.push_back(inst.stations);
    }
    std::stable_sort(comps.begin(), comps.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });

    ChannelAssignment merged;
    for (StationId s : certified) merged[s] = inst.previous->at(s);

    bool timed_out = false;
    for (const auto& members : comps) {
        RepackingInstance comp = restrict_instance(inst, members);
        CoreOutcome piece = solve_component(comp, config, ctx);
        if (piece.status == SolveStatus::UNSAT) {
            out.status = SolveStatus::UNSAT;
            out.unsat_set = std::move(piece.unsat_set);
            return out;
        }
        if (piece.status == SolveStatus::TIMEOUT) {
            timed_out = true;
            continue;
        }
        merged.insert(piece.witness.begin(), piece.witness.end());
    }
    if (timed_out) return out;
    out.status = SolveStatus::SAT;
    out.witness = std::move(merged);
    return out;
}

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

SolverResult solve_instance_ctx(const RepackingInstance& inst, const SolverConfig& config,
                                const SolveContext& ctx) {
    auto t0 = Clock::now();
    SolverResult result;
    result.solver_name = solver_label(config);

    if (config.kind == SolverKind::Greedy) {
        result = greedy_check(inst);
        result.solver_name = solver_label(config);
        result.runtime_ms = elapsed_ms(t0);
        return result;
    }
    if (inst.trivially_infeasible) {
        result.status = SolveStatus::UNSAT;
        result.infeasible_subset = std::vector<StationId>{inst.empty_domain_stations.front()};
        result.runtime_ms = elapsed_ms(t0);
        return result;
    }
    if (inst.stations.empty()) {
        result.status = SolveStatus::SAT;
        result.witness = ChannelAssignment{};
        result.runtime_ms = elapsed_ms(t0);
        return result;
    }
    if (!inst.target && inst.previous && verify_assignment(inst, *inst.previous)) {
        result.status = SolveStatus::SAT;
        result.witness = inst.previous;
        result.runtime_ms = elapsed_ms(t0);
        return result;
    }

    // Augmentation-ring schedule: local repacking around the target with the
    // rest frozen to the previous packing. SAT transfers to the full
    // instance; UNSAT and TIMEOUT are discarded.
    if (!config.preprocess.ring_radii.empty() && inst.previous && inst.target &&
        inst.previous_consistent()) {
        for (int radius : config.preprocess.ring_radii) {
            if (ctx.cancelled()) {
                result.runtime_ms = elapsed_ms(t0);
                return result;
            }
            if (ring_free_set(inst, radius).size() == inst.stations.size()) break;
            RepackingInstance ring = augmentation_ring(inst, radius);
            if (ring.trivially_infeasible) continue;
            CoreOutcome ring_out = solve_core(ring, config, ctx);
            if (ring_out.status != SolveStatus::SAT) continue;
            ChannelAssignment gamma = std::move(ring_out.witness);
            for (StationId s : inst.stations)
                if (!gamma.count(s)) gamma[s] = inst.previous->at(s);
            assert(verify_assignment(inst, gamma));
            result.status = SolveStatus::SAT;
            result.witness = std::move(gamma);
            result.runtime_ms = elapsed_ms(t0);
            return result;
        }
    }

    CoreOutcome core = solve_core(inst, config, ctx);
    result.status = core.status;
    if (core.status == SolveStatus::SAT) {
        assert(verify_assignment(inst, core.witness));
        result.witness = std::move(core.witness);
    } else if (core.status == SolveStatus::UNSAT) {
        result.infeasible_subset = std::move(core.unsat_set);
    }
    result.runtime_ms = elapsed_ms(t0);
    return result;
}

SolverResult solve_instance(const RepackingInstance& inst, const SolverConfig& config) {
    auto ctx = SolveContext::with_cutoff(std::chrono::milliseconds(config.cutoff_ms));
    return solve_instance_ctx(inst, config, ctx);
}

}  // namespace repack
