#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <vector>

#include "repack/encode.hpp"
#include "repack/rng.hpp"
#include "repack/solve.hpp"

namespace repack {

namespace {

// DPLL over the direct encoding with two-watched-literal propagation and
// chronological backtracking. Decisions are made station-wise: pick an
// unassigned station, set its lowest open channel variable true, and force the
// sibling variables false. Forcing siblings is satisfiability-preserving here
// because every clause other than the at-least-one clauses is all-negative.
class DpllSolver {
public:
    DpllSolver(const RepackingInstance& inst, const CnfFormula& cnf, const SolverConfig& config,
               const SolveContext& ctx)
        : inst_(inst), cnf_(cnf), config_(config), ctx_(ctx), rng_(config.seed) {
        n_vars_ = cnf_.n_vars;
        value_.assign(static_cast<std::size_t>(n_vars_) + 1, 0);
        watches_.assign(2 * static_cast<std::size_t>(n_vars_), {});

        for (std::size_t i = 0; i < inst_.stations.size(); ++i)
            station_index_[inst_.stations[i]] = i;
        station_vars_.resize(inst_.stations.size());
        for (int v = 1; v <= n_vars_; ++v) {
            auto [s, c] = cnf_.var_pair[static_cast<std::size_t>(v - 1)];
            (void)c;
            station_vars_[station_index_.at(s)].push_back(v);
        }
        var_station_.assign(static_cast<std::size_t>(n_vars_) + 1, 0);
        for (std::size_t si = 0; si < station_vars_.size(); ++si)
            for (int v : station_vars_[si]) var_station_[static_cast<std::size_t>(v)] = si;

        true_count_.assign(station_vars_.size(), 0);
        unset_count_.resize(station_vars_.size());
        for (std::size_t si = 0; si < station_vars_.size(); ++si)
            unset_count_[si] = static_cast<int>(station_vars_[si].size());

        if (config_.decision == DecisionHeuristic::MaxDegree) {
            auto graph = interference_graph(inst_);
            degree_.assign(station_vars_.size(), 0);
            for (StationId s : inst_.stations)
                degree_[station_index_.at(s)] = graph.neighbors(s).size();
        }
    }

    SolverResult run() {
        SolverResult result;
        result.solver_name = solver_label(config_);
        if (!init_clauses() || propagate() >= 0) {
            result.status = SolveStatus::UNSAT;
            return result;
        }
        root_trail_ = trail_.size();
        root_qhead_ = qhead_;

        std::int64_t budget = config_.restart_interval;
        std::int64_t conflicts_since_restart = 0;
        bool diversify = false;

        while (true) {
            if (++steps_ % 256 == 0 && ctx_.cancelled()) {
                result.status = SolveStatus::TIMEOUT;
                return result;
            }
            if (n_assigned_ == station_vars_.size()) {
                result.status = SolveStatus::SAT;
                result.witness = extract_model();
                return result;
            }
            decide(diversify);
            int conflict = propagate();
            while (conflict >= 0) {
                ++conflicts_since_restart;
                if (budget > 0 && conflicts_since_restart >= budget && !decisions_.empty()) {
                    undo_to(root_trail_);
                    decisions_.clear();
                    qhead_ = root_qhead_;
                    budget *= 2;
                    conflicts_since_restart = 0;
                    diversify = true;
                    conflict = -1;
                    break;
                }
                if (!resolve_conflict()) {
                    result.status = SolveStatus::UNSAT;
                    return result;
                }
                conflict = propagate();
            }
        }
    }

private:
    struct Decision {
        std::size_t trail_size;
        int var;
        bool flipped;
    };

    static std::size_t lit_index(int lit) {
        return 2 * static_cast<std::size_t>(std::abs(lit) - 1) + (lit > 0 ? 0 : 1);
    }
    int lit_value(int lit) const {
        int v = value_[static_cast<std::size_t>(std::abs(lit))];
        return lit > 0 ? v : -v;
    }

    bool init_clauses() {
        for (std::size_t ci = 0; ci < cnf_.clauses.size(); ++ci) {
            const auto& cl = cnf_.clauses[ci];
            if (cl.size() == 1) {
                if (lit_value(cl[0]) == -1) return false;
                if (lit_value(cl[0]) == 0) assert_literal(cl[0]);
                continue;
            }
            watched_.push_back(cl);
            std::size_t wi = watched_.size() - 1;
            watches_[lit_index(cl[0])].push_back(wi);
            watches_[lit_index(cl[1])].push_back(wi);
        }
        return true;
    }

    void assert_literal(int lit) {
        int var = std::abs(lit);
        value_[static_cast<std::size_t>(var)] = lit > 0 ? 1 : -1;
        trail_.push_back(lit);
        std::size_t si = var_station_[static_cast<std::size_t>(var)];
        --unset_count_[si];
        if (lit > 0 && ++true_count_[si] == 1) ++n_assigned_;
    }

    void undo_to(std::size_t pos) {
        while (trail_.size() > pos) {
            int lit = trail_.back();
            trail_.pop_back();
            int var = std::abs(lit);
            std::size_t si = var_station_[static_cast<std::size_t>(var)];
            ++unset_count_[si];
            if (lit > 0 && --true_count_[si] == 0) --n_assigned_;
            value_[static_cast<std::size_t>(var)] = 0;
        }
        if (qhead_ > trail_.size()) qhead_ = trail_.size();
    }

    // Returns the index of a falsified clause, or -1.
    int propagate() {
        while (qhead_ < trail_.size()) {
            int p = trail_[qhead_++];
            std::size_t fidx = lit_index(-p);
            auto& wl = watches_[fidx];
            std::size_t i = 0, keep = 0;
            while (i < wl.size()) {
                std::size_t ci = wl[i++];
                auto& cl = watched_[ci];
                if (cl[0] == -p) std::swap(cl[0], cl[1]);
                if (lit_value(cl[0]) == 1) {
                    wl[keep++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < cl.size(); ++k) {
                    if (lit_value(cl[k]) != -1) {
                        std::swap(cl[1], cl[k]);
                        watches_[lit_index(cl[1])].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                wl[keep++] = ci;
                if (lit_value(cl[0]) == -1) {
                    while (i < wl.size()) wl[keep++] = wl[i++];
                    wl.resize(keep);
                    return static_cast<int>(ci);
                }
                assert_literal(cl[0]);
            }
            wl.resize(keep);
        }
        return -1;
    }

    std::size_t pick_station(bool diversify) {
        std::vector<std::size_t> best;
        double best_score = 0.0;
        for (std::size_t si = 0; si < station_vars_.size(); ++si) {
            if (true_count_[si] > 0) continue;
            double score = 0.0;
            switch (config_.decision) {
                case DecisionHeuristic::MostConstrainedStation:
                    score = -static_cast<double>(unset_count_[si]);
                    break;
                case DecisionHeuristic::MaxDegree:
                    score = static_cast<double>(degree_[si]);
                    break;
                case DecisionHeuristic::Lexicographic:
                    score = -static_cast<double>(si);
                    break;
            }
            if (best.empty() || score > best_score) {
                best_score = score;
                best.assign(1, si);
            } else if (score == best_score && diversify) {
                best.push_back(si);
            }
        }
        return diversify && best.size() > 1 ? best[rng_.below(best.size())] : best.front();
    }

    void decide(bool diversify) {
        std::size_t si = pick_station(diversify);
        int var = 0;
        for (int v : station_vars_[si]) {
            if (value_[static_cast<std::size_t>(v)] == 0) {
                var = v;
                break;
            }
        }
        // unset_count_ > 0 whenever true_count_ == 0 survives propagation
        assert(var != 0);
        decisions_.push_back({trail_.size(), var, false});
        assert_literal(var);
        for (int v : station_vars_[si])
            if (v != var && value_[static_cast<std::size_t>(v)] == 0) assert_literal(-v);
    }

    bool resolve_conflict() {
        while (!decisions_.empty()) {
            Decision& d = decisions_.back();
            undo_to(d.trail_size);
            qhead_ = trail_.size();
            if (!d.flipped) {
                d.flipped = true;
                assert_literal(-d.var);
                return true;
            }
            decisions_.pop_back();
        }
        return false;
    }

    ChannelAssignment extract_model() {
        std::vector<bool> model(static_cast<std::size_t>(n_vars_), false);
        for (int v = 1; v <= n_vars_; ++v)
            model[static_cast<std::size_t>(v - 1)] = value_[static_cast<std::size_t>(v)] == 1;
        return decode(cnf_, model);
    }

    const RepackingInstance& inst_;
    const CnfFormula& cnf_;
    const SolverConfig& config_;
    const SolveContext& ctx_;
    Rng rng_;

    int n_vars_ = 0;
    std::vector<std::vector<int>> watched_;
    std::vector<std::vector<std::size_t>> watches_;
    std::vector<int8_t> value_;
    std::vector<int> trail_;
    std::size_t qhead_ = 0;
    std::size_t root_trail_ = 0;
    std::size_t root_qhead_ = 0;
    std::vector<Decision> decisions_;

    std::map<StationId, std::size_t> station_index_;
    std::vector<std::vector<int>> station_vars_;  // ascending channel order
    std::vector<std::size_t> var_station_;
    std::vector<int> true_count_;
    std::vector<int> unset_count_;
    std::vector<std::size_t> degree_;
    std::size_t n_assigned_ = 0;
    std::uint64_t steps_ = 0;
};

}  // namespace

SolverResult solve_complete_ctx(const RepackingInstance& inst, const SolverConfig& config,
                                const SolveContext& ctx) {
    SolverResult result;
    result.solver_name = solver_label(config);
    if (inst.trivially_infeasible) {
        result.status = SolveStatus::UNSAT;
        return result;
    }
    if (inst.stations.empty()) {
        result.status = SolveStatus::SAT;
        result.witness = ChannelAssignment{};
        return result;
    }
    CnfFormula cnf = encode(inst, config.at_most_one);
    DpllSolver solver(inst, cnf, config, ctx);
    result = solver.run();
    if (result.status == SolveStatus::SAT) assert(verify_assignment(inst, *result.witness));
    return result;
}

SolverResult solve_complete(const RepackingInstance& inst, const SolverConfig& config) {
    auto ctx = SolveContext::with_cutoff(std::chrono::milliseconds(config.cutoff_ms));
    return solve_complete_ctx(inst, config, ctx);
}

}  // namespace repack
