#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>

#include "repack/model.hpp"
#include "repack/simplify.hpp"

namespace repack {

enum class SolveStatus { SAT, UNSAT, TIMEOUT };
const char* status_name(SolveStatus s);
SolveStatus status_from_name(const std::string& name);

struct SolverResult {
    SolveStatus status = SolveStatus::TIMEOUT;
    std::optional<ChannelAssignment> witness;  // present iff SAT, verifies
    double runtime_ms = 0.0;
    std::string solver_name;
    // Smallest station set actually proven infeasible (set by the pipeline on
    // UNSAT; the containment cache stores this instead of the full set).
    std::optional<std::vector<StationId>> infeasible_subset;
    bool cache_hit = false;
};

enum class SolverKind { Complete, LocalSearch, Greedy };
enum class DecisionHeuristic { MostConstrainedStation, MaxDegree, Lexicographic };

const char* kind_name(SolverKind k);
const char* heuristic_name(DecisionHeuristic h);

struct PreprocessConfig {
    bool arc_consistency = false;
    bool unconstrained_removal = false;
    bool decomposition = false;
    std::vector<int> ring_radii;  // augmentation-ring schedule; empty = off
};

struct SolverConfig {
    std::string name;  // empty = kind name
    SolverKind kind = SolverKind::Complete;
    std::int64_t cutoff_ms = 60000;
    std::uint64_t seed = 0;

    // complete search
    DecisionHeuristic decision = DecisionHeuristic::MostConstrainedStation;
    std::int64_t restart_interval = 0;  // conflicts for complete, flips for local; 0 = off

    // local search
    double noise = 0.2;
    bool warm_start = false;
    double warm_start_restart_fraction = 0.5;

    PreprocessConfig preprocess;
    bool at_most_one = false;
};

struct Portfolio {
    std::vector<SolverConfig> members;
};

std::string solver_label(const SolverConfig& config);

// Complete + local-search members with and without problem-specific reuse.
Portfolio default_portfolio();

// Portfolio config file: JSON list of SolverConfig objects with defaults.
std::string portfolio_to_json(const Portfolio& p);
Portfolio portfolio_from_json(const std::string& text);
Portfolio load_portfolio(const std::string& path);
SolverConfig solver_config_from_json_text(const std::string& text);

// Shared cancellation: solvers poll the stop flag and the deadline at bounded
// intervals (worst-case latency well under 50 ms).
struct SolveContext {
    std::chrono::steady_clock::time_point deadline;
    const std::atomic<bool>* stop = nullptr;

    bool cancelled() const {
        return (stop && stop->load(std::memory_order_relaxed)) ||
               std::chrono::steady_clock::now() >= deadline;
    }
    static SolveContext with_cutoff(std::chrono::milliseconds cutoff,
                                    const std::atomic<bool>* stop_flag = nullptr) {
        return {std::chrono::steady_clock::now() + cutoff, stop_flag};
    }
};

// Exhaustive backtracking oracle. Exact; never times out. Guarded to product
// of domain sizes <= 1e8.
SolverResult brute_force(const RepackingInstance& inst);

// Tries each channel of the target against the previous packing. Incomplete:
// failure is reported as TIMEOUT, never UNSAT.
SolverResult greedy_check(const RepackingInstance& inst);

// Raw solver kernels (no preprocessing; cutoff from config).
SolverResult solve_complete(const RepackingInstance& inst, const SolverConfig& config);
SolverResult solve_local(const RepackingInstance& inst, const SolverConfig& config);

// One configured solver with its full preprocessing pipeline (augmentation
// rings, arc consistency, unconstrained removal, decomposition) and witness
// assembly back onto the original instance.
SolverResult solve_instance(const RepackingInstance& inst, const SolverConfig& config);

// Internal entry points sharing an external deadline/stop flag.
SolverResult solve_complete_ctx(const RepackingInstance& inst, const SolverConfig& config,
                                const SolveContext& ctx);
SolverResult solve_local_ctx(const RepackingInstance& inst, const SolverConfig& config,
                             const SolveContext& ctx);
SolverResult solve_instance_ctx(const RepackingInstance& inst, const SolverConfig& config,
                                const SolveContext& ctx);

// Runs every member concurrently; first decisive answer wins and cancels the
// rest. TIMEOUT if nothing decisive arrives by the cutoff.
SolverResult run_portfolio(const RepackingInstance& inst, const Portfolio& portfolio,
                           std::chrono::milliseconds cutoff);

}  // namespace repack
