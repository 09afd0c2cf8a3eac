#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "repack/model.hpp"
#include "repack/solve.hpp"

namespace repack {

// One measured solver run. runtime_ms stays within the cutoff plus the
// cancellation-poll tolerance.
struct BenchmarkRecord {
    std::string instance_id;
    std::string solver;
    SolveStatus status = SolveStatus::TIMEOUT;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
    std::int64_t cutoff_ms = 0;
};

struct CorpusEntry {
    std::string id;
    RepackingInstance instance;
};
using Corpus = std::vector<CorpusEntry>;

// A named benchmark subject. Single solvers are one-member portfolios; only
// the portfolio's internal parallelism runs during measurement.
struct BenchSolver {
    std::string label;
    Portfolio portfolio;
};

BenchSolver bench_solver(std::string label, SolverConfig config);
BenchSolver bench_solver(std::string label, Portfolio portfolio);

// Result of filtering a simulation's serialized check instances down to the
// nontrivial ones: UHF-band instances the greedy checker could not solve.
struct HarvestReport {
    Corpus corpus;
    std::size_t n_input = 0;
    std::size_t n_uhf = 0;
    std::size_t n_nontrivial = 0;
    double nontrivial_fraction = 0.0;  // n_nontrivial / n_uhf, 0 when no UHF input
};

// True when every domain in the instance lies in the UHF band.
bool uhf_instance(const RepackingInstance& inst);

// Keeps UHF instances where greedy_check returns non-SAT (instances greedy
// cannot even attempt count as nontrivial), then draws a uniform random
// subsample of `sample_size` without replacement. sample_size 0 keeps all
// retained instances. Input order is preserved in the output.
HarvestReport harvest_nontrivial(const Corpus& logged, std::size_t sample_size,
                                 std::uint64_t seed);

// Runs every (solver, seed, instance) combination sequentially, each with a
// fresh cancellation budget. A nonzero seed offsets every member's seed; an
// empty seed list means one pass with the configs as given.
std::vector<BenchmarkRecord> run_benchmark(const Corpus& corpus,
                                           const std::vector<BenchSolver>& solvers,
                                           std::chrono::milliseconds cutoff,
                                           const std::vector<std::uint64_t>& seeds = {});

struct EcdfPoint {
    double runtime_ms = 0.0;
    double fraction = 0.0;
};

// Right-continuous step function of cumulative solved fraction over runtime.
// TIMEOUT records count in the denominator but never in the solved mass, so
// the curve is nondecreasing and bounded by n_solved / n_total.
struct EcdfSeries {
    std::string solver;
    std::vector<EcdfPoint> points;
    std::size_t n_total = 0;
    std::size_t n_solved = 0;
    double solved_fraction = 0.0;
};

// One series per solver label, ordered by label.
std::vector<EcdfSeries> ecdf_report(const std::vector<BenchmarkRecord>& records);

std::string records_csv(const std::vector<BenchmarkRecord>& records);
std::string ecdf_csv(const std::vector<EcdfSeries>& series);
std::string solved_summary_csv(const std::vector<EcdfSeries>& series);

// Corpus directory: one instance JSON per file; ids are the file stems,
// loaded in ascending id order.
Corpus load_corpus(const std::string& dir, const InterferenceData& data);
void save_corpus(const Corpus& corpus, const std::string& dir);

}  // namespace repack
