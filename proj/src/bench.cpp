#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

#include "repack/bench.hpp"
#include "repack/rng.hpp"

namespace repack {

namespace {

std::string format_ms(double ms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", ms);
    return buf;
}

std::string format_fraction(double f) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", f);
    return buf;
}

}  // namespace

BenchSolver bench_solver(std::string label, SolverConfig config) {
    Portfolio p;
    p.members.push_back(std::move(config));
    return BenchSolver{std::move(label), std::move(p)};
}

BenchSolver bench_solver(std::string label, Portfolio portfolio) {
    return BenchSolver{std::move(label), std::move(portfolio)};
}

bool uhf_instance(const RepackingInstance& inst) {
    for (const auto& [s, dom] : inst.domains) {
        bool ok = true;
        dom.for_each([&](Channel c) { ok = ok && band_of(c) == Band::UHF; });
        if (!ok) return false;
    }
    return true;
}

HarvestReport harvest_nontrivial(const Corpus& logged, std::size_t sample_size,
                                 std::uint64_t seed) {
    HarvestReport report;
    report.n_input = logged.size();

    std::vector<std::size_t> retained;
    for (std::size_t i = 0; i < logged.size(); ++i) {
        const RepackingInstance& inst = logged[i].instance;
        if (!uhf_instance(inst)) continue;
        ++report.n_uhf;
        bool nontrivial = true;
        try {
            nontrivial = greedy_check(inst).status != SolveStatus::SAT;
        } catch (const std::invalid_argument&) {
            // No previous/target: greedy augmentation does not even apply.
        }
        if (!nontrivial) continue;
        ++report.n_nontrivial;
        retained.push_back(i);
    }
    report.nontrivial_fraction =
        report.n_uhf == 0
            ? 0.0
            : static_cast<double>(report.n_nontrivial) / static_cast<double>(report.n_uhf);

    if (sample_size != 0 && sample_size < retained.size()) {
        Rng rng(seed);
        for (std::size_t k = 0; k < sample_size; ++k) {
            std::size_t j = k + static_cast<std::size_t>(
                                    rng.below(static_cast<std::uint64_t>(retained.size() - k)));
            std::swap(retained[k], retained[j]);
        }
        retained.resize(sample_size);
        std::sort(retained.begin(), retained.end());
    }

    report.corpus.reserve(retained.size());
    for (std::size_t i : retained) report.corpus.push_back(logged[i]);
    return report;
}

std::vector<BenchmarkRecord> run_benchmark(const Corpus& corpus,
                                           const std::vector<BenchSolver>& solvers,
                                           std::chrono::milliseconds cutoff,
                                           const std::vector<std::uint64_t>& seeds) {
    if (cutoff.count() <= 0)
        throw std::invalid_argument("run_benchmark: cutoff must be positive");
    const std::vector<std::uint64_t> runs =
        seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;

    std::vector<BenchmarkRecord> records;
    records.reserve(corpus.size() * solvers.size() * runs.size());
    for (const BenchSolver& solver : solvers) {
        if (solver.portfolio.members.empty())
            throw std::invalid_argument("run_benchmark: empty portfolio for solver " +
                                        solver.label);
        for (std::uint64_t seed : runs) {
            Portfolio tuned = solver.portfolio;
            if (seed != 0)
                for (SolverConfig& member : tuned.members) member.seed += seed;
            for (const CorpusEntry& entry : corpus) {
                SolverResult result;
                try {
                    result = run_portfolio(entry.instance, tuned, cutoff);
                } catch (const std::invalid_argument&) {
                    // Solver not applicable to this instance (e.g. greedy
                    // without a previous packing): inconclusive, not fatal.
                    result.status = SolveStatus::TIMEOUT;
                    result.solver_name = solver.label;
                }
                BenchmarkRecord rec;
                rec.instance_id = entry.id;
                rec.solver = solver.label;
                rec.status = result.status;
                rec.runtime_ms = result.runtime_ms;
                rec.seed = seed;
                rec.cutoff_ms = cutoff.count();
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::vector<EcdfSeries> ecdf_report(const std::vector<BenchmarkRecord>& records) {
    std::map<std::string, std::vector<const BenchmarkRecord*>> by_solver;
    for (const BenchmarkRecord& r : records) by_solver[r.solver].push_back(&r);

    std::vector<EcdfSeries> out;
    out.reserve(by_solver.size());
    for (const auto& [solver, rs] : by_solver) {
        EcdfSeries series;
        series.solver = solver;
        series.n_total = rs.size();

        std::vector<double> solved;
        for (const BenchmarkRecord* r : rs)
            if (r->status != SolveStatus::TIMEOUT) solved.push_back(r->runtime_ms);
        std::sort(solved.begin(), solved.end());
        series.n_solved = solved.size();
        series.solved_fraction =
            static_cast<double>(series.n_solved) / static_cast<double>(series.n_total);

        for (std::size_t i = 0; i < solved.size(); ++i) {
            // Collapse ties so each step carries the full mass at its runtime.
            if (i + 1 < solved.size() && solved[i + 1] == solved[i]) continue;
            series.points.push_back(EcdfPoint{
                solved[i],
                static_cast<double>(i + 1) / static_cast<double>(series.n_total)});
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::string records_csv(const std::vector<BenchmarkRecord>& records) {
    std::ostringstream out;
    out << "instance_id,solver,status,runtime_ms,seed,cutoff_ms\n";
    for (const BenchmarkRecord& r : records)
        out << r.instance_id << ',' << r.solver << ',' << status_name(r.status) << ','
            << format_ms(r.runtime_ms) << ',' << r.seed << ',' << r.cutoff_ms << '\n';
    return out.str();
}

std::string ecdf_csv(const std::vector<EcdfSeries>& series) {
    std::ostringstream out;
    out << "solver,runtime_ms,fraction\n";
    for (const EcdfSeries& s : series)
        for (const EcdfPoint& p : s.points)
            out << s.solver << ',' << format_ms(p.runtime_ms) << ','
                << format_fraction(p.fraction) << '\n';
    return out.str();
}

std::string solved_summary_csv(const std::vector<EcdfSeries>& series) {
    std::ostringstream out;
    out << "solver,n_total,n_solved,solved_fraction\n";
    for (const EcdfSeries& s : series)
        out << s.solver << ',' << s.n_total << ',' << s.n_solved << ','
            << format_fraction(s.solved_fraction) << '\n';
    return out.str();
}

Corpus load_corpus(const std::string& dir, const InterferenceData& data) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw std::invalid_argument("load_corpus: not a directory: " + dir);

    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());

    Corpus corpus;
    corpus.reserve(paths.size());
    for (const fs::path& p : paths)
        corpus.push_back(CorpusEntry{p.stem().string(), load_instance_json(p.string(), data)});
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const CorpusEntry& entry : corpus)
        save_instance_json(entry.instance, (fs::path(dir) / (entry.id + ".json")).string());
}

}  // namespace repack
