#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "repack/bench.hpp"
#include "testutil.hpp"

using namespace repack;
using namespace testutil;

namespace {

using std::chrono::milliseconds;

RepackingInstance greedy_blocked_instance() {
    ChannelAssignment prev{{1, 14}, {3, 15}};
    return build_instance(path3_data(), {1, 2, 3}, 15, prev, StationId{2});
}

RepackingInstance greedy_easy_instance() {
    ChannelAssignment prev{{2, 15}};
    return build_instance(e1_data(), {1, 2}, 15, prev, StationId{1});
}

SolverConfig greedy_config() {
    SolverConfig cfg;
    cfg.name = "greedy";
    cfg.kind = SolverKind::Greedy;
    return cfg;
}

const EcdfSeries& series_of(const std::vector<EcdfSeries>& all, const std::string& solver) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const EcdfSeries& s) { return s.solver == solver; });
    REQUIRE(it != all.end());
    return *it;
}

}  // namespace

TEST_CASE("bench solvers wrap configs into one-member portfolios") {
    BenchSolver one = bench_solver("complete", SolverConfig{});
    CHECK(one.label == "complete");
    CHECK(one.portfolio.members.size() == 1);

    BenchSolver four = bench_solver("portfolio", default_portfolio());
    CHECK(four.portfolio.members.size() == 4);
}

TEST_CASE("uhf detection inspects every domain channel") {
    CHECK(uhf_instance(e1_instance()));
    InterferenceData data;
    data.domains[1] = ChannelSet::range(14, 15);
    data.domains[2] = ChannelSet::range(13, 14);
    RepackingInstance inst = build_instance(data, {1, 2}, 15);
    CHECK_FALSE(uhf_instance(inst));
}

TEST_CASE("harvest keeps only nontrivial uhf instances") {
    Corpus logged;
    logged.push_back({"easy", greedy_easy_instance()});
    logged.push_back({"blocked", greedy_blocked_instance()});
    InterferenceData vhf;
    vhf.domains[1] = ChannelSet::range(12, 13);
    logged.push_back({"vhf", build_instance(vhf, {1}, 13)});
    logged.push_back({"bare", e1_instance()});

    HarvestReport report = harvest_nontrivial(logged, 0, 1);
    CHECK(report.n_input == 4);
    CHECK(report.n_uhf == 3);
    CHECK(report.n_nontrivial == 2);
    CHECK(report.nontrivial_fraction == doctest::Approx(2.0 / 3.0));
    REQUIRE(report.corpus.size() == 2);
    CHECK(report.corpus[0].id == "blocked");
    CHECK(report.corpus[1].id == "bare");
}

TEST_CASE("harvest subsampling is uniform, deterministic, and order preserving") {
    Corpus logged;
    for (int i = 0; i < 10; ++i)
        logged.push_back({"b" + std::to_string(i), greedy_blocked_instance()});

    HarvestReport all = harvest_nontrivial(logged, 0, 1);
    CHECK(all.corpus.size() == 10);
    HarvestReport plenty = harvest_nontrivial(logged, 100, 1);
    CHECK(plenty.corpus.size() == 10);

    HarvestReport four = harvest_nontrivial(logged, 4, 5);
    REQUIRE(four.corpus.size() == 4);
    CHECK(four.n_nontrivial == 10);
    std::vector<std::string> ids;
    for (const auto& entry : four.corpus) ids.push_back(entry.id);
    std::vector<std::size_t> positions;
    for (const auto& id : ids) positions.push_back(std::stoul(id.substr(1)));
    CHECK(std::is_sorted(positions.begin(), positions.end()));

    HarvestReport again = harvest_nontrivial(logged, 4, 5);
    std::vector<std::string> ids_again;
    for (const auto& entry : again.corpus) ids_again.push_back(entry.id);
    CHECK(ids == ids_again);
}

TEST_CASE("benchmarks record one row per solver, seed, and instance") {
    Corpus corpus;
    corpus.push_back({"e1", e1_instance()});
    corpus.push_back({"e2", e2_instance()});
    corpus.push_back({"e3", e3_instance()});
    corpus.push_back({"e4", e4_instance()});

    SolverConfig complete;
    complete.name = "complete";
    std::vector<BenchSolver> solvers{bench_solver("complete", complete)};

    std::vector<BenchmarkRecord> records = run_benchmark(corpus, solvers, milliseconds(1000));
    REQUIRE(records.size() == 4);
    std::map<std::string, SolveStatus> status;
    for (const auto& r : records) {
        status[r.instance_id] = r.status;
        CHECK(r.solver == "complete");
        CHECK(r.seed == 0);
        CHECK(r.cutoff_ms == 1000);
        CHECK(r.runtime_ms >= 0.0);
        CHECK(r.runtime_ms <= 1100.0);
    }
    CHECK(status.at("e1") == SolveStatus::SAT);
    CHECK(status.at("e2") == SolveStatus::UNSAT);
    CHECK(status.at("e3") == SolveStatus::UNSAT);
    CHECK(status.at("e4") == SolveStatus::SAT);

    std::vector<BenchmarkRecord> seeded =
        run_benchmark(corpus, solvers, milliseconds(1000), {1, 2});
    CHECK(seeded.size() == 8);
    CHECK(std::count_if(seeded.begin(), seeded.end(),
                        [](const BenchmarkRecord& r) { return r.seed == 1; }) == 4);
    CHECK(std::count_if(seeded.begin(), seeded.end(),
                        [](const BenchmarkRecord& r) { return r.seed == 2; }) == 4);
}

TEST_CASE("benchmark inputs are validated") {
    Corpus corpus{{"e1", e1_instance()}};
    std::vector<BenchSolver> solvers{bench_solver("complete", SolverConfig{})};
    CHECK_THROWS_WITH_AS(run_benchmark(corpus, solvers, milliseconds(0)),
                         "run_benchmark: cutoff must be positive", std::invalid_argument);

    std::vector<BenchSolver> hollow{BenchSolver{"hollow", Portfolio{}}};
    CHECK_THROWS_WITH_AS(run_benchmark(corpus, hollow, milliseconds(100)),
                         "run_benchmark: empty portfolio for solver hollow",
                         std::invalid_argument);

    CHECK(run_benchmark(Corpus{}, solvers, milliseconds(100)).empty());
}

TEST_CASE("inapplicable solvers yield inconclusive records instead of failures") {
    Corpus corpus{{"bare", e2_instance()}};
    std::vector<BenchSolver> solvers{bench_solver("greedy", greedy_config())};
    std::vector<BenchmarkRecord> records = run_benchmark(corpus, solvers, milliseconds(100));
    REQUIRE(records.size() == 1);
    CHECK(records[0].status == SolveStatus::TIMEOUT);
}

TEST_CASE("the portfolio solves at least as much as greedy alone") {
    Corpus corpus;
    corpus.push_back({"blocked", greedy_blocked_instance()});
    corpus.push_back({"easy", greedy_easy_instance()});

    std::vector<BenchSolver> solvers{bench_solver("greedy", greedy_config()),
                                     bench_solver("portfolio", default_portfolio())};
    std::vector<BenchmarkRecord> records = run_benchmark(corpus, solvers, milliseconds(1000));
    std::vector<EcdfSeries> series = ecdf_report(records);
    REQUIRE(series.size() == 2);
    CHECK(series[0].solver == "greedy");
    CHECK(series[1].solver == "portfolio");

    const EcdfSeries& greedy = series_of(series, "greedy");
    const EcdfSeries& portfolio = series_of(series, "portfolio");
    CHECK(greedy.solved_fraction == doctest::Approx(0.5));
    CHECK(portfolio.solved_fraction == doctest::Approx(1.0));
    CHECK(portfolio.solved_fraction >= greedy.solved_fraction);
}

TEST_CASE("ecdf tables are hand checkable") {
    std::vector<BenchmarkRecord> records;
    auto rec = [&](double ms, SolveStatus st) {
        BenchmarkRecord r;
        r.instance_id = "i" + std::to_string(records.size());
        r.solver = "s";
        r.status = st;
        r.runtime_ms = ms;
        records.push_back(r);
    };
    rec(1.0, SolveStatus::SAT);
    rec(1.0, SolveStatus::SAT);
    rec(2.0, SolveStatus::UNSAT);
    rec(3.0, SolveStatus::TIMEOUT);
    rec(0.5, SolveStatus::SAT);

    std::vector<EcdfSeries> series = ecdf_report(records);
    REQUIRE(series.size() == 1);
    const EcdfSeries& s = series[0];
    CHECK(s.n_total == 5);
    CHECK(s.n_solved == 4);
    CHECK(s.solved_fraction == doctest::Approx(0.8));
    REQUIRE(s.points.size() == 3);
    CHECK(s.points[0].runtime_ms == doctest::Approx(0.5));
    CHECK(s.points[0].fraction == doctest::Approx(0.2));
    CHECK(s.points[1].runtime_ms == doctest::Approx(1.0));
    CHECK(s.points[1].fraction == doctest::Approx(0.6));
    CHECK(s.points[2].runtime_ms == doctest::Approx(2.0));
    CHECK(s.points[2].fraction == doctest::Approx(0.8));

    for (std::size_t i = 1; i < s.points.size(); ++i) {
        CHECK(s.points[i].runtime_ms > s.points[i - 1].runtime_ms);
        CHECK(s.points[i].fraction >= s.points[i - 1].fraction);
    }
    CHECK(s.points.back().fraction == doctest::Approx(s.solved_fraction));
}

TEST_CASE("a fully timed out solver produces a flat ecdf") {
    std::vector<BenchmarkRecord> records;
    for (int i = 0; i < 3; ++i) {
        BenchmarkRecord r;
        r.instance_id = "i" + std::to_string(i);
        r.solver = "slow";
        r.status = SolveStatus::TIMEOUT;
        r.runtime_ms = 100.0;
        records.push_back(r);
    }
    std::vector<EcdfSeries> series = ecdf_report(records);
    REQUIRE(series.size() == 1);
    CHECK(series[0].points.empty());
    CHECK(series[0].n_total == 3);
    CHECK(series[0].n_solved == 0);
    CHECK(series[0].solved_fraction == doctest::Approx(0.0));

    CHECK(ecdf_report({}).empty());
}

TEST_CASE("csv exports use the documented headers and formats") {
    BenchmarkRecord r;
    r.instance_id = "i1";
    r.solver = "s";
    r.status = SolveStatus::SAT;
    r.runtime_ms = 1.234567;
    r.seed = 7;
    r.cutoff_ms = 1000;
    CHECK(records_csv({r}) ==
          "instance_id,solver,status,runtime_ms,seed,cutoff_ms\ni1,s,SAT,1.235,7,1000\n");

    EcdfSeries s;
    s.solver = "s";
    s.points = {{0.5, 0.2}, {1.0, 0.6}};
    s.n_total = 5;
    s.n_solved = 4;
    s.solved_fraction = 0.8;
    CHECK(ecdf_csv({s}) == "solver,runtime_ms,fraction\ns,0.500,0.200000\ns,1.000,0.600000\n");
    CHECK(solved_summary_csv({s}) == "solver,n_total,n_solved,solved_fraction\ns,5,4,0.800000\n");
}

TEST_CASE("corpora round-trip through a directory of instance files") {
    InterferenceData data = merge_data(e1_data(), e4_shifted_data());
    Corpus corpus;
    corpus.push_back({"pair", build_instance(data, {1, 2}, 16)});
    ChannelAssignment prev{{11, 14}, {12, 15}, {13, 14}, {14, 15}, {15, 16}};
    corpus.push_back(
        {"cycle", build_instance(data, {11, 12, 13, 14, 15}, 16, prev, StationId{11})});

    TempDir dir;
    save_corpus(corpus, dir.path().string());
    Corpus loaded = load_corpus(dir.path().string(), data);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "cycle");
    CHECK(loaded[1].id == "pair");

    const RepackingInstance& cycle = loaded[0].instance;
    CHECK(cycle.stations == std::vector<StationId>{11, 12, 13, 14, 15});
    CHECK(cycle.max_channel == 16);
    CHECK(cycle.previous == prev);
    CHECK(cycle.target == StationId{11});
    CHECK(cycle.domains == corpus[1].instance.domains);
    CHECK(cycle.constraints == corpus[1].instance.constraints);

    CHECK_THROWS_WITH_AS(load_corpus("/nonexistent/corpus", data),
                         "load_corpus: not a directory: /nonexistent/corpus",
                         std::invalid_argument);
}
