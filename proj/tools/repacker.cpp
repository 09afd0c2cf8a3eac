#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repack/auction.hpp"
#include "repack/bench.hpp"
#include "repack/cache.hpp"
#include "repack/encode.hpp"
#include "repack/model.hpp"
#include "repack/simplify.hpp"
#include "repack/solve.hpp"

namespace {

using nlohmann::json;
using namespace repack;

int g_verbosity = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_verbosity >= 1) std::cerr << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (g_verbosity >= 2) std::cerr << msg << '\n';
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (content.empty() || content.back() != '\n') out << '\n';
}

std::string render(const json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

json witness_json(const ChannelAssignment& gamma) {
    json obj = json::object();
    for (const auto& [s, c] : gamma) obj[std::to_string(s)] = c;
    return obj;
}

json result_json(const SolverResult& result) {
    json j;
    j["status"] = status_name(result.status);
    j["solver"] = result.solver_name;
    j["runtime_ms"] = result.runtime_ms;
    j["cache_hit"] = result.cache_hit;
    j["witness"] = result.witness ? witness_json(*result.witness) : json(nullptr);
    j["infeasible_subset"] =
        result.infeasible_subset ? json(*result.infeasible_subset) : json(nullptr);
    return j;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// --- simulation spec ---------------------------------------------------------
// JSON schema (all knobs optional unless noted):
//   dataset: either {"domains": path, "constraints": path} or
//            {"synthetic": {"n_stations" (required), "ch_lo", "ch_hi",
//                           "density", "seed"}}
//   "stations": [ids]          auctioned stations; default: whole dataset
//   "max_channel": int         clearing target; default 51
//   "seed": int                valuation sampling + checker seed offset
//   "valuations": {"location", "scale"} or {"per_station": {"id": v_uhf}}
//   "opening": {"constant": price} or {"per_station": {"id": price}}
//   "auction": {"decrement_rate", "cutoff_ms", "epsilon", "checker",
//               "use_cache", "cache_capacity", "portfolio" | "portfolio_file"}
//   "vcg": bool                also compute the exact benchmark

struct SimSpec {
    InterferenceData data;
    std::vector<StationId> stations;
    Channel max_channel = kMaxChannel;
    std::uint64_t seed = 0;
    ValuationMap valuations;
    AuctionConfig config;
    bool with_vcg = false;
};

InterferenceData dataset_from_spec(const json& doc) {
    if (doc.contains("synthetic")) {
        const json& g = doc.at("synthetic");
        return generate_synthetic(g.at("n_stations").get<std::size_t>(),
                                  g.value("ch_lo", 14), g.value("ch_hi", 20),
                                  g.value("density", 0.5), g.value("seed", std::uint64_t{0}));
    }
    return load_interference(doc.at("domains").get<std::string>(),
                             doc.at("constraints").get<std::string>());
}

SimSpec load_sim_spec(const std::string& path,
                      const std::optional<std::uint64_t>& seed_override) {
    json doc = json::parse(slurp(path));
    SimSpec spec;
    spec.data = dataset_from_spec(doc);
    spec.seed = seed_override.value_or(doc.value("seed", std::uint64_t{0}));
    spec.max_channel = doc.value("max_channel", kMaxChannel);

    if (doc.contains("stations")) {
        spec.stations = doc.at("stations").get<std::vector<StationId>>();
    } else {
        for (const auto& [s, dom] : spec.data.domains) spec.stations.push_back(s);
    }

    json val = doc.value("valuations", json::object());
    if (val.contains("per_station")) {
        for (const auto& [key, v] : val.at("per_station").items())
            spec.valuations[static_cast<StationId>(std::stoul(key))] =
                Valuation{v.get<double>()};
    } else {
        ValuationModel model;
        model.location = val.value("location", model.location);
        model.scale = val.value("scale", model.scale);
        spec.valuations = sample_valuations(spec.stations, spec.seed, model);
    }

    json opening = doc.value("opening", json::object());
    if (opening.contains("per_station")) {
        for (const auto& [key, v] : opening.at("per_station").items())
            spec.config.opening_price[static_cast<StationId>(std::stoul(key))] =
                v.get<double>();
    } else {
        double constant = opening.value("constant", 100.0);
        for (StationId s : spec.stations) spec.config.opening_price[s] = constant;
    }

    json auc = doc.value("auction", json::object());
    spec.config.decrement_rate = auc.value("decrement_rate", spec.config.decrement_rate);
    spec.config.cutoff_ms = auc.value("cutoff_ms", spec.config.cutoff_ms);
    spec.config.epsilon = auc.value("epsilon", spec.config.epsilon);
    spec.config.use_cache = auc.value("use_cache", spec.config.use_cache);
    spec.config.cache_capacity = auc.value("cache_capacity", spec.config.cache_capacity);
    spec.config.checker = checker_from_name(auc.value("checker", std::string("portfolio")));
    if (auc.contains("portfolio"))
        spec.config.portfolio = portfolio_from_json(auc.at("portfolio").dump());
    else if (auc.contains("portfolio_file"))
        spec.config.portfolio = load_portfolio(auc.at("portfolio_file").get<std::string>());
    spec.config.seed = spec.seed;
    spec.config.max_channel = spec.max_channel;
    spec.with_vcg = doc.value("vcg", false);
    return spec;
}

// --- subcommand option bags ----------------------------------------------------

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::int64_t cutoff_ms = 60000;
    std::string output;
    bool pretty = false;
};

int cmd_solve(const GlobalOpts& global, const std::string& domains,
              const std::string& constraints, const std::string& instance_path,
              const std::string& portfolio_file, const std::string& cache_path,
              const std::string& dimacs_path, const std::string& varmap_path,
              bool explain, bool at_most_one) {
    InterferenceData data = load_interference(domains, constraints);
    RepackingInstance inst = load_instance_json(instance_path, data);
    Portfolio portfolio =
        portfolio_file.empty() ? default_portfolio() : load_portfolio(portfolio_file);
    if (global.seed != 0)
        for (SolverConfig& member : portfolio.members) member.seed += global.seed;

    if (!dimacs_path.empty()) {
        CnfFormula formula = encode(inst, at_most_one);
        std::ofstream out(dimacs_path);
        if (!out) throw std::runtime_error("cannot write " + dimacs_path);
        write_dimacs(formula, out);
        spit(varmap_path.empty() ? dimacs_path + ".vars.json" : varmap_path,
             var_map_json(formula));
        log_info("wrote " + std::to_string(formula.n_vars) + " vars, " +
                 std::to_string(formula.clauses.size()) + " clauses to " + dimacs_path);
    }

    SolverResult result;
    std::chrono::milliseconds cutoff{global.cutoff_ms};
    if (!cache_path.empty()) {
        ContainmentCache cache =
            std::filesystem::exists(cache_path)
                ? ContainmentCache::load_checked(cache_path, data, inst.max_channel)
                : ContainmentCache::for_dataset(data, inst.max_channel);
        result = cached_solve(inst, portfolio, cutoff, cache);
        cache.save(cache_path);
        log_debug("cache now holds " + std::to_string(cache.feasible_size()) +
                  " feasible / " + std::to_string(cache.infeasible_size()) +
                  " infeasible sets");
    } else {
        result = run_portfolio(inst, portfolio, cutoff);
    }

    json out = result_json(result);
    if (explain) {
        auto [pruned, report] = arc_consistency(inst);
        auto [reduced, removal] = remove_unconstrained(pruned);
        report.merge(removal);
        report.merge(decompose(reduced));
        out["simplification"] = json::parse(report.to_json());
    }
    std::cout << render(out, global.pretty) << '\n';
    if (!global.output.empty()) spit(global.output, render(out, global.pretty));

    switch (result.status) {
        case SolveStatus::SAT: return 10;
        case SolveStatus::UNSAT: return 20;
        case SolveStatus::TIMEOUT: return 30;
    }
    return 1;
}

int cmd_simulate(const GlobalOpts& global, const std::string& spec_path,
                 const std::string& events_path, const std::string& dump_dir,
                 bool force_vcg) {
    std::optional<std::uint64_t> seed_override;
    if (global.seed_given) seed_override = global.seed;
    SimSpec spec = load_sim_spec(spec_path, seed_override);
    spec.config.dump_dir = dump_dir;

    AuctionOutcome outcome = run_reverse_auction(spec.data, spec.config, spec.valuations);
    log_info("auction finished after " + std::to_string(outcome.state.round) +
             " rounds with " + std::to_string(outcome.winners.size()) + " winners");

    json report;
    report["auction"] = json::parse(outcome_to_json(outcome));
    if (spec.with_vcg || force_vcg) {
        std::set<StationId> auctioned;
        for (const auto& [s, p] : spec.config.opening_price) auctioned.insert(s);
        std::set<StationId> participants =
            decide_participation(spec.valuations, spec.config.opening_price);
        AuctionOutcome exact =
            vcg(spec.data, auctioned, spec.max_channel, spec.valuations, &participants);
        report["vcg"] = json::parse(outcome_to_json(exact));
        report["metrics"] = json::parse(metrics_to_json(metrics(outcome, spec.valuations, &exact)));
    } else {
        report["metrics"] = json::parse(metrics_to_json(metrics(outcome, spec.valuations)));
    }

    std::cout << render(report, global.pretty) << '\n';
    if (!global.output.empty()) spit(global.output, render(report, global.pretty));
    if (!events_path.empty()) spit(events_path, event_log_csv(outcome.state.event_log));
    return 0;
}

int cmd_vcg(const GlobalOpts& global, const std::string& spec_path) {
    std::optional<std::uint64_t> seed_override;
    if (global.seed_given) seed_override = global.seed;
    SimSpec spec = load_sim_spec(spec_path, seed_override);

    std::set<StationId> auctioned;
    for (const auto& [s, p] : spec.config.opening_price) auctioned.insert(s);
    std::set<StationId> participants =
        decide_participation(spec.valuations, spec.config.opening_price);
    AuctionOutcome outcome =
        vcg(spec.data, auctioned, spec.max_channel, spec.valuations, &participants);

    json report = json::parse(outcome_to_json(outcome));
    std::cout << render(report, global.pretty) << '\n';
    if (!global.output.empty()) spit(global.output, render(report, global.pretty));
    return 0;
}

int cmd_bench(const GlobalOpts& global, const std::string& domains,
              const std::string& constraints, const std::string& corpus_dir,
              const std::string& solvers_arg, const std::string& portfolio_file,
              const std::string& seeds_arg, int harvest, std::uint64_t harvest_seed,
              const std::string& records_path, const std::string& ecdf_path,
              const std::string& summary_path) {
    InterferenceData data = load_interference(domains, constraints);
    Corpus corpus = load_corpus(corpus_dir, data);
    log_info("loaded " + std::to_string(corpus.size()) + " instances from " + corpus_dir);

    if (harvest >= 0) {
        HarvestReport hr =
            harvest_nontrivial(corpus, static_cast<std::size_t>(harvest), harvest_seed);
        log_info("harvest: " + std::to_string(hr.n_nontrivial) + "/" +
                 std::to_string(hr.n_uhf) + " UHF instances nontrivial (fraction " +
                 std::to_string(hr.nontrivial_fraction) + "), kept " +
                 std::to_string(hr.corpus.size()));
        corpus = std::move(hr.corpus);
    }

    std::vector<BenchSolver> subjects;
    for (const std::string& token : split_csv(solvers_arg)) {
        if (token == "greedy") {
            SolverConfig g;
            g.name = "greedy";
            g.kind = SolverKind::Greedy;
            subjects.push_back(bench_solver("greedy", g));
        } else if (token == "complete") {
            SolverConfig c;
            c.name = "complete";
            c.kind = SolverKind::Complete;
            c.preprocess.arc_consistency = true;
            c.preprocess.unconstrained_removal = true;
            c.preprocess.decomposition = true;
            subjects.push_back(bench_solver("complete", c));
        } else if (token == "local_search") {
            SolverConfig l;
            l.name = "local_search";
            l.kind = SolverKind::LocalSearch;
            l.restart_interval = 100000;
            subjects.push_back(bench_solver("local_search", l));
        } else if (token == "portfolio") {
            Portfolio p = portfolio_file.empty() ? default_portfolio()
                                                 : load_portfolio(portfolio_file);
            subjects.push_back(bench_solver("portfolio", p));
        } else {
            throw std::invalid_argument("unknown solver token: " + token +
                                        " (expected greedy|complete|local_search|portfolio)");
        }
    }

    std::vector<std::uint64_t> seeds;
    for (const std::string& s : split_csv(seeds_arg))
        seeds.push_back(std::stoull(s));

    std::vector<BenchmarkRecord> records =
        run_benchmark(corpus, subjects, std::chrono::milliseconds(global.cutoff_ms), seeds);
    std::vector<EcdfSeries> series = ecdf_report(records);

    spit(records_path, records_csv(records));
    spit(ecdf_path, ecdf_csv(series));
    if (!summary_path.empty()) spit(summary_path, solved_summary_csv(series));

    json summary;
    summary["n_instances"] = corpus.size();
    summary["n_records"] = records.size();
    summary["records_csv"] = records_path;
    summary["ecdf_csv"] = ecdf_path;
    json per_solver = json::array();
    for (const EcdfSeries& s : series) {
        json row;
        row["solver"] = s.solver;
        row["n_total"] = s.n_total;
        row["n_solved"] = s.n_solved;
        row["solved_fraction"] = s.solved_fraction;
        per_solver.push_back(row);
    }
    summary["solvers"] = per_solver;
    std::cout << render(summary, global.pretty) << '\n';
    if (!global.output.empty()) spit(global.output, render(summary, global.pretty));
    return 0;
}

int cmd_cache_stats(const GlobalOpts& global, const std::string& cache_path,
                    const std::string& domains, const std::string& constraints,
                    Channel max_channel) {
    ContainmentCache cache = [&] {
        if (!domains.empty() && !constraints.empty()) {
            InterferenceData data = load_interference(domains, constraints);
            return ContainmentCache::load_checked(cache_path, data, max_channel);
        }
        return ContainmentCache::load(cache_path);
    }();

    json j;
    j["context_key"] = cache.context_key();
    j["max_channel"] = cache.max_channel();
    j["universe_size"] = cache.universe().size();
    j["feasible"] = cache.feasible_size();
    j["infeasible"] = cache.infeasible_size();
    std::cout << render(j, global.pretty) << '\n';
    if (!global.output.empty()) spit(global.output, render(j, global.pretty));
    return 0;
}

int cmd_cache_export(const GlobalOpts& global, const std::string& cache_path) {
    ContainmentCache cache = ContainmentCache::load(cache_path);
    std::string text = cache.to_json();
    if (global.output.empty())
        std::cout << text << '\n';
    else
        spit(global.output, text);
    return 0;
}

int cmd_cache_import(const std::string& input_path, const std::string& cache_path) {
    ContainmentCache cache = ContainmentCache::from_json(slurp(input_path));
    cache.save(cache_path);
    log_info("imported " + std::to_string(cache.feasible_size()) + " feasible / " +
             std::to_string(cache.infeasible_size()) + " infeasible sets into " + cache_path);
    return 0;
}

int cmd_gen(const GlobalOpts& global, std::size_t n_stations, Channel ch_lo, Channel ch_hi,
            double density, const std::string& domains, const std::string& constraints) {
    InterferenceData data = generate_synthetic(n_stations, ch_lo, ch_hi, density, global.seed);
    write_interference(data, domains, constraints);

    json j;
    j["stations"] = data.domains.size();
    j["pairs"] = data.pair_count();
    j["domains"] = domains;
    j["constraints"] = constraints;
    std::cout << render(j, global.pretty) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Station repacking feasibility solver and reverse-auction simulator"};
    app.require_subcommand(1);

    GlobalOpts global;
    std::string log_level = "info";
    auto* seed_opt = app.add_option("--seed", global.seed, "Seed offset for stochastic components");
    app.add_option("--cutoff-ms", global.cutoff_ms, "Solve cutoff in milliseconds")
        ->check(CLI::PositiveNumber);
    app.add_option("--log-level", log_level, "quiet|info|debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));
    app.add_option("--output", global.output, "Also write the stdout payload to this file");
    app.add_flag("--pretty", global.pretty, "Indent JSON output");

    // solve
    auto* solve = app.add_subcommand("solve", "Feasibility-check one instance");
    std::string s_domains, s_constraints, s_instance, s_portfolio, s_cache, s_dimacs, s_varmap;
    bool s_explain = false, s_amo = false;
    solve->add_option("--domains", s_domains, "Domains CSV")->required();
    solve->add_option("--constraints", s_constraints, "Constraints CSV")->required();
    solve->add_option("--instance", s_instance, "Instance JSON")->required();
    solve->add_option("--portfolio-file", s_portfolio, "Portfolio config JSON");
    solve->add_option("--cache", s_cache, "Containment cache file (read and updated)");
    solve->add_option("--dimacs", s_dimacs, "Export the CNF encoding here");
    solve->add_option("--varmap", s_varmap, "Variable map sidecar path (default <dimacs>.vars.json)");
    solve->add_flag("--explain", s_explain, "Attach the simplification report");
    solve->add_flag("--at-most-one", s_amo, "Include at-most-one clauses in the encoding");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a descending-clock reverse auction");
    std::string m_spec, m_events, m_dump;
    bool m_vcg = false;
    simulate->add_option("--spec", m_spec, "Simulation spec JSON")->required();
    simulate->add_option("--events", m_events, "Write the per-check event log CSV here");
    simulate->add_option("--dump-checks", m_dump,
                         "Dump every check instance JSON into this directory");
    simulate->add_flag("--vcg", m_vcg, "Also compute the exact benchmark and loss ratio");

    // vcg
    auto* vcg_cmd = app.add_subcommand("vcg", "Exact welfare-optimal benchmark for a spec");
    std::string v_spec;
    vcg_cmd->add_option("--spec", v_spec, "Simulation spec JSON")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark solvers over an instance corpus");
    std::string b_domains, b_constraints, b_corpus, b_solvers = "portfolio", b_portfolio;
    std::string b_seeds, b_records = "bench_records.csv", b_ecdf = "bench_ecdf.csv", b_summary;
    int b_harvest = -1;
    std::uint64_t b_harvest_seed = 0;
    bench->add_option("--domains", b_domains, "Domains CSV")->required();
    bench->add_option("--constraints", b_constraints, "Constraints CSV")->required();
    bench->add_option("--corpus", b_corpus, "Directory of instance JSON files")->required();
    bench->add_option("--solvers", b_solvers, "Comma list: greedy,complete,local_search,portfolio");
    bench->add_option("--portfolio-file", b_portfolio, "Portfolio for the portfolio token");
    bench->add_option("--seeds", b_seeds, "Comma list of seed offsets (one pass each)");
    bench->add_option("--harvest", b_harvest, "Filter to nontrivial instances; subsample to N (0 = all)");
    bench->add_option("--harvest-seed", b_harvest_seed, "Subsample seed");
    bench->add_option("--records", b_records, "Records CSV path");
    bench->add_option("--ecdf", b_ecdf, "ECDF CSV path");
    bench->add_option("--summary", b_summary, "Solved-at-cutoff summary CSV path");

    // cache
    auto* cache_cmd = app.add_subcommand("cache", "Inspect or convert containment caches");
    cache_cmd->require_subcommand(1);
    auto* c_stats = cache_cmd->add_subcommand("stats", "Print cache summary");
    auto* c_export = cache_cmd->add_subcommand("export", "Cache binary -> JSON");
    auto* c_import = cache_cmd->add_subcommand("import", "Cache JSON -> binary");
    std::string c_file, c_domains, c_constraints, c_input;
    Channel c_max_channel = kMaxChannel;
    c_stats->add_option("--cache", c_file, "Cache file")->required();
    c_stats->add_option("--domains", c_domains, "Domains CSV for context validation");
    c_stats->add_option("--constraints", c_constraints, "Constraints CSV for context validation");
    c_stats->add_option("--max-channel", c_max_channel, "Clearing target for context validation");
    c_export->add_option("--cache", c_file, "Cache file")->required();
    c_import->add_option("--input", c_input, "Cache JSON")->required();
    c_import->add_option("--cache", c_file, "Output cache file")->required();

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic interference dataset");
    std::size_t g_stations = 0;
    Channel g_lo = 14, g_hi = 20;
    double g_density = 0.5;
    std::string g_domains, g_constraints;
    gen->add_option("--stations", g_stations, "Station count")->required();
    gen->add_option("--ch-lo", g_lo, "Lowest channel");
    gen->add_option("--ch-hi", g_hi, "Highest channel");
    gen->add_option("--density", g_density, "Interference radius in the unit square");
    gen->add_option("--domains", g_domains, "Output domains CSV")->required();
    gen->add_option("--constraints", g_constraints, "Output constraints CSV")->required();

    for (CLI::App* sub : {solve, simulate, vcg_cmd, bench, gen})
        sub->fallthrough();
    for (CLI::App* sub : {c_stats, c_export, c_import}) sub->fallthrough();
    cache_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    global.seed_given = seed_opt->count() > 0;
    if (log_level == "quiet") g_verbosity = 0;
    if (log_level == "debug") g_verbosity = 2;

    try {
        if (solve->parsed())
            return cmd_solve(global, s_domains, s_constraints, s_instance, s_portfolio,
                             s_cache, s_dimacs, s_varmap, s_explain, s_amo);
        if (simulate->parsed())
            return cmd_simulate(global, m_spec, m_events, m_dump, m_vcg);
        if (vcg_cmd->parsed()) return cmd_vcg(global, v_spec);
        if (bench->parsed())
            return cmd_bench(global, b_domains, b_constraints, b_corpus, b_solvers,
                             b_portfolio, b_seeds, b_harvest, b_harvest_seed, b_records,
                             b_ecdf, b_summary);
        if (cache_cmd->parsed()) {
            if (c_stats->parsed())
                return cmd_cache_stats(global, c_file, c_domains, c_constraints,
                                       c_max_channel);
            if (c_export->parsed()) return cmd_cache_export(global, c_file);
            if (c_import->parsed()) return cmd_cache_import(c_input, c_file);
        }
        if (gen->parsed())
            return cmd_gen(global, g_stations, g_lo, g_hi, g_density, g_domains,
                           g_constraints);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
