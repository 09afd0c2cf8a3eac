#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "repack/solve.hpp"

namespace repack {

using nlohmann::json;

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::SAT: return "SAT";
        case SolveStatus::UNSAT: return "UNSAT";
        case SolveStatus::TIMEOUT: return "TIMEOUT";
    }
    return "TIMEOUT";
}

SolveStatus status_from_name(const std::string& name) {
    if (name == "SAT") return SolveStatus::SAT;
    if (name == "UNSAT") return SolveStatus::UNSAT;
    if (name == "TIMEOUT") return SolveStatus::TIMEOUT;
    throw std::invalid_argument("unknown solver status: " + name);
}

const char* kind_name(SolverKind k) {
    switch (k) {
        case SolverKind::Complete: return "complete";
        case SolverKind::LocalSearch: return "local_search";
        case SolverKind::Greedy: return "greedy";
    }
    return "complete";
}

const char* heuristic_name(DecisionHeuristic h) {
    switch (h) {
        case DecisionHeuristic::MostConstrainedStation: return "most-constrained-station";
        case DecisionHeuristic::MaxDegree: return "max-degree";
        case DecisionHeuristic::Lexicographic: return "lexicographic";
    }
    return "most-constrained-station";
}

std::string solver_label(const SolverConfig& config) {
    return config.name.empty() ? kind_name(config.kind) : config.name;
}

namespace {

SolverKind kind_from_name(const std::string& name) {
    if (name == "complete") return SolverKind::Complete;
    if (name == "local_search") return SolverKind::LocalSearch;
    if (name == "greedy") return SolverKind::Greedy;
    throw std::invalid_argument("unknown solver kind: " + name);
}

DecisionHeuristic heuristic_from_name(const std::string& name) {
    if (name == "most-constrained-station") return DecisionHeuristic::MostConstrainedStation;
    if (name == "max-degree") return DecisionHeuristic::MaxDegree;
    if (name == "lexicographic") return DecisionHeuristic::Lexicographic;
    throw std::invalid_argument("unknown decision heuristic: " + name);
}

json config_to_json_obj(const SolverConfig& c) {
    json pre;
    pre["arc_consistency"] = c.preprocess.arc_consistency;
    pre["unconstrained_removal"] = c.preprocess.unconstrained_removal;
    pre["decomposition"] = c.preprocess.decomposition;
    pre["ring_radii"] = c.preprocess.ring_radii;

    json obj;
    obj["name"] = solver_label(c);
    obj["kind"] = kind_name(c.kind);
    obj["cutoff_ms"] = c.cutoff_ms;
    obj["seed"] = c.seed;
    obj["decision"] = heuristic_name(c.decision);
    obj["restart_interval"] = c.restart_interval;
    obj["noise"] = c.noise;
    obj["warm_start"] = c.warm_start;
    obj["warm_start_restart_fraction"] = c.warm_start_restart_fraction;
    obj["at_most_one"] = c.at_most_one;
    obj["preprocess"] = pre;
    return obj;
}

SolverConfig config_from_json_obj(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("solver config must be a JSON object");
    SolverConfig c;
    c.name = obj.value("name", std::string{});
    c.kind = kind_from_name(obj.value("kind", std::string{"complete"}));
    c.cutoff_ms = obj.value("cutoff_ms", c.cutoff_ms);
    c.seed = obj.value("seed", c.seed);
    c.decision = heuristic_from_name(
        obj.value("decision", std::string{"most-constrained-station"}));
    c.restart_interval = obj.value("restart_interval", c.restart_interval);
    c.noise = obj.value("noise", c.noise);
    c.warm_start = obj.value("warm_start", c.warm_start);
    c.warm_start_restart_fraction =
        obj.value("warm_start_restart_fraction", c.warm_start_restart_fraction);
    c.at_most_one = obj.value("at_most_one", c.at_most_one);
    if (obj.contains("preprocess")) {
        const json& pre = obj.at("preprocess");
        c.preprocess.arc_consistency = pre.value("arc_consistency", false);
        c.preprocess.unconstrained_removal = pre.value("unconstrained_removal", false);
        c.preprocess.decomposition = pre.value("decomposition", false);
        c.preprocess.ring_radii = pre.value("ring_radii", std::vector<int>{});
    }

    if (c.cutoff_ms <= 0) throw std::invalid_argument("solver config: cutoff_ms must be > 0");
    if (c.noise < 0.0 || c.noise > 1.0)
        throw std::invalid_argument("solver config: noise must lie in [0,1]");
    if (c.warm_start_restart_fraction < 0.0 || c.warm_start_restart_fraction > 1.0)
        throw std::invalid_argument(
            "solver config: warm_start_restart_fraction must lie in [0,1]");
    for (int r : c.preprocess.ring_radii)
        if (r < 0) throw std::invalid_argument("solver config: ring radius must be >= 0");
    return c;
}

}  // namespace

std::string portfolio_to_json(const Portfolio& p) {
    json arr = json::array();
    for (const auto& member : p.members) arr.push_back(config_to_json_obj(member));
    return arr.dump(2);
}

Portfolio portfolio_from_json(const std::string& text) {
    json doc = json::parse(text);
    if (doc.is_object() && doc.contains("members")) doc = doc.at("members");
    if (!doc.is_array())
        throw std::invalid_argument("portfolio config must be a JSON list of solver configs");
    Portfolio p;
    for (const auto& obj : doc) p.members.push_back(config_from_json_obj(obj));
    if (p.members.empty()) throw std::invalid_argument("portfolio config must be nonempty");
    return p;
}

SolverConfig solver_config_from_json_text(const std::string& text) {
    return config_from_json_obj(json::parse(text));
}

Portfolio load_portfolio(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open portfolio config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return portfolio_from_json(buf.str());
}

}  // namespace repack
