#include "repack/encode.hpp"

#include <nlohmann/json.hpp>
#include <ostream>

namespace repack {

CnfFormula encode(const RepackingInstance& inst, bool include_at_most_one) {
    if (inst.trivially_infeasible)
        throw std::invalid_argument("encode: instance is trivially infeasible");

    CnfFormula f;
    for (StationId s : inst.stations) {
        inst.domains.at(s).for_each([&](Channel c) {
            f.var_pair.emplace_back(s, c);
            f.var_of_pair.emplace(std::make_pair(s, c), static_cast<int>(f.var_pair.size()));
        });
    }
    f.n_vars = static_cast<int>(f.var_pair.size());

    // (1) each station is assigned at least one channel
    for (StationId s : inst.stations) {
        std::vector<int> clause;
        inst.domains.at(s).for_each([&](Channel c) { clause.push_back(f.var(s, c)); });
        f.clauses.push_back(std::move(clause));
        ++f.n_at_least_one;
    }

    // (2) at most one channel per station (optional; a model with several true
    // channels is resolved by decode instead)
    if (include_at_most_one) {
        for (StationId s : inst.stations) {
            const auto channels = inst.domains.at(s).to_vector();
            for (std::size_t i = 0; i < channels.size(); ++i)
                for (std::size_t j = i + 1; j < channels.size(); ++j) {
                    f.clauses.push_back({-f.var(s, channels[i]), -f.var(s, channels[j])});
                    ++f.n_at_most_one;
                }
        }
    }

    // (3) forbidden station-channel pairs
    for (const auto& [key, table] : inst.constraints) {
        table.for_each_pair([&](Channel ca, Channel cb) {
            f.clauses.push_back({-f.var(key.first, ca), -f.var(key.second, cb)});
            ++f.n_interference;
        });
    }
    return f;
}

ChannelAssignment decode(const CnfFormula& formula, const std::vector<bool>& model) {
    if (model.size() != static_cast<std::size_t>(formula.n_vars))
        throw std::logic_error("decode: model size does not match variable count");
    ChannelAssignment gamma;
    for (int v = 1; v <= formula.n_vars; ++v) {
        if (!model[static_cast<std::size_t>(v - 1)]) continue;
        const auto [s, c] = formula.var_pair[static_cast<std::size_t>(v - 1)];
        auto it = gamma.find(s);
        if (it == gamma.end() || c < it->second) gamma[s] = c;
    }
    // Every station's at-least-one clause must be satisfied.
    for (const auto& [pair, var] : formula.var_of_pair) {
        if (!gamma.count(pair.first))
            throw std::logic_error("decode: no true channel variable for station " +
                                   std::to_string(pair.first));
    }
    return gamma;
}

void write_dimacs(const CnfFormula& formula, std::ostream& out) {
    out << "p cnf " << formula.n_vars << ' ' << formula.clauses.size() << '\n';
    for (const auto& clause : formula.clauses) {
        for (int lit : clause) out << lit << ' ';
        out << "0\n";
    }
}

std::string var_map_json(const CnfFormula& formula) {
    nlohmann::ordered_json vars = nlohmann::ordered_json::array();
    for (int v = 1; v <= formula.n_vars; ++v) {
        const auto [s, c] = formula.var_pair[static_cast<std::size_t>(v - 1)];
        vars.push_back({{"var", v}, {"station", s}, {"channel", c}});
    }
    return nlohmann::ordered_json{{"vars", vars}}.dump(2);
}

}  // namespace repack
