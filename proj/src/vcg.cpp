#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>

#include "repack/auction.hpp"

namespace repack {

namespace {

constexpr Channel kOff = -1;

struct Option {
    Channel channel;  // kOff = stay off air
    double value;
};

// Exact welfare maximizer over per-station option lists (channels ascending,
// OFF last), depth-first with an optimistic suffix bound. Deterministic: the
// first optimum found in this fixed order is kept.
class WelfareSearch {
public:
    WelfareSearch(const RepackingInstance& inst, const std::vector<std::vector<Option>>& options)
        : inst_(inst), options_(options) {
        std::size_t n = inst_.stations.size();
        suffix_bound_.assign(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            double best = 0.0;
            bool first = true;
            for (const Option& o : options_[i]) {
                if (first || o.value > best) best = o.value;
                first = false;
            }
            suffix_bound_[i] = suffix_bound_[i + 1] + best;
        }
    }

    // Best total welfare and its assignment (OFF stations omitted), or
    // nullopt when no option combination is conflict-free.
    std::optional<std::pair<double, ChannelAssignment>> run() {
        best_found_ = false;
        best_welfare_ = 0.0;
        chosen_.assign(inst_.stations.size(), kOff);
        dfs(0, 0.0);
        if (!best_found_) return std::nullopt;
        ChannelAssignment gamma;
        for (std::size_t i = 0; i < inst_.stations.size(); ++i)
            if (best_choice_[i] != kOff) gamma[inst_.stations[i]] = best_choice_[i];
        return std::make_pair(best_welfare_, std::move(gamma));
    }

private:
    void dfs(std::size_t depth, double welfare) {
        if (best_found_ && welfare + suffix_bound_[depth] <= best_welfare_) return;
        if (depth == inst_.stations.size()) {
            best_found_ = true;
            best_welfare_ = welfare;
            best_choice_ = chosen_;
            return;
        }
        StationId s = inst_.stations[depth];
        for (const Option& o : options_[depth]) {
            if (o.channel != kOff) {
                bool ok = true;
                for (std::size_t j = 0; j < depth; ++j) {
                    if (chosen_[j] == kOff) continue;
                    if (inst_.forbidden(s, o.channel, inst_.stations[j], chosen_[j])) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
            }
            chosen_[depth] = o.channel;
            dfs(depth + 1, welfare + o.value);
            chosen_[depth] = kOff;
        }
    }

    const RepackingInstance& inst_;
    const std::vector<std::vector<Option>>& options_;
    std::vector<double> suffix_bound_;
    std::vector<Channel> chosen_;
    std::vector<Channel> best_choice_;
    double best_welfare_ = 0.0;
    bool best_found_ = false;
};

double assigned_value(const ChannelAssignment& gamma, StationId s, const ValuationMap& vals) {
    auto it = gamma.find(s);
    return it == gamma.end() ? 0.0 : vals.at(s).value_on(band_of(it->second));
}

}  // namespace

AuctionOutcome vcg(const InterferenceData& data, const std::set<StationId>& stations,
                   Channel max_channel, const ValuationMap& valuations,
                   const std::set<StationId>* participants) {
    RepackingInstance inst = build_instance(data, stations, max_channel);
    AuctionOutcome outcome;
    if (inst.stations.empty()) return outcome;

    auto is_participant = [&](StationId s) { return !participants || participants->count(s); };

    double space = 1.0;
    std::vector<std::vector<Option>> options(inst.stations.size());
    for (std::size_t i = 0; i < inst.stations.size(); ++i) {
        StationId s = inst.stations[i];
        if (!valuations.count(s))
            throw std::invalid_argument("vcg: no valuation for station " + std::to_string(s));
        const Valuation& v = valuations.at(s);
        inst.domains.at(s).for_each(
            [&](Channel c) { options[i].push_back({c, v.value_on(band_of(c))}); });
        if (is_participant(s)) options[i].push_back({kOff, 0.0});
        if (options[i].empty())
            throw std::runtime_error("vcg: station " + std::to_string(s) +
                                     " has no channel and must stay on air");
        space *= static_cast<double>(options[i].size());
    }
    if (space > 1e8)
        throw std::invalid_argument("vcg: search space exceeds 1e8 assignments");

    WelfareSearch search(inst, options);
    auto best = search.run();
    if (!best)
        throw std::runtime_error(
            "vcg: clearing target infeasible (no packing satisfies the on-air "
            "requirements)");
    const auto& [optimal_welfare, gamma_star] = *best;

    outcome.final_packing = gamma_star;
    std::vector<StationId> all(inst.stations.begin(), inst.stations.end());
    outcome.value_loss = packing_value_loss(all, gamma_star, valuations);

    for (std::size_t i = 0; i < inst.stations.size(); ++i) {
        StationId s = inst.stations[i];
        if (gamma_star.count(s) || !is_participant(s)) continue;
        outcome.winners.insert(s);

        // Others' welfare under the optimum (s is off, so that is the whole
        // welfare) minus others' welfare under the best packing keeping s on.
        std::vector<std::vector<Option>> forced = options;
        forced[i].erase(std::remove_if(forced[i].begin(), forced[i].end(),
                                       [](const Option& o) { return o.channel == kOff; }),
                        forced[i].end());
        WelfareSearch onair(inst, forced);
        auto tilde = onair.run();
        if (!tilde)
            throw std::runtime_error("vcg: station " + std::to_string(s) +
                                     " cannot be kept on air; payment undefined");
        double others_tilde = tilde->first - assigned_value(tilde->second, s, valuations);
        double payment = optimal_welfare - others_tilde;
        outcome.payments[s] = payment;
        outcome.cost += payment;
    }
    return outcome;
}

}  // namespace repack
