#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "repack/auction.hpp"
#include "repack/rng.hpp"

namespace repack {

using nlohmann::json;

ValuationMap sample_valuations(const std::vector<StationId>& stations, std::uint64_t seed,
                               const ValuationModel& model) {
    std::vector<StationId> order = stations;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    Rng rng(seed);
    ValuationMap vals;
    for (StationId s : order) vals[s] = Valuation{rng.lognormal(model.location, model.scale)};
    return vals;
}

std::set<StationId> decide_participation(const ValuationMap& valuations,
                                         const std::map<StationId, double>& opening_prices) {
    std::set<StationId> participating;
    for (const auto& [s, price] : opening_prices) {
        auto it = valuations.find(s);
        if (it == valuations.end())
            throw std::invalid_argument("decide_participation: no valuation for station " +
                                        std::to_string(s));
        if (price > it->second.v_uhf) participating.insert(s);
    }
    return participating;
}

const char* checker_name(CheckerKind k) {
    switch (k) {
        case CheckerKind::PortfolioChecker: return "portfolio";
        case CheckerKind::GreedyChecker: return "greedy";
        case CheckerKind::OracleChecker: return "oracle";
    }
    return "portfolio";
}

CheckerKind checker_from_name(const std::string& name) {
    if (name == "portfolio") return CheckerKind::PortfolioChecker;
    if (name == "greedy") return CheckerKind::GreedyChecker;
    if (name == "oracle") return CheckerKind::OracleChecker;
    throw std::invalid_argument("unknown checker: " + name);
}

const char* bidder_status_name(BidderStatus s) {
    switch (s) {
        case BidderStatus::Active: return "ACTIVE";
        case BidderStatus::Exited: return "EXITED";
        case BidderStatus::Frozen: return "FROZEN";
    }
    return "ACTIVE";
}

namespace {

void validate_config(const AuctionConfig& config, const ValuationMap& valuations) {
    if (config.opening_price.empty())
        throw std::invalid_argument("auction: no stations (opening_price is empty)");
    for (const auto& [s, price] : config.opening_price) {
        if (price < 0.0)
            throw std::invalid_argument("auction: negative opening price for station " +
                                        std::to_string(s));
        if (!valuations.count(s))
            throw std::invalid_argument("auction: no valuation for station " +
                                        std::to_string(s));
    }
    if (config.decrement_rate <= 0.0 || config.decrement_rate >= 1.0)
        throw std::invalid_argument("auction: decrement_rate must lie in (0,1)");
    if (config.cutoff_ms <= 0) throw std::invalid_argument("auction: cutoff must be positive");
    if (config.epsilon < 0.0) throw std::invalid_argument("auction: epsilon must be >= 0");
}

Portfolio checker_portfolio(const AuctionConfig& config) {
    Portfolio p = config.portfolio.members.empty() ? default_portfolio() : config.portfolio;
    if (config.seed != 0)
        for (auto& member : p.members) member.seed += config.seed;
    return p;
}

// One feasibility check: can `target` (if set) join the stations of `inst`
// packed as `inst.previous`?
SolverResult run_check(const RepackingInstance& inst, const AuctionConfig& config,
                       const Portfolio& portfolio, ContainmentCache* cache) {
    switch (config.checker) {
        case CheckerKind::GreedyChecker:
            return greedy_check(inst);
        case CheckerKind::OracleChecker:
            return brute_force(inst);
        case CheckerKind::PortfolioChecker:
            if (cache)
                return cached_solve(inst, portfolio,
                                    std::chrono::milliseconds(config.cutoff_ms), *cache);
            return run_portfolio(inst, portfolio, std::chrono::milliseconds(config.cutoff_ms));
    }
    return {};
}

// Initial packing of the stations that declined to participate. They must be
// feasibly assigned before the clock starts.
ChannelAssignment pack_nonparticipants(const InterferenceData& data,
                                       const std::set<StationId>& nonparticipants,
                                       const AuctionConfig& config) {
    if (nonparticipants.empty()) return {};
    RepackingInstance inst = build_instance(data, nonparticipants, config.max_channel);
    SolverResult result;
    if (config.checker == CheckerKind::OracleChecker) {
        result = brute_force(inst);
    } else {
        SolverConfig solver;
        solver.name = "initial-packing";
        solver.kind = SolverKind::Complete;
        solver.cutoff_ms = config.cutoff_ms;
        solver.preprocess.arc_consistency = true;
        solver.preprocess.unconstrained_removal = true;
        solver.preprocess.decomposition = true;
        result = solve_instance(inst, solver);
    }
    if (result.status != SolveStatus::SAT)
        throw std::runtime_error(
            "auction: clearing target infeasible (nonparticipating stations cannot be "
            "packed)");
    return *result.witness;
}

}  // namespace

double packing_value_loss(const std::vector<StationId>& stations,
                          const ChannelAssignment& packing, const ValuationMap& valuations) {
    double loss = 0.0;
    for (StationId s : stations) {
        const Valuation& v = valuations.at(s);
        auto it = packing.find(s);
        double post = it == packing.end() ? 0.0 : v.value_on(band_of(it->second));
        loss += v.v_uhf - post;
    }
    return loss;
}

AuctionOutcome run_reverse_auction(const InterferenceData& data, const AuctionConfig& config,
                                   const ValuationMap& valuations) {
    validate_config(config, valuations);

    std::vector<StationId> stations;
    for (const auto& [s, price] : config.opening_price) {
        if (!data.has_station(s))
            throw std::invalid_argument("auction: station " + std::to_string(s) +
                                        " is not in the dataset");
        stations.push_back(s);
    }

    std::set<StationId> participants = decide_participation(valuations, config.opening_price);
    std::set<StationId> nonparticipants;
    for (StationId s : stations)
        if (!participants.count(s)) nonparticipants.insert(s);

    Portfolio portfolio = checker_portfolio(config);
    std::optional<ContainmentCache> cache;
    if (config.use_cache && config.checker == CheckerKind::PortfolioChecker)
        cache = ContainmentCache::for_dataset(data, config.max_channel,
                                              config.cache_capacity);

    AuctionOutcome outcome;
    AuctionState& state = outcome.state;
    state.exited_packing = pack_nonparticipants(data, nonparticipants, config);
    for (StationId s : participants) {
        state.status[s] = BidderStatus::Active;
        state.price[s] = config.opening_price.at(s);
    }

    auto active_bidders = [&] {
        std::vector<StationId> out;
        for (const auto& [s, st] : state.status)
            if (st == BidderStatus::Active) out.push_back(s);
        return out;  // map order: ascending station id
    };

    std::size_t dump_seq = 0;
    if (!config.dump_dir.empty()) std::filesystem::create_directories(config.dump_dir);

    std::vector<StationId> active = active_bidders();
    while (!active.empty()) {
        ++state.round;
        for (StationId bidder : active) {
            std::set<StationId> checked{bidder};
            for (const auto& [s, c] : state.exited_packing) checked.insert(s);
            RepackingInstance inst = build_instance(data, checked, config.max_channel,
                                                    state.exited_packing, bidder);
            if (!config.dump_dir.empty()) {
                char name[32];
                std::snprintf(name, sizeof(name), "check-%05zu.json", dump_seq++);
                save_instance_json(
                    inst, (std::filesystem::path(config.dump_dir) / name).string());
            }
            SolverResult result =
                run_check(inst, config, portfolio, cache ? &*cache : nullptr);

            CheckRecord record;
            record.round = state.round;
            record.station = bidder;
            record.stations_checked.assign(checked.begin(), checked.end());
            record.status = result.status;
            record.runtime_ms = result.runtime_ms;
            record.solver_name = result.solver_name;
            record.price_at_check = state.price.at(bidder);
            state.event_log.push_back(std::move(record));

            if (result.status != SolveStatus::SAT) {
                // Not provably repackable: freeze at the current price.
                state.status[bidder] = BidderStatus::Frozen;
                continue;
            }
            double quote = state.price.at(bidder) * (1.0 - config.decrement_rate);
            if (quote < config.epsilon) quote = 0.0;
            state.price[bidder] = quote;
            if (quote <= valuations.at(bidder).v_uhf) {
                state.status[bidder] = BidderStatus::Exited;
                state.exited_packing = *result.witness;
                if (!verify_assignment(inst, state.exited_packing))
                    throw std::logic_error(
                        "auction: exit accepted a non-verifying packing");
            }
        }
        active = active_bidders();
    }

    for (const auto& [s, st] : state.status) {
        if (st == BidderStatus::Frozen) {
            outcome.winners.insert(s);
            outcome.payments[s] = state.price.at(s);
            outcome.cost += state.price.at(s);
        }
    }
    outcome.final_packing = state.exited_packing;
    outcome.value_loss = packing_value_loss(stations, outcome.final_packing, valuations);
    if (cache) outcome.cache_stats = cache->stats();
    return outcome;
}

MetricsReport metrics(const AuctionOutcome& outcome, const ValuationMap& valuations,
                      const AuctionOutcome* optimal) {
    (void)valuations;
    MetricsReport report;
    report.cost = outcome.cost;
    report.value_loss = outcome.value_loss;
    if (optimal) {
        report.has_ratio = true;
        if (optimal->value_loss == 0.0)
            report.value_loss_ratio =
                outcome.value_loss == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        else
            report.value_loss_ratio = outcome.value_loss / optimal->value_loss;
    }
    return report;
}

std::string outcome_to_json(const AuctionOutcome& outcome) {
    json doc;
    doc["winners"] = outcome.winners;
    json payments = json::object();
    for (const auto& [s, p] : outcome.payments) payments[std::to_string(s)] = p;
    doc["payments"] = payments;
    json packing = json::object();
    for (const auto& [s, c] : outcome.final_packing) packing[std::to_string(s)] = c;
    doc["final_packing"] = packing;
    doc["cost"] = outcome.cost;
    doc["value_loss"] = outcome.value_loss;
    doc["rounds"] = outcome.state.round;
    json status = json::object();
    for (const auto& [s, st] : outcome.state.status)
        status[std::to_string(s)] = bidder_status_name(st);
    doc["status"] = status;
    json prices = json::object();
    for (const auto& [s, p] : outcome.state.price) prices[std::to_string(s)] = p;
    doc["prices"] = prices;
    json log = json::array();
    for (const auto& rec : outcome.state.event_log) {
        json entry;
        entry["round"] = rec.round;
        entry["station"] = rec.station;
        entry["stations_checked"] = rec.stations_checked;
        entry["status"] = status_name(rec.status);
        entry["price_at_check"] = rec.price_at_check;
        log.push_back(entry);
    }
    doc["event_log"] = log;
    return doc.dump(2);
}

std::string metrics_to_json(const MetricsReport& report) {
    json doc;
    doc["cost"] = report.cost;
    doc["value_loss"] = report.value_loss;
    if (report.has_ratio) {
        if (std::isinf(report.value_loss_ratio))
            doc["value_loss_ratio"] = "inf";
        else
            doc["value_loss_ratio"] = report.value_loss_ratio;
    }
    return doc.dump(2);
}

std::string event_log_csv(const std::vector<CheckRecord>& log) {
    std::ostringstream out;
    out << "round,station,n_checked,status,runtime_ms,solver\n";
    for (const auto& rec : log) {
        out << rec.round << ',' << rec.station << ',' << rec.stations_checked.size() << ','
            << status_name(rec.status) << ',' << rec.runtime_ms << ',' << rec.solver_name
            << '\n';
    }
    return out.str();
}

}  // namespace repack
