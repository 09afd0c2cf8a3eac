#pragma once

#include <set>
#include <string>

#include "repack/cache.hpp"
#include "repack/model.hpp"
#include "repack/solve.hpp"

namespace repack {

// Station value by post-auction band. Home band is UHF; moving down or off
// the air loses value in the fixed ratios below.
struct Valuation {
    double v_uhf = 0.0;

    double value_on(Band b) const {
        switch (b) {
            case Band::UHF: return v_uhf;
            case Band::HVHF: return v_uhf * (2.0 / 3.0);
            case Band::LVHF: return v_uhf * (1.0 / 3.0);
            case Band::OFF: return 0.0;
        }
        return 0.0;
    }
};

using ValuationMap = std::map<StationId, Valuation>;

struct ValuationModel {
    double location = 4.605170185988092;  // ln 100
    double scale = 0.5;
};

// Log-normal v_UHF per station, deterministic in seed (stations drawn in
// ascending id order).
ValuationMap sample_valuations(const std::vector<StationId>& stations, std::uint64_t seed,
                               const ValuationModel& model);

// A station enters the auction only when the opening offer strictly beats
// holding its license.
std::set<StationId> decide_participation(const ValuationMap& valuations,
                                         const std::map<StationId, double>& opening_prices);

enum class CheckerKind { PortfolioChecker, GreedyChecker, OracleChecker };
const char* checker_name(CheckerKind k);
CheckerKind checker_from_name(const std::string& name);

struct AuctionConfig {
    std::map<StationId, double> opening_price;  // keys define the auctioned stations
    double decrement_rate = 0.05;               // geometric factor in (0,1)
    std::int64_t cutoff_ms = 5000;              // per feasibility check
    CheckerKind checker = CheckerKind::PortfolioChecker;
    Portfolio portfolio;        // used by PortfolioChecker; empty = default_portfolio()
    bool use_cache = false;     // route portfolio checks through a containment cache
    std::size_t cache_capacity = 0;
    std::uint64_t seed = 0;     // offsets the portfolio members' seeds
    double epsilon = 0.01;      // quotes below this clamp to zero
    Channel max_channel = kMaxChannel;
    std::string dump_dir;       // when set, every check instance is written here as JSON
};

enum class BidderStatus { Active, Exited, Frozen };
const char* bidder_status_name(BidderStatus s);

struct CheckRecord {
    std::size_t round = 0;
    StationId station = 0;
    std::vector<StationId> stations_checked;
    SolveStatus status = SolveStatus::TIMEOUT;
    double runtime_ms = 0.0;
    std::string solver_name;
    double price_at_check = 0.0;
};

struct AuctionState {
    std::map<StationId, BidderStatus> status;  // participants only
    std::map<StationId, double> price;
    ChannelAssignment exited_packing;  // covers exited and nonparticipating stations
    std::size_t round = 0;
    std::vector<CheckRecord> event_log;
};

struct AuctionOutcome {
    std::set<StationId> winners;             // frozen, compensated to go off air
    std::map<StationId, double> payments;    // winners only; absent means zero
    ChannelAssignment final_packing;         // on-air stations
    double cost = 0.0;                       // sum of payments
    double value_loss = 0.0;
    AuctionState state;
    CacheStats cache_stats;  // populated when the checker used a cache
};

// Descending-clock reverse auction. Nonparticipants are packed up front (error
// if impossible); each round every active bidder is feasibility-checked
// against the exited packing, freezing on UNSAT/TIMEOUT and otherwise walking
// its price down until it exits.
AuctionOutcome run_reverse_auction(const InterferenceData& data, const AuctionConfig& config,
                                   const ValuationMap& valuations);

// Exact welfare-maximizing benchmark. Participants may be cleared (OFF);
// everyone else must stay on air. Winners are the cleared stations, each paid
// others' welfare under the optimum minus others' welfare under the best
// packing keeping it on air. Guarded like brute_force.
AuctionOutcome vcg(const InterferenceData& data, const std::set<StationId>& stations,
                   Channel max_channel, const ValuationMap& valuations,
                   const std::set<StationId>* participants = nullptr);

// Σ over stations of (home-band value − achieved value); off-air achieves 0.
double packing_value_loss(const std::vector<StationId>& stations,
                          const ChannelAssignment& packing, const ValuationMap& valuations);

struct MetricsReport {
    double cost = 0.0;
    double value_loss = 0.0;
    bool has_ratio = false;
    double value_loss_ratio = 0.0;  // +inf when optimal lost nothing and we did
};

MetricsReport metrics(const AuctionOutcome& outcome, const ValuationMap& valuations,
                      const AuctionOutcome* optimal = nullptr);

// Outcome report. Deliberately excludes runtimes and winning solver names so
// reruns with one seed serialize identically; timing lives in the CSV export.
std::string outcome_to_json(const AuctionOutcome& outcome);
std::string metrics_to_json(const MetricsReport& report);

// round,station,n_checked,status,runtime_ms,solver per check record.
std::string event_log_csv(const std::vector<CheckRecord>& log);

}  // namespace repack
