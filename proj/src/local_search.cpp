#include <algorithm>
#include <cassert>
#include <vector>

#include "repack/rng.hpp"
#include "repack/solve.hpp"

namespace repack {

namespace {

// Min-conflicts local search over whole station assignments. Every station
// always holds some channel from its domain; the search walks on the set of
// violated interference pairs. Incomplete: the only UNSAT it can report is a
// domain wipeout.
class LocalSearch {
public:
    LocalSearch(const RepackingInstance& inst, const SolverConfig& config,
                const SolveContext& ctx)
        : inst_(inst), config_(config), ctx_(ctx), rng_(config.seed) {
        n_ = inst_.stations.size();
        for (std::size_t i = 0; i < n_; ++i) index_[inst_.stations[i]] = i;
        domains_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            domains_[i] = inst_.domains.at(inst_.stations[i]).to_vector();
        neighbors_.resize(n_);
        auto graph = interference_graph(inst_);
        for (std::size_t i = 0; i < n_; ++i)
            for (StationId nb : graph.neighbors(inst_.stations[i]))
                neighbors_[i].push_back(index_.at(nb));
        channel_.assign(n_, 0);

        if (config_.warm_start && inst_.previous) {
            warm_.assign(n_, -1);
            for (const auto& [s, c] : *inst_.previous) {
                auto it = index_.find(s);
                if (it != index_.end() && inst_.domains.at(s).contains(c))
                    warm_[it->second] = c;
            }
        }
    }

    SolverResult run() {
        SolverResult result;
        result.solver_name = solver_label(config_);
        result.status = SolveStatus::TIMEOUT;

        initialize(!warm_.empty());
        std::int64_t flips_since_restart = 0;
        while (true) {
            if (violated_.empty()) {
                result.status = SolveStatus::SAT;
                result.witness = extract();
                return result;
            }
            if (++steps_ % 256 == 0 && ctx_.cancelled()) return result;
            if (config_.restart_interval > 0 &&
                flips_since_restart >= config_.restart_interval) {
                bool from_warm = !warm_.empty() &&
                                 rng_.uniform() < config_.warm_start_restart_fraction;
                initialize(from_warm);
                flips_since_restart = 0;
                continue;
            }
            flip();
            ++flips_since_restart;
        }
    }

private:
    void initialize(bool from_warm) {
        violated_.clear();
        vpos_.clear();
        for (std::size_t i = 0; i < n_; ++i) {
            if (from_warm && warm_[i] >= 0)
                channel_[i] = warm_[i];
            else
                channel_[i] = domains_[i][rng_.below(domains_[i].size())];
        }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j : neighbors_[i])
                if (i < j && conflicts(i, channel_[i], j)) mark_violated(i, j);
    }

    bool conflicts(std::size_t i, Channel ci, std::size_t j) const {
        return inst_.forbidden(inst_.stations[i], ci, inst_.stations[j], channel_[j]);
    }

    void mark_violated(std::size_t i, std::size_t j) {
        std::pair<std::size_t, std::size_t> key = std::minmax(i, j);
        if (vpos_.count(key)) return;
        vpos_[key] = violated_.size();
        violated_.push_back(key);
    }

    void clear_violated(std::size_t i, std::size_t j) {
        std::pair<std::size_t, std::size_t> key = std::minmax(i, j);
        auto it = vpos_.find(key);
        if (it == vpos_.end()) return;
        std::size_t pos = it->second;
        vpos_.erase(it);
        if (pos + 1 != violated_.size()) {
            violated_[pos] = violated_.back();
            vpos_[violated_[pos]] = pos;
        }
        violated_.pop_back();
    }

    int break_count(std::size_t i, Channel c) const {
        int n = 0;
        for (std::size_t j : neighbors_[i])
            if (conflicts(i, c, j)) ++n;
        return n;
    }

    void flip() {
        auto [a, b] = violated_[rng_.below(violated_.size())];
        std::size_t i = rng_.below(2) == 0 ? a : b;
        const auto& dom = domains_[i];
        Channel next;
        if (rng_.uniform() < config_.noise) {
            next = dom[rng_.below(dom.size())];
        } else {
            // ties go to the lowest channel (dom is ascending)
            next = dom[0];
            int best = break_count(i, dom[0]);
            for (std::size_t k = 1; k < dom.size(); ++k) {
                int bc = break_count(i, dom[k]);
                if (bc < best) {
                    best = bc;
                    next = dom[k];
                }
            }
        }
        set_channel(i, next);
    }

    void set_channel(std::size_t i, Channel c) {
        if (channel_[i] == c) return;
        channel_[i] = c;
        for (std::size_t j : neighbors_[i]) {
            if (conflicts(i, c, j))
                mark_violated(i, j);
            else
                clear_violated(i, j);
        }
    }

    ChannelAssignment extract() const {
        ChannelAssignment gamma;
        for (std::size_t i = 0; i < n_; ++i) gamma[inst_.stations[i]] = channel_[i];
        return gamma;
    }

    const RepackingInstance& inst_;
    const SolverConfig& config_;
    const SolveContext& ctx_;
    Rng rng_;

    std::size_t n_ = 0;
    std::map<StationId, std::size_t> index_;
    std::vector<std::vector<Channel>> domains_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::vector<Channel> channel_;
    std::vector<Channel> warm_;  // -1 where previous gives no channel

    std::vector<std::pair<std::size_t, std::size_t>> violated_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> vpos_;
    std::uint64_t steps_ = 0;
};

}  // namespace

SolverResult solve_local_ctx(const RepackingInstance& inst, const SolverConfig& config,
                             const SolveContext& ctx) {
    SolverResult result;
    result.solver_name = solver_label(config);
    if (inst.trivially_infeasible) {
        result.status = SolveStatus::UNSAT;
        return result;
    }
    if (inst.stations.empty()) {
        result.status = SolveStatus::SAT;
        result.witness = ChannelAssignment{};
        return result;
    }
    LocalSearch search(inst, config, ctx);
    result = search.run();
    if (result.status == SolveStatus::SAT) assert(verify_assignment(inst, *result.witness));
    return result;
}

SolverResult solve_local(const RepackingInstance& inst, const SolverConfig& config) {
    auto ctx = SolveContext::with_cutoff(std::chrono::milliseconds(config.cutoff_ms));
    return solve_local_ctx(inst, config, ctx);
}

}  // namespace repack
