#include <cassert>
#include <condition_variable>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "repack/solve.hpp"

namespace repack {

SolverResult run_portfolio(const RepackingInstance& inst, const Portfolio& portfolio,
                           std::chrono::milliseconds cutoff) {
    if (portfolio.members.empty())
        throw std::invalid_argument("run_portfolio: portfolio is empty");

    auto t0 = std::chrono::steady_clock::now();
    std::atomic<bool> stop{false};
    SolveContext ctx{t0 + cutoff, &stop};

    std::mutex mu;
    std::condition_variable cv;
    std::optional<SolverResult> winner;
    std::exception_ptr first_error;
    std::size_t finished = 0;

    std::vector<std::thread> lanes;
    lanes.reserve(portfolio.members.size());
    for (const SolverConfig& member : portfolio.members) {
        lanes.emplace_back([&, member] {
            std::optional<SolverResult> r;
            std::exception_ptr error;
            try {
                r = solve_instance_ctx(inst, member, ctx);
            } catch (...) {
                error = std::current_exception();
            }
            std::lock_guard<std::mutex> lock(mu);
            ++finished;
            if (r && r->status != SolveStatus::TIMEOUT && !winner) {
                winner = std::move(*r);
                stop.store(true, std::memory_order_relaxed);
            }
            if (error && !first_error) first_error = error;
            cv.notify_all();
        });
    }

    {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return winner.has_value() || finished == lanes.size(); });
        stop.store(true, std::memory_order_relaxed);
    }
    for (auto& lane : lanes) lane.join();

    SolverResult result;
    if (winner) {
        result = std::move(*winner);
    } else if (first_error) {
        std::rethrow_exception(first_error);
    } else {
        result.status = SolveStatus::TIMEOUT;
        result.solver_name = "portfolio";
    }
    result.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
}

Portfolio default_portfolio() {
    Portfolio p;

    SolverConfig complete;
    complete.name = "complete";
    complete.kind = SolverKind::Complete;
    complete.seed = 1;
    p.members.push_back(complete);

    SolverConfig complete_pre;
    complete_pre.name = "complete+simplify";
    complete_pre.kind = SolverKind::Complete;
    complete_pre.seed = 2;
    complete_pre.restart_interval = 4096;
    complete_pre.preprocess.arc_consistency = true;
    complete_pre.preprocess.unconstrained_removal = true;
    complete_pre.preprocess.decomposition = true;
    complete_pre.preprocess.ring_radii = {1, 2};
    p.members.push_back(complete_pre);

    SolverConfig local;
    local.name = "local_search";
    local.kind = SolverKind::LocalSearch;
    local.seed = 3;
    local.noise = 0.2;
    local.restart_interval = 100000;
    p.members.push_back(local);

    SolverConfig local_warm;
    local_warm.name = "local_search+warm";
    local_warm.kind = SolverKind::LocalSearch;
    local_warm.seed = 4;
    local_warm.noise = 0.2;
    local_warm.restart_interval = 100000;
    local_warm.warm_start = true;
    local_warm.warm_start_restart_fraction = 0.5;
    local_warm.preprocess.decomposition = true;
    p.members.push_back(local_warm);

    return p;
}

}  // namespace repack
