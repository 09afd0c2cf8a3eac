#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "oracles.hpp"
#include "repack/cache.hpp"
#include "repack/rng.hpp"
#include "testutil.hpp"

using namespace repack;
using namespace testutil;

namespace {

using std::chrono::milliseconds;

SolverResult sat_result(const RepackingInstance& inst) {
    SolverResult res = brute_force(inst);
    REQUIRE(res.status == SolveStatus::SAT);
    return res;
}

std::vector<StationId> stations_of_mask(const std::vector<StationId>& universe,
                                        std::uint64_t mask) {
    std::vector<StationId> out;
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) out.push_back(universe[i]);
    return out;
}

}  // namespace

TEST_CASE("station sets track bits over the universe") {
    StationSet set(70);
    set.set(0);
    set.set(69);
    CHECK(set.test(0));
    CHECK(set.test(69));
    CHECK_FALSE(set.test(35));
    CHECK(set.count() == 2);
    CHECK(set.size() == 70);

    StationSet super(70);
    super.set(0);
    super.set(35);
    super.set(69);
    CHECK(set.subset_of(super));
    CHECK_FALSE(super.subset_of(set));
    CHECK(set == set);
}

TEST_CASE("feasible answers restrict stored witnesses to the query") {
    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);
    cache.add(e1_instance(), sat_result(e1_instance()));
    CHECK(cache.feasible_size() == 1);

    CacheAnswer full = cache.query({1, 2});
    REQUIRE(full.verdict == CacheVerdict::Feasible);
    CHECK(verify_assignment(e1_instance(), full.witness));

    CacheAnswer part = cache.query({1});
    REQUIRE(part.verdict == CacheVerdict::Feasible);
    CHECK(part.witness.size() == 1);
    CHECK(part.witness.count(1) == 1);
}

TEST_CASE("infeasible answers cover supersets") {
    InterferenceData merged = merge_data(e3_data(), [] {
        InterferenceData extra;
        extra.domains[9] = ChannelSet::range(14, 15);
        return extra;
    }());
    ContainmentCache cache = ContainmentCache::for_dataset(merged, 15);

    SolverResult unsat = brute_force(e3_instance());
    REQUIRE(unsat.status == SolveStatus::UNSAT);
    cache.add(e3_instance(), unsat);
    CHECK(cache.infeasible_size() == 1);

    CHECK(cache.query({1, 2, 3, 4, 5}).verdict == CacheVerdict::Infeasible);
    CHECK(cache.query({1, 2, 3, 4, 5, 9}).verdict == CacheVerdict::Infeasible);
    CHECK(cache.query({1, 2, 3, 4}).verdict == CacheVerdict::Miss);
}

TEST_CASE("unsat answers store the localized infeasible subset") {
    InterferenceData merged = merge_data(e3_data(), [] {
        InterferenceData extra;
        extra.domains[9] = ChannelSet::range(14, 15);
        extra.domains[10] = ChannelSet::range(14, 15);
        return extra;
    }());
    RepackingInstance inst = build_instance(merged, station_set(merged), 15);
    ContainmentCache cache = ContainmentCache::for_dataset(merged, 15);

    SolverResult unsat;
    unsat.status = SolveStatus::UNSAT;
    unsat.infeasible_subset = std::vector<StationId>{1, 2, 3, 4, 5};
    cache.add(inst, unsat);

    CHECK(cache.query({1, 2, 3, 4, 5}).verdict == CacheVerdict::Infeasible);
    CHECK(cache.query({1, 2, 3, 4, 5, 9, 10}).verdict == CacheVerdict::Infeasible);
    CHECK(cache.query({9, 10}).verdict == CacheVerdict::Miss);
}

TEST_CASE("the pipeline localizes unsat verdicts to a component") {
    InterferenceData merged = merge_data(e3_data(), [] {
        InterferenceData extra;
        extra.domains[9] = ChannelSet::range(14, 15);
        return extra;
    }());
    RepackingInstance inst = build_instance(merged, station_set(merged), 15);
    SolverConfig cfg;
    cfg.kind = SolverKind::Complete;
    cfg.cutoff_ms = 2000;
    cfg.preprocess.decomposition = true;
    SolverResult res = solve_instance(inst, cfg);
    REQUIRE(res.status == SolveStatus::UNSAT);
    REQUIRE(res.infeasible_subset);
    RepackingInstance sub = restrict_instance(inst, *res.infeasible_subset);
    CHECK(brute_force(sub).status == SolveStatus::UNSAT);
    CHECK(res.infeasible_subset->size() < inst.stations.size());
}

TEST_CASE("timeouts are never cached") {
    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);
    SolverResult timeout;
    timeout.status = SolveStatus::TIMEOUT;
    cache.add(e1_instance(), timeout);
    CHECK(cache.feasible_size() == 0);
    CHECK(cache.infeasible_size() == 0);
    CHECK(cache.stats().adds == 0);
}

TEST_CASE("cache input validation") {
    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);

    RepackingInstance wrong_target = build_instance(e1_data(), {1, 2}, 14);
    CHECK_THROWS_WITH_AS(cache.add(wrong_target, SolverResult{}),
                         "cache: clearing target does not match cache context",
                         std::invalid_argument);

    SolverResult bare_sat;
    bare_sat.status = SolveStatus::SAT;
    CHECK_THROWS_WITH_AS(cache.add(e1_instance(), bare_sat),
                         "cache: SAT result lacks a witness", std::invalid_argument);

    CHECK_THROWS_WITH_AS(cache.make_set({99}), "cache: station 99 is outside the cache universe",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(cache.query_set(StationSet(5)), "cache: query universe size mismatch",
                         std::invalid_argument);
}

TEST_CASE("verdicts match a linear scan over thousands of random operations") {
    InterferenceData data = generate_synthetic(64, 14, 18, 0.15, 123);
    std::vector<StationId> universe(station_set(data).begin(), station_set(data).end());
    REQUIRE(universe.size() == 64);

    ContainmentCache cache = ContainmentCache::for_dataset(data, 18);
    oracles::LinearCache linear;
    std::vector<std::vector<StationId>> added;

    Rng rng(2024);
    int feasible_hits = 0, infeasible_hits = 0, misses = 0;
    for (int op = 0; op < 2000; ++op) {
        std::vector<StationId> subset;
        if (!added.empty() && rng.chance(0.5)) {
            const auto& base = added[rng.below(added.size())];
            for (StationId s : base)
                if (rng.chance(0.7)) subset.push_back(s);
        } else {
            std::set<StationId> pick;
            std::size_t n = 1 + rng.below(10);
            while (pick.size() < n) pick.insert(universe[rng.below(universe.size())]);
            subset.assign(pick.begin(), pick.end());
        }
        if (subset.empty()) subset.push_back(universe[rng.below(universe.size())]);

        RepackingInstance inst =
            build_instance(data, std::set<StationId>(subset.begin(), subset.end()), 18);
        if (rng.chance(0.4)) {
            SolverResult res = brute_force(inst);
            cache.add(inst, res);
            linear.add(inst, res);
            added.push_back(inst.stations);
        } else {
            CacheAnswer a = cache.query(inst.stations);
            CacheAnswer b = linear.query(inst.stations);
            CHECK(a.verdict == b.verdict);
            if (a.verdict == CacheVerdict::Feasible) {
                CHECK(verify_assignment(inst, a.witness));
                ++feasible_hits;
            } else if (a.verdict == CacheVerdict::Infeasible) {
                CHECK(brute_force(inst).status == SolveStatus::UNSAT);
                ++infeasible_hits;
            } else {
                ++misses;
            }
        }
    }
    CHECK(feasible_hits > 50);
    CHECK(infeasible_hits > 50);
    CHECK(misses > 50);

    CacheStats stats = cache.stats();
    CHECK(stats.feasible_hits == static_cast<std::uint64_t>(feasible_hits));
    CHECK(stats.infeasible_hits == static_cast<std::uint64_t>(infeasible_hits));
    CHECK(stats.misses == static_cast<std::uint64_t>(misses));
    CHECK(stats.queries == stats.feasible_hits + stats.infeasible_hits + stats.misses);
}

TEST_CASE("an exhaustive subset sweep matches containment semantics") {
    InterferenceData data = generate_synthetic(12, 14, 16, 0.4, 77);
    std::vector<StationId> universe(station_set(data).begin(), station_set(data).end());
    REQUIRE(universe.size() == 12);

    ContainmentCache cache = ContainmentCache::for_dataset(data, 16);
    oracles::LinearCache linear;

    Rng rng(99);
    for (int i = 0; i < 40; ++i) {
        std::set<StationId> pick;
        std::size_t n = 2 + rng.below(9);
        while (pick.size() < n) pick.insert(universe[rng.below(universe.size())]);
        RepackingInstance inst = build_instance(data, pick, 16);
        SolverResult res = brute_force(inst);
        cache.add(inst, res);
        linear.add(inst, res);
    }
    REQUIRE(cache.feasible_size() + cache.infeasible_size() > 10);

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << 12); ++mask) {
        std::vector<StationId> q = stations_of_mask(universe, mask);
        CacheAnswer a = cache.query(q);
        CacheAnswer b = linear.query(q);
        CHECK(a.verdict == b.verdict);
        if (mask == 0) continue;
        RepackingInstance inst =
            build_instance(data, std::set<StationId>(q.begin(), q.end()), 16);
        if (a.verdict == CacheVerdict::Feasible) {
            CHECK(verify_assignment(inst, a.witness));
        } else if (a.verdict == CacheVerdict::Infeasible) {
            CHECK(brute_force(inst).status == SolveStatus::UNSAT);
        }
    }
}

TEST_CASE("bounded caches evict oldest entries first") {
    InterferenceData data = generate_synthetic(16, 14, 16, 0.2, 31);
    ContainmentCache cache = ContainmentCache::for_dataset(data, 16, 3);
    oracles::LinearCache linear;
    linear.capacity = 3;
    CHECK(cache.capacity() == 3);

    std::vector<StationId> universe(station_set(data).begin(), station_set(data).end());
    Rng rng(555);
    for (int i = 0; i < 60; ++i) {
        std::set<StationId> pick;
        std::size_t n = 1 + rng.below(6);
        while (pick.size() < n) pick.insert(universe[rng.below(universe.size())]);
        RepackingInstance inst = build_instance(data, pick, 16);
        SolverResult res = brute_force(inst);
        cache.add(inst, res);
        linear.add(inst, res);
        CHECK(cache.feasible_size() <= 3);
        CHECK(cache.infeasible_size() <= 3);
    }
    CHECK(cache.stats().evictions > 0);

    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << 16); mask += 97) {
        std::vector<StationId> q = stations_of_mask(universe, mask);
        CHECK(cache.query(q).verdict == linear.query(q).verdict);
    }
}

TEST_CASE("duplicate additions are ignored") {
    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);
    SolverResult res = sat_result(e1_instance());
    cache.add(e1_instance(), res);
    cache.add(e1_instance(), res);
    CHECK(cache.feasible_size() == 1);
}

TEST_CASE("caches survive a save and load round trip") {
    InterferenceData data = generate_synthetic(12, 14, 16, 0.4, 77);
    std::vector<StationId> universe(station_set(data).begin(), station_set(data).end());
    ContainmentCache cache = ContainmentCache::for_dataset(data, 16);

    Rng rng(99);
    for (int i = 0; i < 30; ++i) {
        std::set<StationId> pick;
        std::size_t n = 2 + rng.below(9);
        while (pick.size() < n) pick.insert(universe[rng.below(universe.size())]);
        RepackingInstance inst = build_instance(data, pick, 16);
        cache.add(inst, brute_force(inst));
    }

    TempDir dir;
    auto path = dir.file("cache.bin");
    cache.save(path);

    ContainmentCache loaded = ContainmentCache::load(path);
    CHECK(loaded.universe() == cache.universe());
    CHECK(loaded.context_key() == cache.context_key());
    CHECK(loaded.max_channel() == cache.max_channel());
    CHECK(loaded.feasible_size() == cache.feasible_size());
    CHECK(loaded.infeasible_size() == cache.infeasible_size());

    ContainmentCache checked = ContainmentCache::load_checked(path, data, 16);
    CHECK(checked.context_key() == cache.context_key());

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << 12); mask += 13) {
        std::vector<StationId> q = stations_of_mask(universe, mask);
        CacheAnswer a = cache.query(q);
        CacheAnswer b = loaded.query(q);
        CHECK(a.verdict == b.verdict);
        if (b.verdict == CacheVerdict::Feasible && mask != 0) {
            RepackingInstance inst =
                build_instance(data, std::set<StationId>(q.begin(), q.end()), 16);
            CHECK(verify_assignment(inst, b.witness));
        }
    }

    ContainmentCache empty = ContainmentCache::for_dataset(e1_data(), 15);
    auto empty_path = dir.file("empty.bin");
    empty.save(empty_path);
    ContainmentCache empty_loaded = ContainmentCache::load(empty_path);
    CHECK(empty_loaded.feasible_size() == 0);
    CHECK(empty_loaded.universe() == empty.universe());
}

TEST_CASE("corrupt cache files are rejected") {
    TempDir dir;
    auto garbage = dir.file("garbage.bin");
    write_file(garbage, "this is not a cache file");
    CHECK_THROWS_WITH_AS(ContainmentCache::load(garbage),
                         "cache file corrupt: bad magic", std::runtime_error);

    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);
    cache.add(e1_instance(), sat_result(e1_instance()));
    auto valid = dir.file("valid.bin");
    cache.save(valid);
    std::string bytes = read_file(valid);
    auto truncated = dir.file("truncated.bin");
    write_file(truncated, bytes.substr(0, 10));
    CHECK_THROWS_WITH_AS(ContainmentCache::load(truncated),
                         "cache file corrupt: truncated", std::runtime_error);

    CHECK_THROWS_WITH_AS(
        ContainmentCache::load_checked(valid, e1_data(), 14),
        "cache context mismatch: file was built for a different dataset or clearing target",
        std::runtime_error);
    InterferenceData other = e1_data();
    other.domains[3] = ChannelSet::range(14, 15);
    CHECK_THROWS_WITH_AS(
        ContainmentCache::load_checked(valid, other, 15),
        "cache context mismatch: file was built for a different dataset or clearing target",
        std::runtime_error);

    CHECK_THROWS_WITH_AS(ContainmentCache::load("/nonexistent/cache.bin"),
                         "cannot open cache file: /nonexistent/cache.bin", std::runtime_error);
}

TEST_CASE("caches round-trip through JSON") {
    ContainmentCache cache = ContainmentCache::for_dataset(e3_data(), 15);
    cache.add(e3_instance(), brute_force(e3_instance()));
    RepackingInstance pair = build_instance(e3_data(), {1, 2}, 15);
    cache.add(pair, sat_result(pair));

    ContainmentCache parsed = ContainmentCache::from_json(cache.to_json());
    CHECK(parsed.universe() == cache.universe());
    CHECK(parsed.context_key() == cache.context_key());
    CHECK(parsed.feasible_size() == cache.feasible_size());
    CHECK(parsed.infeasible_size() == cache.infeasible_size());
    CHECK(parsed.query({1, 2, 3, 4, 5}).verdict == CacheVerdict::Infeasible);
    CHECK(parsed.query({1, 2}).verdict == CacheVerdict::Feasible);
}

TEST_CASE("context keys are stable and sensitive") {
    std::uint64_t key = ContainmentCache::context_key_of(e1_data(), 15);
    CHECK(key == ContainmentCache::context_key_of(e1_data(), 15));
    CHECK(key != ContainmentCache::context_key_of(e1_data(), 14));
    InterferenceData other = e1_data();
    other.add_pair(1, 15, 2, 14);
    CHECK(key != ContainmentCache::context_key_of(other, 15));
    CHECK(ContainmentCache::for_dataset(e1_data(), 15).context_key() == key);
}

TEST_CASE("verdict names are stable") {
    CHECK(verdict_name(CacheVerdict::Feasible) == std::string{"FEASIBLE"});
    CHECK(verdict_name(CacheVerdict::Infeasible) == std::string{"INFEASIBLE"});
    CHECK(verdict_name(CacheVerdict::Miss) == std::string{"MISS"});
}

TEST_CASE("cached solves hit on repeats") {
    ContainmentCache cache = ContainmentCache::for_dataset(e1_data(), 15);
    SolverResult first = cached_solve(e1_instance(), default_portfolio(), milliseconds(2000), cache);
    REQUIRE(first.status == SolveStatus::SAT);
    CHECK_FALSE(first.cache_hit);
    CHECK(cache.feasible_size() == 1);

    SolverResult second =
        cached_solve(e1_instance(), default_portfolio(), milliseconds(2000), cache);
    REQUIRE(second.status == SolveStatus::SAT);
    CHECK(second.cache_hit);
    CHECK(second.solver_name == "cache");
    CHECK(verify_assignment(e1_instance(), *second.witness));

    ContainmentCache unsat_cache = ContainmentCache::for_dataset(e3_data(), 15);
    SolverResult u1 = cached_solve(e3_instance(), default_portfolio(), milliseconds(2000),
                                   unsat_cache);
    REQUIRE(u1.status == SolveStatus::UNSAT);
    CHECK_FALSE(u1.cache_hit);
    SolverResult u2 = cached_solve(e3_instance(), default_portfolio(), milliseconds(2000),
                                   unsat_cache);
    REQUIRE(u2.status == SolveStatus::UNSAT);
    CHECK(u2.cache_hit);
    CHECK(u2.solver_name == "cache");
    REQUIRE(u2.infeasible_subset);
    CHECK(*u2.infeasible_subset == e3_instance().stations);
}

TEST_CASE("cached solves key on the target component when others are certified") {
    InterferenceData merged = merge_data(e1_data(), e4_shifted_data());
    ChannelAssignment prev{{11, 14}, {12, 15}, {13, 14}, {14, 15}, {15, 16}};
    RepackingInstance inst =
        build_instance(merged, station_set(merged), 16, prev, StationId{1});
    ContainmentCache cache = ContainmentCache::for_dataset(merged, 16);

    SolverResult first = cached_solve(inst, default_portfolio(), milliseconds(2000), cache);
    REQUIRE(first.status == SolveStatus::SAT);
    CHECK_FALSE(first.cache_hit);

    SolverResult second = cached_solve(inst, default_portfolio(), milliseconds(2000), cache);
    REQUIRE(second.status == SolveStatus::SAT);
    CHECK(second.cache_hit);
    CHECK(verify_assignment(inst, *second.witness));
    CHECK(cache.stats().feasible_hits >= 1);
}
