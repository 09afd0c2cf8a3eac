#include "repack/simplify.hpp"

#include <algorithm>
#include <deque>
#include <nlohmann/json.hpp>

namespace repack {

void SimplificationReport::merge(const SimplificationReport& other) {
    pruned_values += other.pruned_values;
    removed_stations.insert(removed_stations.end(), other.removed_stations.begin(),
                            other.removed_stations.end());
    removed_detail.insert(removed_detail.end(), other.removed_detail.begin(),
                          other.removed_detail.end());
    if (!other.components.empty()) {
        components = other.components;
        target_component = other.target_component;
        others_certified = other.others_certified;
    }
}

std::string SimplificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["pruned_values"] = pruned_values;
    j["removed_stations"] = removed_stations;
    j["components"] = components;
    j["target_component"] = target_component;
    j["others_certified"] = others_certified;
    return j.dump(2);
}

namespace {

// Re-restricts constraint tables after domain pruning, restoring the
// construction-time invariant that every stored pair lies inside the current
// domains. Rows left empty are dropped so the interference graph tightens.
void restrict_constraints(RepackingInstance& inst) {
    ConstraintMap restricted;
    for (const auto& [key, table] : inst.constraints) {
        const ChannelSet da = inst.domains.at(key.first);
        const ChannelSet db = inst.domains.at(key.second);
        ConflictTable keep;
        bool any = false;
        table.for_each_pair([&](Channel ca, Channel cb) {
            if (da.contains(ca) && db.contains(cb)) {
                keep.add(ca, cb);
                any = true;
            }
        });
        if (any) restricted.emplace(key, keep);
    }
    inst.constraints = std::move(restricted);
}

}  // namespace

std::pair<RepackingInstance, SimplificationReport> arc_consistency(
    const RepackingInstance& inst) {
    RepackingInstance out = inst;
    SimplificationReport report;
    if (out.trivially_infeasible) return {out, report};

    const InterferenceGraph graph = interference_graph(out);

    // Arc queue: (s, s') meaning "revise D(s) against D(s')".
    std::deque<StationPair> queue;
    std::set<StationPair> queued;
    auto enqueue = [&](StationId s, StationId other) {
        if (queued.insert({s, other}).second) queue.push_back({s, other});
    };
    for (StationId s : out.stations)
        for (StationId n : graph.neighbors(s)) enqueue(s, n);

    while (!queue.empty()) {
        const auto [s, other] = queue.front();
        queue.pop_front();
        queued.erase({s, other});

        ChannelSet& ds = out.domains.at(s);
        const std::uint64_t dother = out.domains.at(other).mask();
        std::uint64_t keep = 0;
        ds.for_each([&](Channel c) {
            // c survives if the neighbor has some channel compatible with it.
            if (dother & ~out.conflict_mask(other, s, c)) keep |= std::uint64_t{1} << c;
        });
        if (keep == ds.mask()) continue;
        report.pruned_values += static_cast<std::size_t>(ds.count() - std::popcount(keep));
        ds = ChannelSet::from_mask(keep);
        if (ds.empty()) {
            out.trivially_infeasible = true;
            out.empty_domain_stations.push_back(s);
            return {out, report};
        }
        for (StationId n : graph.neighbors(s)) enqueue(n, s);
    }
    if (report.pruned_values > 0) restrict_constraints(out);
    return {out, report};
}

namespace {

// Upper bound on how many of s's domain values its neighbors can block at
// once: each neighbor contributes the max count over its single-channel
// choices.
std::size_t max_blockable(const RepackingInstance& inst, const InterferenceGraph& graph,
                          StationId s) {
    const std::uint64_t ds = inst.domains.at(s).mask();
    std::size_t total = 0;
    for (StationId n : graph.neighbors(s)) {
        // Neighbors removed earlier in the sweep reinsert after s, so they
        // cannot block its choice.
        auto it = inst.domains.find(n);
        if (it == inst.domains.end()) continue;
        int best = 0;
        it->second.for_each([&](Channel cn) {
            const int blocked = std::popcount(ds & inst.conflict_mask(s, n, cn));
            if (blocked > best) best = blocked;
        });
        total += static_cast<std::size_t>(best);
    }
    return total;
}

void erase_station(RepackingInstance& inst, StationId s) {
    inst.stations.erase(std::remove(inst.stations.begin(), inst.stations.end(), s),
                        inst.stations.end());
    inst.domains.erase(s);
    for (auto it = inst.constraints.begin(); it != inst.constraints.end();) {
        if (it->first.first == s || it->first.second == s)
            it = inst.constraints.erase(it);
        else
            ++it;
    }
    if (inst.previous) inst.previous->erase(s);
    if (inst.target && *inst.target == s) inst.target.reset();
}

}  // namespace

std::pair<RepackingInstance, SimplificationReport> remove_unconstrained(
    const RepackingInstance& inst) {
    RepackingInstance out = inst;
    SimplificationReport report;
    if (out.trivially_infeasible) return {out, report};

    bool changed = true;
    while (changed) {
        changed = false;
        const InterferenceGraph graph = interference_graph(out);
        for (StationId s : std::vector<StationId>(out.stations)) {
            const std::size_t dom = static_cast<std::size_t>(out.domains.at(s).count());
            if (dom > max_blockable(out, graph, s)) {
                report.removed_stations.push_back(s);
                report.removed_detail.push_back({s, out.domains.at(s)});
                erase_station(out, s);
                changed = true;
            }
        }
    }
    return {out, report};
}

SimplificationReport decompose(const RepackingInstance& inst) {
    SimplificationReport report;
    const InterferenceGraph graph = interference_graph(inst);

    std::set<StationId> seen;
    for (StationId root : inst.stations) {
        if (seen.count(root)) continue;
        std::vector<StationId> component;
        std::deque<StationId> frontier{root};
        seen.insert(root);
        while (!frontier.empty()) {
            StationId s = frontier.front();
            frontier.pop_front();
            component.push_back(s);
            for (StationId n : graph.neighbors(s))
                if (seen.insert(n).second) frontier.push_back(n);
        }
        std::sort(component.begin(), component.end());
        report.components.push_back(std::move(component));
    }

    if (inst.target) {
        report.others_certified = inst.previous.has_value();
        for (const auto& component : report.components) {
            const bool has_target =
                std::binary_search(component.begin(), component.end(), *inst.target);
            if (has_target) {
                report.target_component = component;
            } else if (inst.previous) {
                RepackingInstance sub = restrict_instance(inst, component);
                sub.previous.reset();
                sub.target.reset();
                if (!verify_assignment(sub, *inst.previous)) report.others_certified = false;
            }
        }
    }
    return report;
}

std::vector<StationId> ring_free_set(const RepackingInstance& inst, int radius) {
    if (!inst.target) throw std::invalid_argument("ring_free_set: instance has no target");
    const InterferenceGraph graph = interference_graph(inst);
    std::map<StationId, int> dist;
    std::deque<StationId> frontier{*inst.target};
    dist[*inst.target] = 0;
    while (!frontier.empty()) {
        StationId s = frontier.front();
        frontier.pop_front();
        if (dist[s] == radius) continue;
        for (StationId n : graph.neighbors(s)) {
            if (dist.count(n)) continue;
            dist[n] = dist[s] + 1;
            frontier.push_back(n);
        }
    }
    std::vector<StationId> free;
    free.reserve(dist.size());
    for (const auto& [s, d] : dist) free.push_back(s);
    return free;
}

RepackingInstance augmentation_ring(const RepackingInstance& inst, int radius) {
    if (!inst.previous || !inst.target)
        throw std::invalid_argument("augmentation_ring: needs previous and target");
    if (radius < 1) throw std::invalid_argument("augmentation_ring: radius must be >= 1");

    const std::vector<StationId> free = ring_free_set(inst, radius);
    RepackingInstance out = restrict_instance(inst, free);

    // Fix every station outside the ring to its previous channel and prune
    // free domains of channels that conflict with a fixed neighbor.
    const std::set<StationId> free_set(free.begin(), free.end());
    for (const auto& [key, table] : inst.constraints) {
        const auto [a, b] = key;
        const bool a_free = free_set.count(a) != 0;
        const bool b_free = free_set.count(b) != 0;
        if (a_free == b_free) continue;
        const StationId fixed = a_free ? b : a;
        const StationId open = a_free ? a : b;
        auto prev = inst.previous->find(fixed);
        if (prev == inst.previous->end())
            throw std::invalid_argument("augmentation_ring: previous lacks station " +
                                        std::to_string(fixed));
        ChannelSet& dom = out.domains.at(open);
        dom = ChannelSet::from_mask(dom.mask() &
                                    ~inst.conflict_mask(open, fixed, prev->second));
        if (dom.empty() && !out.trivially_infeasible) {
            out.trivially_infeasible = true;
            out.empty_domain_stations.push_back(open);
        }
    }
    if (!out.trivially_infeasible) restrict_constraints(out);
    return out;
}

bool reinsert_removed(const RepackingInstance& base, std::span<const RemovedStation> removed,
                      ChannelAssignment& assignment) {
    for (auto it = removed.rbegin(); it != removed.rend(); ++it) {
        std::uint64_t options = it->domain_at_removal.mask();
        for (const auto& [other, channel] : assignment)
            options &= ~base.conflict_mask(it->station, other, channel);
        if (!options) return false;
        assignment[it->station] = static_cast<Channel>(std::countr_zero(options));
    }
    return true;
}

}  // namespace repack
