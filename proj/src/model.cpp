#include "repack/model.hpp"

#include <algorithm>

namespace repack {

bool valid_channel(Channel c) { return c >= kMinChannel && c <= kMaxChannel; }

Band band_of(Channel c) {
    if (c >= 1 && c <= 6) return Band::LVHF;
    if (c >= 7 && c <= 13) return Band::HVHF;
    if (c >= 14 && c <= 51) return Band::UHF;
    throw std::out_of_range("band_of: channel " + std::to_string(c) + " outside 1..51");
}

const char* band_name(Band b) {
    switch (b) {
        case Band::LVHF: return "LVHF";
        case Band::HVHF: return "HVHF";
        case Band::UHF: return "UHF";
        case Band::OFF: return "OFF";
    }
    return "?";
}

void InterferenceData::add_pair(StationId s1, Channel c1, StationId s2, Channel c2) {
    if (s1 == s2) throw std::invalid_argument("forbidden pair links a station to itself");
    if (!valid_channel(c1) || !valid_channel(c2))
        throw std::invalid_argument("forbidden pair channel outside 1..51");
    const int gap = c1 > c2 ? c1 - c2 : c2 - c1;
    if (gap > 2) throw std::invalid_argument("forbidden pair channel gap exceeds 2");
    if (band_of(c1) != band_of(c2))
        throw std::invalid_argument("forbidden pair crosses a band boundary");
    if (s1 > s2) {
        std::swap(s1, s2);
        std::swap(c1, c2);
    }
    constraints[{s1, s2}].add(c1, c2);
}

bool InterferenceData::forbidden(StationId s1, Channel c1, StationId s2, Channel c2) const {
    if (s1 > s2) {
        std::swap(s1, s2);
        std::swap(c1, c2);
    }
    auto it = constraints.find({s1, s2});
    return it != constraints.end() && it->second.forbids(c1, c2);
}

bool InterferenceData::operator==(const InterferenceData& o) const {
    return domains == o.domains && constraints == o.constraints;
}

bool RepackingInstance::forbidden(StationId s1, Channel c1, StationId s2, Channel c2) const {
    if (s1 > s2) {
        std::swap(s1, s2);
        std::swap(c1, c2);
    }
    auto it = constraints.find({s1, s2});
    return it != constraints.end() && it->second.forbids(c1, c2);
}

std::uint64_t RepackingInstance::conflict_mask(StationId s, StationId other, Channel c) const {
    const ConflictTable* t = table(s, other);
    if (!t) return 0;
    return s < other ? t->rev(c) : t->fwd(c);
}

bool RepackingInstance::previous_consistent() const {
    if (!previous) return false;
    std::vector<StationId> rest;
    rest.reserve(stations.size());
    for (StationId s : stations)
        if (!target || s != *target) rest.push_back(s);
    RepackingInstance sub = restrict_instance(*this, rest);
    sub.previous.reset();
    sub.target.reset();
    return verify_assignment(sub, *previous);
}

std::size_t InterferenceGraph::edge_count() const {
    std::size_t deg = 0;
    for (const auto& [s, adj] : adjacency) deg += adj.size();
    return deg / 2;
}

RepackingInstance build_instance(const InterferenceData& data,
                                 const std::set<StationId>& stations, Channel max_channel,
                                 std::optional<ChannelAssignment> previous,
                                 std::optional<StationId> target) {
    if (!valid_channel(max_channel))
        throw std::invalid_argument("max_channel outside 1..51");
    RepackingInstance inst;
    inst.max_channel = max_channel;
    inst.previous = std::move(previous);
    inst.target = target;

    const ChannelSet allowed = ChannelSet::range(kMinChannel, max_channel);
    for (StationId s : stations) {
        auto it = data.domains.find(s);
        if (it == data.domains.end())
            throw std::invalid_argument("station " + std::to_string(s) +
                                        " not present in interference data");
        inst.stations.push_back(s);
        ChannelSet d = it->second.intersect(allowed);
        inst.domains.emplace(s, d);
        if (d.empty()) {
            inst.trivially_infeasible = true;
            inst.empty_domain_stations.push_back(s);
        }
    }
    if (target && !stations.count(*target))
        throw std::invalid_argument("target station not in station set");

    for (const auto& [key, table] : data.constraints) {
        if (!stations.count(key.first) || !stations.count(key.second)) continue;
        const ChannelSet da = inst.domains.at(key.first);
        const ChannelSet db = inst.domains.at(key.second);
        ConflictTable restricted;
        bool any = false;
        table.for_each_pair([&](Channel ca, Channel cb) {
            if (da.contains(ca) && db.contains(cb)) {
                restricted.add(ca, cb);
                any = true;
            }
        });
        if (any) inst.constraints.emplace(key, restricted);
    }
    return inst;
}

RepackingInstance restrict_instance(const RepackingInstance& inst,
                                    const std::vector<StationId>& subset) {
    RepackingInstance out;
    out.max_channel = inst.max_channel;
    out.stations = subset;
    std::sort(out.stations.begin(), out.stations.end());
    out.stations.erase(std::unique(out.stations.begin(), out.stations.end()),
                       out.stations.end());
    for (StationId s : out.stations) {
        auto it = inst.domains.find(s);
        if (it == inst.domains.end())
            throw std::invalid_argument("restrict_instance: station not in instance");
        out.domains.emplace(s, it->second);
        if (it->second.empty()) {
            out.trivially_infeasible = true;
            out.empty_domain_stations.push_back(s);
        }
    }
    for (const auto& [key, table] : inst.constraints) {
        if (out.domains.count(key.first) && out.domains.count(key.second))
            out.constraints.emplace(key, table);
    }
    if (inst.previous) {
        ChannelAssignment prev;
        for (const auto& [s, c] : *inst.previous)
            if (out.domains.count(s)) prev.emplace(s, c);
        if (!prev.empty()) out.previous = std::move(prev);
    }
    if (inst.target && out.domains.count(*inst.target)) out.target = inst.target;
    return out;
}

InterferenceGraph interference_graph(const RepackingInstance& inst) {
    InterferenceGraph g;
    for (StationId s : inst.stations) g.adjacency[s];
    for (const auto& [key, table] : inst.constraints) {
        if (table.empty()) continue;
        g.adjacency[key.first].push_back(key.second);
        g.adjacency[key.second].push_back(key.first);
    }
    for (auto& [s, adj] : g.adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return g;
}

bool verify_assignment(const RepackingInstance& inst, const ChannelAssignment& gamma) {
    for (StationId s : inst.stations) {
        auto it = gamma.find(s);
        if (it == gamma.end()) return false;
        if (!inst.domains.at(s).contains(it->second)) return false;
    }
    for (const auto& [key, table] : inst.constraints) {
        auto a = gamma.find(key.first);
        auto b = gamma.find(key.second);
        if (a == gamma.end() || b == gamma.end()) return false;
        if (table.forbids(a->second, b->second)) return false;
    }
    return true;
}

}  // namespace repack
