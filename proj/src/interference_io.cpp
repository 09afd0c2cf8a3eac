#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "repack/model.hpp"

namespace repack {

namespace {

using json = nlohmann::ordered_json;

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

std::vector<Row> read_rows(std::istream& in) {
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        Row row{lineno, {}};
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.fields.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

[[noreturn]] void fail(const char* which, std::size_t line, const std::string& msg) {
    throw LoadError(std::string(which) + " file, line " + std::to_string(line) + ": " + msg);
}

long parse_int(const char* which, const Row& row, const std::string& field) {
    try {
        std::size_t pos = 0;
        long v = std::stol(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        fail(which, row.line, "expected an integer, got '" + field + "'");
    }
}

StationId parse_station(const char* which, const Row& row, const std::string& field) {
    long v = parse_int(which, row, field);
    if (v <= 0) fail(which, row.line, "station id must be positive");
    return static_cast<StationId>(v);
}

Channel parse_channel(const char* which, const Row& row, const std::string& field) {
    long v = parse_int(which, row, field);
    if (v < kMinChannel || v > kMaxChannel)
        fail(which, row.line, "channel " + std::to_string(v) + " outside 1..51");
    return static_cast<Channel>(v);
}

}  // namespace

InterferenceData parse_interference(std::istream& domains_in, std::istream& constraints_in) {
    InterferenceData data;

    for (const Row& row : read_rows(domains_in)) {
        if (row.fields.empty() || row.fields[0] != "DOMAIN")
            fail("domains", row.line, "expected a DOMAIN row");
        if (row.fields.size() < 2) fail("domains", row.line, "missing station id");
        StationId s = parse_station("domains", row, row.fields[1]);
        ChannelSet& dom = data.domains[s];
        for (std::size_t i = 2; i < row.fields.size(); ++i)
            dom.add(parse_channel("domains", row, row.fields[i]));
    }

    for (const Row& row : read_rows(constraints_in)) {
        if (row.fields.size() < 3) fail("constraints", row.line, "too few fields");
        const std::string& kind = row.fields[0];
        int offset;
        if (kind == "CO")
            offset = 0;
        else if (kind == "ADJ+1")
            offset = 1;
        else if (kind == "ADJ+2")
            offset = 2;
        else
            fail("constraints", row.line, "unknown constraint kind '" + kind + "'");

        Channel c = parse_channel("constraints", row, row.fields[1]);
        StationId subject = parse_station("constraints", row, row.fields[2]);
        if (!data.has_station(subject))
            fail("constraints", row.line,
                 "station " + std::to_string(subject) + " has no DOMAIN row");

        for (std::size_t i = 3; i < row.fields.size(); ++i) {
            StationId other = parse_station("constraints", row, row.fields[i]);
            if (!data.has_station(other))
                fail("constraints", row.line,
                     "station " + std::to_string(other) + " has no DOMAIN row");
            if (other == subject) {
                ++data.dropped_pairs;
                continue;
            }
            const Channel c2 = c + offset;
            if (c2 > kMaxChannel) {
                ++data.dropped_pairs;
                continue;
            }
            if (band_of(c) != band_of(c2))
                fail("constraints", row.line,
                     kind + " on channel " + std::to_string(c) + " crosses a band boundary");
            // Pairs referencing channels outside a station's domain exist in
            // real datasets; they bind nothing, so drop them.
            if (!data.domains.at(subject).contains(c) || !data.domains.at(other).contains(c2)) {
                ++data.dropped_pairs;
                continue;
            }
            data.add_pair(subject, c, other, c2);
        }
    }
    return data;
}

InterferenceData load_interference(const std::string& domains_path,
                                   const std::string& constraints_path) {
    std::ifstream dom(domains_path);
    if (!dom) throw LoadError("cannot open domains file: " + domains_path);
    std::ifstream con(constraints_path);
    if (!con) throw LoadError("cannot open constraints file: " + constraints_path);
    return parse_interference(dom, con);
}

void write_interference(const InterferenceData& data, const std::string& domains_path,
                        const std::string& constraints_path) {
    std::ofstream dom(domains_path);
    if (!dom) throw LoadError("cannot open domains file for writing: " + domains_path);
    for (const auto& [s, channels] : data.domains) {
        dom << "DOMAIN," << s;
        channels.for_each([&](Channel c) { dom << ',' << c; });
        dom << '\n';
    }

    // Regroup pairs into (kind, channel, subject) rows. A pair {(a,ca),(b,cb)}
    // with a < b maps to CO/ADJ rows with the lower-channel side as subject.
    std::map<std::tuple<int, Channel, StationId>, std::vector<StationId>> rows;
    for (const auto& [key, table] : data.constraints) {
        table.for_each_pair([&](Channel ca, Channel cb) {
            if (cb >= ca)
                rows[{cb - ca, ca, key.first}].push_back(key.second);
            else
                rows[{ca - cb, cb, key.second}].push_back(key.first);
        });
    }
    std::ofstream con(constraints_path);
    if (!con) throw LoadError("cannot open constraints file for writing: " + constraints_path);
    for (const auto& [key, partners] : rows) {
        const auto [offset, channel, subject] = key;
        con << (offset == 0 ? "CO" : offset == 1 ? "ADJ+1" : "ADJ+2") << ',' << channel << ','
            << subject;
        for (StationId p : partners) con << ',' << p;
        con << '\n';
    }
}

std::string instance_to_json(const RepackingInstance& inst) {
    json j;
    j["stations"] = inst.stations;
    j["max_channel"] = inst.max_channel;
    if (inst.previous) {
        json prev = json::object();
        for (const auto& [s, c] : *inst.previous) prev[std::to_string(s)] = c;
        j["previous"] = prev;
    } else {
        j["previous"] = nullptr;
    }
    j["target"] = inst.target ? json(*inst.target) : json(nullptr);
    return j.dump(2);
}

RepackingInstance instance_from_json(const std::string& text, const InterferenceData& data) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LoadError(std::string("instance file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("stations") || !j.contains("max_channel"))
        throw LoadError("instance file: expected {stations, max_channel, previous, target}");
    std::set<StationId> stations;
    for (const auto& s : j.at("stations")) stations.insert(s.get<StationId>());
    Channel max_channel = j.at("max_channel").get<Channel>();

    std::optional<ChannelAssignment> previous;
    if (j.contains("previous") && !j.at("previous").is_null()) {
        ChannelAssignment prev;
        for (const auto& [key, value] : j.at("previous").items())
            prev[static_cast<StationId>(std::stoul(key))] = value.get<Channel>();
        previous = std::move(prev);
    }
    std::optional<StationId> target;
    if (j.contains("target") && !j.at("target").is_null())
        target = j.at("target").get<StationId>();

    return build_instance(data, stations, max_channel, std::move(previous), target);
}

RepackingInstance load_instance_json(const std::string& path, const InterferenceData& data) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return instance_from_json(ss.str(), data);
}

void save_instance_json(const RepackingInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot open instance file for writing: " + path);
    out << instance_to_json(inst) << '\n';
}

}  // namespace repack
