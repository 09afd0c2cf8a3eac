#include <cmath>

#include "repack/model.hpp"
#include "repack/rng.hpp"

namespace repack {

InterferenceData generate_synthetic(std::size_t n_stations, Channel ch_lo, Channel ch_hi,
                                    double density, std::uint64_t seed) {
    if (n_stations < 1) throw std::invalid_argument("generate_synthetic: need >= 1 station");
    if (!valid_channel(ch_lo) || !valid_channel(ch_hi) || ch_lo > ch_hi)
        throw std::invalid_argument("generate_synthetic: bad channel range");
    if (!(density > 0.0) || density > 1.0)
        throw std::invalid_argument("generate_synthetic: density must be in (0,1]");

    Rng rng(seed);
    std::vector<std::pair<double, double>> pos(n_stations);
    for (auto& p : pos) {
        p.first = rng.uniform();
        p.second = rng.uniform();
    }

    InterferenceData data;
    const ChannelSet dom = ChannelSet::range(ch_lo, ch_hi);
    for (std::size_t i = 0; i < n_stations; ++i)
        data.domains.emplace(static_cast<StationId>(i + 1), dom);

    // density 1.0 reaches the square's diagonal, i.e. a complete graph.
    const double radius = density * std::sqrt(2.0);
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < n_stations; ++i) {
        for (std::size_t j = i + 1; j < n_stations; ++j) {
            const double dx = pos[i].first - pos[j].first;
            const double dy = pos[i].second - pos[j].second;
            if (dx * dx + dy * dy > r2) continue;
            const StationId a = static_cast<StationId>(i + 1);
            const StationId b = static_cast<StationId>(j + 1);
            for (Channel c = ch_lo; c <= ch_hi; ++c) {
                data.add_pair(a, c, b, c);
                if (c + 1 <= ch_hi && band_of(c) == band_of(c + 1)) {
                    data.add_pair(a, c, b, c + 1);
                    data.add_pair(b, c, a, c + 1);
                }
            }
        }
    }
    return data;
}

}  // namespace repack
