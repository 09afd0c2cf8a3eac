#pragma once

#include <iosfwd>
#include <vector>

#include "repack/model.hpp"

namespace repack {

// Direct CNF encoding of a repacking instance. One variable per station-channel
// pair, numbered 1..n_vars lexicographically by (station id, channel) so
// formulas are reproducible. Literals are DIMACS-style signed ints.
struct CnfFormula {
    int n_vars = 0;
    std::vector<std::vector<int>> clauses;
    std::vector<std::pair<StationId, Channel>> var_pair;       // var-1 -> (s,c)
    std::map<std::pair<StationId, Channel>, int> var_of_pair;  // (s,c) -> var

    std::size_t n_at_least_one = 0;   // one clause per station
    std::size_t n_at_most_one = 0;    // pairwise, only when requested
    std::size_t n_interference = 0;   // one clause per forbidden pair

    int var(StationId s, Channel c) const { return var_of_pair.at({s, c}); }
};

CnfFormula encode(const RepackingInstance& inst, bool include_at_most_one);

// Maps each station to the lowest-numbered channel whose variable is true.
// Throws std::logic_error if some station has no true channel variable.
ChannelAssignment decode(const CnfFormula& formula, const std::vector<bool>& model);

// DIMACS "p cnf n m" plus a sidecar JSON var map for third-party cross-checks.
void write_dimacs(const CnfFormula& formula, std::ostream& out);
std::string var_map_json(const CnfFormula& formula);

}  // namespace repack
