#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "kirchnet/solver.hpp"

namespace kirchnet {

/// Static summary figure: total mass against time on top, then one small
/// panel per edge with the final cell averages.
void write_summary_svg(std::ostream& out, const std::vector<std::pair<double, double>>& mass,
                       const DensityState& final_state);

}  // namespace kirchnet
