#pragma once

#include <string>
#include <vector>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/signal.hpp"

namespace stlsmooth::cli {

/// Regions as rectangles (dims 0 and 1) and each trajectory as a polyline
/// through (y0, y1). Obstacles are red, everything else green.
std::string render_svg(const RegionTable& regions, const std::vector<Signal>& trajectories);

}  // namespace stlsmooth::cli
