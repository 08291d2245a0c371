#pragma once

#include <string>

#include "holoflow/analysis.hpp"

namespace holoflow {

/// Deterministic layered phase portrait: region fills from the grids, orbit
/// polylines, separatrices by side, equilibria markers and definite-direction
/// rays.
std::string render_svg(const AnalysisResult& res, int width_px = 900);

}  // namespace holoflow
