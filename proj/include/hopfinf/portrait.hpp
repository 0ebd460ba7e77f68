#pragma once

#include <string>
#include <vector>

#include "hopfinf/field.hpp"
#include "hopfinf/flow.hpp"

namespace hopfinf {

struct PortraitOptions {
  double mu = 0.0;
  double window = 0.0;  // half-width of the plotted square; <= 0 means 12 * sigma
  int size = 640;       // pixels
  int seeds_per_ring = 8;
  double t_max = 60.0;
};

struct LimitCycleMark {
  double flux_root = 0.0;   // radius where the flux changes sign
  bool closed = false;      // a trajectory from there returned to its section
  LoopInfo loop;
  std::vector<Vec2> path;
};

struct Portrait {
  std::string svg;
  std::vector<LimitCycleMark> cycles;
  std::vector<TransversalityCertificate> circles;
};

/// Phase portrait: shaded excluded disk, direction arrows, sample trajectories,
/// dashed transversal circles and any limit cycles found between flux sign changes.
Portrait render_portrait(const PlanarField& field, const PortraitOptions& opt);

}  // namespace hopfinf
