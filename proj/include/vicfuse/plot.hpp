#pragma once

#include <string>

#include "vicfuse/bench.hpp"
#include "vicfuse/evaluation.hpp"

namespace vicfuse {

// Bird's-eye SVG of one evaluated pair in the vehicle frame: ground truth
// (black), vehicle detections (orange), infrastructure detections (thick
// blue) and the evaluation area. Output is a pure function of the inputs.
std::string render_bev_svg(const PairArtifact& artifact, const Area& area);

}  // namespace vicfuse
