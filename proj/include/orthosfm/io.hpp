#pragma once

// File formats.
//
// Scene (JSON):
//   {"points": [{"label": "P", "x": 0.1, "y": 0.2, "z": 0.3}, ...],
//    "motions": [{"rotation": [r00, r01, ..., r22], "tx": 0, "ty": 0}, ...],
//    "seed": 7}
// rotation is row-major; motions[0] must be the identity.
//
// Frames (CSV):
//   frame_index,label,x,y
//   1,P,0.25,-1.5
// frame_index counts from 1; every frame lists the same labels. Numbers are
// written as the shortest decimal that reads back to the same double.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orthosfm/geometry.hpp"
#include "orthosfm/scene_sim.hpp"
#include "orthosfm/solvers.hpp"

namespace orthosfm {

using Json = nlohmann::ordered_json;

std::string format_number(double v);

Json scene_to_json(const Scene& scene);
/// Throws kParse for structural problems and kInvalidInput when the scene
/// itself is unusable (collinear body, non-rotation, first motion moved).
Scene scene_from_json(const Json& doc);

std::string write_scene(const Scene& scene);
Scene read_scene(std::string_view text);

std::string write_frames(std::span<const FrameObservation> frames);
/// Errors carry the offending line number ("line 4: ...").
std::vector<FrameObservation> read_frames(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

Json lengths_json(const TriangleDistances& t);
Json lengths_json(const TetraDistances& t);

template <class Distances>
Json recovery_json(const RecoveryResult<Distances>& result) {
  Json candidates = Json::array();
  for (const auto& c : result.candidates) {
    candidates.push_back({{"lengths", lengths_json(c.lengths)},
                          {"feasible", c.feasible},
                          {"max_residual", c.max_residual()},
                          {"residuals", c.residuals}});
  }
  return candidates;
}

Json dof_json(const DofBalance& d);

}  // namespace orthosfm
