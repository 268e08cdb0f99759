#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "codedlens/eval.hpp"
#include "codedlens/forward.hpp"

namespace codedlens {

enum class SceneKind { two_plane_cards, slanted_plane, step_pyramid };

const char* to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& name);
std::vector<SceneKind> builtin_scenes();

// A continuous-depth test scene on the N x N projector grid: a per-pixel
// intensity and a per-pixel true depth (cm). Zero-intensity pixels carry no
// signal and are treated as invalid in the reference depth map.
struct SyntheticScene {
    std::string name;
    Eigen::MatrixXd intensity;  // >= 0
    Eigen::MatrixXd depth_cm;

    DepthMap reference_depth() const;
};

SyntheticScene make_scene(SceneKind kind, int n, double depth_min_cm, double depth_max_cm);

// Voxelizes a scene on a depth grid: each pixel's intensity lands in the
// plane nearest its true depth.
SceneVolume scene_to_volume(const SyntheticScene& scene, const DepthGrid& grid);

// Scene from a two-plane file image: plane 0 = depth (cm), plane 1 = intensity.
SyntheticScene scene_from_planes(const Eigen::MatrixXd& depth_cm,
                                 const Eigen::MatrixXd& intensity, const std::string& name);

}  // namespace codedlens
