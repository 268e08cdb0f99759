#include "codedlens/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace codedlens {

const char* to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::two_plane_cards: return "two_plane_cards";
        case SceneKind::slanted_plane: return "slanted_plane";
        case SceneKind::step_pyramid: return "step_pyramid";
    }
    return "unknown";
}

SceneKind scene_kind_from_string(const std::string& name) {
    if (name == "two_plane_cards") return SceneKind::two_plane_cards;
    if (name == "slanted_plane") return SceneKind::slanted_plane;
    if (name == "step_pyramid") return SceneKind::step_pyramid;
    throw std::invalid_argument("unknown scene: " + name);
}

std::vector<SceneKind> builtin_scenes() {
    return {SceneKind::two_plane_cards, SceneKind::slanted_plane, SceneKind::step_pyramid};
}

DepthMap SyntheticScene::reference_depth() const {
    DepthMap map;
    map.depth_cm = depth_cm;
    map.valid = ValidityMask::Zero(intensity.rows(), intensity.cols());
    for (Eigen::Index r = 0; r < intensity.rows(); ++r)
        for (Eigen::Index c = 0; c < intensity.cols(); ++c)
            map.valid(r, c) = intensity(r, c) > 0.0 ? 1 : 0;
    return map;
}

namespace {

void fill_rect(Eigen::MatrixXd& intensity, Eigen::MatrixXd& depth, int r0, int r1, int c0, int c1,
               double value, double z_cm) {
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            intensity(r, c) = value;
            depth(r, c) = z_cm;
        }
    }
}

SyntheticScene two_plane_cards(int n, double z0, double z1) {
    SyntheticScene scene;
    scene.name = "two_plane_cards";
    const double span = z1 - z0;
    // Backdrop at the far end, two textured cards at distinct planes.
    scene.intensity = Eigen::MatrixXd::Constant(n, n, 0.3);
    scene.depth_cm = Eigen::MatrixXd::Constant(n, n, z1);

    const double near_z = z0 + 0.15 * span;
    const double far_z = z0 + 0.65 * span;
    const int q = std::max(1, n / 8);
    fill_rect(scene.intensity, scene.depth_cm, q, 4 * q, q, 4 * q, 1.0, near_z);
    fill_rect(scene.intensity, scene.depth_cm, 2 * q, 3 * q, 2 * q, 3 * q, 0.55, near_z);
    fill_rect(scene.intensity, scene.depth_cm, 4 * q, 7 * q, 4 * q, 7 * q, 0.8, far_z);
    fill_rect(scene.intensity, scene.depth_cm, 5 * q, 6 * q, 5 * q, 6 * q, 0.45, far_z);
    return scene;
}

SyntheticScene slanted_plane(int n, double z0, double z1) {
    SyntheticScene scene;
    scene.name = "slanted_plane";
    scene.intensity = Eigen::MatrixXd::Zero(n, n);
    scene.depth_cm = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double u = n > 1 ? static_cast<double>(c) / (n - 1) : 0.0;
            scene.depth_cm(r, c) = z0 + u * (z1 - z0);
            // Piecewise-flat stripes keep the image TV-friendly.
            const int stripe = (r / std::max(1, n / 8)) % 2;
            scene.intensity(r, c) = stripe ? 0.9 : 0.5;
        }
    }
    const int q = std::max(1, n / 8);
    fill_rect(scene.intensity, scene.depth_cm, 3 * q, 5 * q, 3 * q, 5 * q, 1.0,
              z0 + 0.5 * (z1 - z0));
    return scene;
}

SyntheticScene step_pyramid(int n, double z0, double z1) {
    SyntheticScene scene;
    scene.name = "step_pyramid";
    scene.intensity = Eigen::MatrixXd::Zero(n, n);
    scene.depth_cm = Eigen::MatrixXd::Zero(n, n);
    const int steps = 5;
    const double center = (n - 1) / 2.0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            // Ring index 0 at the border, steps-1 at the center.
            const double radius = std::max(std::abs(r - center), std::abs(c - center));
            int ring = static_cast<int>((1.0 - radius / (0.5 * n)) * steps);
            ring = std::clamp(ring, 0, steps - 1);
            const double frac = static_cast<double>(ring) / (steps - 1);
            scene.depth_cm(r, c) = z1 - frac * (z1 - z0);  // center nearest
            scene.intensity(r, c) = 0.4 + 0.15 * ring;
        }
    }
    return scene;
}

}  // namespace

SyntheticScene make_scene(SceneKind kind, int n, double depth_min_cm, double depth_max_cm) {
    if (n < 1) throw std::invalid_argument("scene: grid size must be >= 1");
    if (!(depth_max_cm > depth_min_cm) || !(depth_min_cm > 0.0))
        throw std::invalid_argument("scene: need 0 < depth_min < depth_max");
    switch (kind) {
        case SceneKind::two_plane_cards: return two_plane_cards(n, depth_min_cm, depth_max_cm);
        case SceneKind::slanted_plane: return slanted_plane(n, depth_min_cm, depth_max_cm);
        case SceneKind::step_pyramid: return step_pyramid(n, depth_min_cm, depth_max_cm);
    }
    throw std::invalid_argument("scene: unknown kind");
}

SceneVolume scene_to_volume(const SyntheticScene& scene, const DepthGrid& grid) {
    const int n = static_cast<int>(scene.intensity.rows());
    SceneVolume volume = SceneVolume::zero(n, grid);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double value = scene.intensity(r, c);
            if (value <= 0.0) continue;
            const double z_mm = scene.depth_cm(r, c) * 10.0;
            int nearest = 0;
            double best = std::numeric_limits<double>::max();
            for (int k = 0; k < grid.size(); ++k) {
                const double d = std::abs(grid[k] - z_mm);
                if (d < best) {
                    best = d;
                    nearest = k;
                }
            }
            volume.planes[static_cast<size_t>(nearest)](r, c) = value;
        }
    }
    return volume;
}

SyntheticScene scene_from_planes(const Eigen::MatrixXd& depth_cm, const Eigen::MatrixXd& intensity,
                                 const std::string& name) {
    if (depth_cm.rows() != intensity.rows() || depth_cm.cols() != intensity.cols())
        throw std::invalid_argument("scene: depth and intensity shapes differ");
    if (depth_cm.rows() != depth_cm.cols())
        throw std::invalid_argument("scene: grid must be square");
    if (intensity.minCoeff() < 0.0)
        throw std::invalid_argument("scene: intensities must be nonnegative");
    SyntheticScene scene;
    scene.name = name;
    scene.depth_cm = depth_cm;
    scene.intensity = intensity;
    return scene;
}

}  // namespace codedlens
