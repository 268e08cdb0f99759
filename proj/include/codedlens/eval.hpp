#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "codedlens/forward.hpp"

namespace codedlens {

using ValidityMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Per-pixel depth over the scene grid, in cm. Pixels without signal are
// flagged invalid and excluded from metrics.
struct DepthMap {
    Eigen::MatrixXd depth_cm;
    ValidityMask valid;

    int size() const { return static_cast<int>(depth_cm.rows()); }
};

struct DepthAndImage {
    DepthMap depth;
    Eigen::MatrixXd all_in_focus;
};

// Picks, per pixel, the depth plane with the largest intensity (ties go to
// the nearer plane). The all-in-focus value is that maximum. Pixels whose
// maximum falls below threshold_fraction * (volume maximum) are invalid;
// an all-zero volume yields no valid pixels.
DepthAndImage extract_depth_and_aif(const SceneVolume& volume,
                                    double threshold_fraction = 0.05);

// Root-mean-square depth difference (cm) over jointly valid pixels. Throws
// std::invalid_argument on shape mismatch or an empty valid intersection.
double depth_rmse(const DepthMap& estimated, const DepthMap& reference);

// Mean local structural similarity over an 11x11 Gaussian window
// (sigma 1.5), stabilizers C1 = (0.01 L)^2 and C2 = (0.03 L)^2.
double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dynamic_range);

struct MetricReport {
    double depth_rmse_cm = 0.0;
    double ssim = 0.0;
    // RMS depth error restricted to pixels the reference assigns near each
    // reconstruction plane.
    std::vector<double> per_plane_rmse_cm;
};

MetricReport compute_metrics(const SceneVolume& reconstructed, const DepthMap& reference_depth,
                             const Eigen::MatrixXd& reference_image,
                             double threshold_fraction = 0.05);

}  // namespace codedlens
