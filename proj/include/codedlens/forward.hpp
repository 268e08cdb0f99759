#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "codedlens/geometry.hpp"
#include "codedlens/optics.hpp"
#include "codedlens/patterns.hpp"

namespace codedlens {

// D planes of N x N nonnegative intensities; plane k lives at depths[k].
// Row index follows the baseline axis, column index the orthogonal axis.
struct SceneVolume {
    std::vector<Eigen::MatrixXd> planes;
    DepthGrid depths;

    int plane_count() const { return static_cast<int>(planes.size()); }
    int grid_size() const { return planes.empty() ? 0 : static_cast<int>(planes.front().rows()); }
    static SceneVolume zero(int n, const DepthGrid& depths);
    void check_shape() const;  // square, equal sizes, matches the depth grid
    void validate() const;     // check_shape plus nonnegativity
};

// Sensor noise: Y_n = (G/F) * (Poisson(F/G * Y) + N(0, sigma^2)) per entry,
// sigma = F * 10^(-R/20). Sampling is a pure function of
// (seed, frame, row, col), so results are independent of evaluation order.
struct NoiseModel {
    double full_well = 2.0e4;        // F, electrons
    double gain = 1.0;               // G
    double dynamic_range_db = 60.0;  // R
    std::uint64_t seed = 0;

    double read_noise_sigma() const;
    void validate() const;
};

// One sensor frame per illumination pattern.
struct MeasurementSet {
    std::vector<Eigen::MatrixXd> frames;
    IlluminationSequence sequence;
    std::optional<NoiseModel> noise;  // set once add_noise has run

    int frame_count() const { return static_cast<int>(frames.size()); }
    int sensor_pixels() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
};

// Clean multi-shot measurements: frame i = sum_k L_k (P_i o I_k) R_k^T,
// with o the elementwise product. The same pattern applies at every depth.
MeasurementSet forward(const SceneVolume& scene, const IlluminationSequence& sequence,
                       const SystemModel& model);

// The same linear map without the physical nonnegativity requirement;
// solver iterates pass through here.
std::vector<Eigen::MatrixXd> forward_frames(const SceneVolume& scene,
                                            const IlluminationSequence& sequence,
                                            const SystemModel& model);

// Applies the noise model to every entry. Negative clean values are clamped
// to zero before Poisson sampling; noisy outputs are left unclamped.
MeasurementSet add_noise(const MeasurementSet& clean, const NoiseModel& noise);

// Mask-translation capture under uniform illumination: one frame per mask
// shift, each simulated with system matrices rebuilt for the shifted mask.
MeasurementSet sweepcam_forward(const SceneVolume& scene,
                                const std::vector<std::array<double, 2>>& shifts_mm,
                                const CameraGeometry& geometry, const MaskSpec& mask);

}  // namespace codedlens
