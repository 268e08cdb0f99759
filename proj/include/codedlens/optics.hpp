#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

#include "codedlens/geometry.hpp"
#include "codedlens/patterns.hpp"

namespace codedlens {

// Transmittance of a 1-D feature vector at a continuous mask-plane
// coordinate (mm, origin at the mask center). Linear interpolation between
// the two nearest feature centers; 0 outside the mask extent.
double sample_mask_1d(std::span<const double> features, double feature_pitch_mm, double x_mm);

// 1-D sensor response at sensor coordinate s for a point source at lateral
// scene coordinate p and depth z (all mm, camera frame):
//     mask[(1 - d/z) * s + d * p / z - mask_shift]
// mask_shift_mm translates the mask pattern laterally. Throws
// std::invalid_argument when z <= d.
double psf_1d(double s_mm, double p_mm, double z_mm, const CameraGeometry& geometry,
              std::span<const double> mask_features, double mask_shift_mm = 0.0);

// Lateral PSF displacement between two depths induced by the baseline:
//     | d*B / (z1 + az - d)  -  d*B / (z2 + az - d) |
// where az is the axial projector offset. Throws when either depth <= d.
double predict_depth_shift(double z1_mm, double z2_mm, const CameraGeometry& geometry);

// Sensor pixel center coordinates (mm), origin at the sensor center.
std::vector<double> sensor_pixel_centers_mm(const CameraGeometry& geometry);

// Tangents of the N projector ray angles, uniform in tangent space across
// the projector field of view (endpoints included; a single ray is on-axis).
std::vector<double> projector_ray_tangents(const CameraGeometry& geometry);

// Camera-frame lateral positions of the N projector rays at one depth plane.
// Ray n lands at (z + az) * tan(a_n) + B along the baseline axis and at
// z * tan(a_n) along the orthogonal axis.
struct ScenePlaneCoords {
    std::vector<double> baseline_axis_mm;
    std::vector<double> cross_axis_mm;
};
ScenePlaneCoords scene_lateral_coordinates(double z_mm, const CameraGeometry& geometry);

// Per-depth separable system. A scene plane X maps to the sensor as
// left[k] * X * right[k]^T; rows of X follow the baseline axis.
struct SystemModel {
    CameraGeometry geometry;
    MaskSpec mask;
    DepthGrid depths;
    std::vector<Eigen::MatrixXd> left;   // per depth, sensor_pixels x scene_angles
    std::vector<Eigen::MatrixXd> right;  // per depth, sensor_pixels x scene_angles

    int plane_count() const { return static_cast<int>(left.size()); }
    int sensor_pixels() const { return geometry.sensor_pixels; }
    int grid_size() const { return geometry.scene_angles; }
};

// Samples the PSF at every (sensor pixel, projector ray) pair for each depth.
// mask_shift_mm translates the mask by (x, y) mm; x acts on the baseline axis
// (left matrices), y on the orthogonal axis (right matrices).
SystemModel build_system_matrices(const CameraGeometry& geometry, const MaskSpec& mask,
                                  const DepthGrid& depths,
                                  std::array<double, 2> mask_shift_mm = {0.0, 0.0});

}  // namespace codedlens
