#include "codedlens/optics.hpp"

#include <cmath>
#include <stdexcept>

#include "codedlens/parallel.hpp"

namespace codedlens {

namespace {

void check_depth(double z_mm, const CameraGeometry& geometry) {
    if (!(z_mm > geometry.mask_distance_mm))
        throw std::invalid_argument("optics: depth must exceed the sensor-to-mask distance");
}

}  // namespace

double sample_mask_1d(std::span<const double> features, double feature_pitch_mm, double x_mm) {
    const auto count = static_cast<std::ptrdiff_t>(features.size());
    const double half_extent = 0.5 * feature_pitch_mm * static_cast<double>(count);
    if (x_mm < -half_extent || x_mm > half_extent) return 0.0;

    // Fractional feature index; feature j is centered at (j - (count-1)/2) * pitch.
    const double t = x_mm / feature_pitch_mm + 0.5 * static_cast<double>(count - 1);
    const double floor_t = std::floor(t);
    const auto i0 = static_cast<std::ptrdiff_t>(floor_t);
    const double w = t - floor_t;
    const double v0 = (i0 >= 0 && i0 < count) ? features[static_cast<size_t>(i0)] : 0.0;
    const double v1 = (i0 + 1 >= 0 && i0 + 1 < count) ? features[static_cast<size_t>(i0 + 1)] : 0.0;
    return (1.0 - w) * v0 + w * v1;
}

double psf_1d(double s_mm, double p_mm, double z_mm, const CameraGeometry& geometry,
              std::span<const double> mask_features, double mask_shift_mm) {
    check_depth(z_mm, geometry);
    const double d = geometry.mask_distance_mm;
    const double x = (1.0 - d / z_mm) * s_mm + d * p_mm / z_mm;
    return sample_mask_1d(mask_features, geometry.mask_pitch_mm, x - mask_shift_mm);
}

double predict_depth_shift(double z1_mm, double z2_mm, const CameraGeometry& geometry) {
    check_depth(z1_mm, geometry);
    check_depth(z2_mm, geometry);
    const double d = geometry.mask_distance_mm;
    const double db = d * geometry.baseline_mm;
    const double az = geometry.baseline_axial_mm;
    return std::abs(db / (z1_mm + az - d) - db / (z2_mm + az - d));
}

std::vector<double> sensor_pixel_centers_mm(const CameraGeometry& geometry) {
    const int m = geometry.sensor_pixels;
    std::vector<double> centers(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        centers[static_cast<size_t>(i)] = (i - 0.5 * (m - 1)) * geometry.sensor_pitch_mm;
    return centers;
}

std::vector<double> projector_ray_tangents(const CameraGeometry& geometry) {
    const int n = geometry.scene_angles;
    const double tan_half = std::tan(geometry.projector_half_fov_rad);
    std::vector<double> tangents(static_cast<size_t>(n));
    if (n == 1) {
        tangents[0] = 0.0;
        return tangents;
    }
    for (int i = 0; i < n; ++i)
        tangents[static_cast<size_t>(i)] = tan_half * (2.0 * i / (n - 1) - 1.0);
    return tangents;
}

ScenePlaneCoords scene_lateral_coordinates(double z_mm, const CameraGeometry& geometry) {
    check_depth(z_mm, geometry);
    const auto tangents = projector_ray_tangents(geometry);
    ScenePlaneCoords coords;
    coords.baseline_axis_mm.reserve(tangents.size());
    coords.cross_axis_mm.reserve(tangents.size());
    const double z_from_projector = z_mm + geometry.baseline_axial_mm;
    for (double t : tangents) {
        coords.baseline_axis_mm.push_back(z_from_projector * t + geometry.baseline_mm);
        coords.cross_axis_mm.push_back(z_mm * t);
    }
    return coords;
}

SystemModel build_system_matrices(const CameraGeometry& geometry, const MaskSpec& mask,
                                  const DepthGrid& depths, std::array<double, 2> mask_shift_mm) {
    geometry.validate();
    mask.validate();
    if (depths.empty()) throw std::invalid_argument("optics: depth grid is empty");
    for (int k = 0; k < depths.size(); ++k) check_depth(depths[k], geometry);

    const int m = geometry.sensor_pixels;
    const int n = geometry.scene_angles;
    const auto sensors = sensor_pixel_centers_mm(geometry);

    SystemModel model;
    model.geometry = geometry;
    model.mask = mask;
    model.depths = depths;
    model.left.assign(static_cast<size_t>(depths.size()), Eigen::MatrixXd(m, n));
    model.right.assign(static_cast<size_t>(depths.size()), Eigen::MatrixXd(m, n));

    parallel_for(depths.size(), [&](int k) {
        const double z = depths[k];
        const auto coords = scene_lateral_coordinates(z, geometry);
        Eigen::MatrixXd& left = model.left[static_cast<size_t>(k)];
        Eigen::MatrixXd& right = model.right[static_cast<size_t>(k)];
        for (int col = 0; col < n; ++col) {
            const double pb = coords.baseline_axis_mm[static_cast<size_t>(col)];
            const double pc = coords.cross_axis_mm[static_cast<size_t>(col)];
            for (int row = 0; row < m; ++row) {
                const double s = sensors[static_cast<size_t>(row)];
                left(row, col) = psf_1d(s, pb, z, geometry, mask.row_features, mask_shift_mm[0]);
                right(row, col) = psf_1d(s, pc, z, geometry, mask.col_features, mask_shift_mm[1]);
            }
        }
    });
    return model;
}

}  // namespace codedlens
