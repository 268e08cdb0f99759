#pragma once

#include <vector>

namespace codedlens {

// Physical layout of the sensor / mask / projector system.
// All lengths are millimetres; the coordinate origin sits at the sensor
// center and the camera-projector baseline runs along +x.
struct CameraGeometry {
    int sensor_pixels = 0;           // M, pixels per sensor axis
    double sensor_pitch_mm = 0.0;
    int mask_features = 0;
    double mask_pitch_mm = 0.0;
    double mask_distance_mm = 0.0;   // d, sensor-to-mask gap
    double baseline_mm = 0.0;        // B, lateral projector offset, >= 0
    double baseline_axial_mm = 0.0;  // axial projector offset, >= 0
    int scene_angles = 0;            // N, projector rays per axis
    double projector_half_fov_rad = 0.0;

    double sensor_extent_mm() const { return sensor_pixels * sensor_pitch_mm; }
    double mask_extent_mm() const { return mask_features * mask_pitch_mm; }

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

// Ordered depth planes, distances in mm along the camera axis.
class DepthGrid {
 public:
    DepthGrid() = default;
    // Throws std::invalid_argument unless strictly increasing and positive.
    explicit DepthGrid(std::vector<double> depths_mm);

    // count planes uniformly spaced over [z_min, z_max], endpoints included.
    static DepthGrid uniform(double z_min_mm, double z_max_mm, int count);

    int size() const { return static_cast<int>(depths_mm_.size()); }
    bool empty() const { return depths_mm_.empty(); }
    double operator[](int k) const { return depths_mm_[static_cast<size_t>(k)]; }
    const std::vector<double>& values_mm() const { return depths_mm_; }
    double min_mm() const { return depths_mm_.front(); }
    double max_mm() const { return depths_mm_.back(); }

 private:
    std::vector<double> depths_mm_;
};

}  // namespace codedlens
