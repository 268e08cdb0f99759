#include "codedlens/geometry.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace codedlens {

void CameraGeometry::validate() const {
    if (sensor_pixels < 1) throw std::invalid_argument("geometry: sensor_pixels must be >= 1");
    if (scene_angles < 1) throw std::invalid_argument("geometry: scene_angles must be >= 1");
    if (mask_features < 1) throw std::invalid_argument("geometry: mask_features must be >= 1");
    if (!(sensor_pitch_mm > 0.0)) throw std::invalid_argument("geometry: sensor_pitch must be > 0");
    if (!(mask_pitch_mm > 0.0)) throw std::invalid_argument("geometry: mask_pitch must be > 0");
    if (!(mask_distance_mm > 0.0)) throw std::invalid_argument("geometry: mask_distance must be > 0");
    if (baseline_mm < 0.0) throw std::invalid_argument("geometry: baseline must be >= 0");
    if (baseline_axial_mm < 0.0) throw std::invalid_argument("geometry: axial baseline must be >= 0");
    if (!(projector_half_fov_rad > 0.0))
        throw std::invalid_argument("geometry: projector_half_fov must be > 0");
}

DepthGrid::DepthGrid(std::vector<double> depths_mm) : depths_mm_(std::move(depths_mm)) {
    if (depths_mm_.empty()) throw std::invalid_argument("depth grid: empty");
    double prev = 0.0;
    for (double z : depths_mm_) {
        if (!(z > prev))
            throw std::invalid_argument("depth grid: depths must be positive and strictly increasing");
        prev = z;
    }
}

DepthGrid DepthGrid::uniform(double z_min_mm, double z_max_mm, int count) {
    if (count < 1) throw std::invalid_argument("depth grid: count must be >= 1");
    if (!(z_min_mm > 0.0) || (count > 1 && !(z_max_mm > z_min_mm)))
        throw std::invalid_argument("depth grid: need 0 < z_min < z_max");
    std::vector<double> depths(static_cast<size_t>(count));
    if (count == 1) {
        depths[0] = z_min_mm;
    } else {
        double step = (z_max_mm - z_min_mm) / (count - 1);
        for (int k = 0; k < count; ++k) depths[static_cast<size_t>(k)] = z_min_mm + step * k;
    }
    return DepthGrid(std::move(depths));
}

}  // namespace codedlens
