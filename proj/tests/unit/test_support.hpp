#pragma once

// Shared helpers for unit and acceptance tests: dense-matrix oracles for the
// separable forward model and small deterministic generators. Everything here
// is independent of the library's computation path: the dense route builds an
// explicit matrix out of Kronecker blocks and multiplies it.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "codedlens/forward.hpp"
#include "codedlens/optics.hpp"
#include "codedlens/patterns.hpp"

namespace testsupport {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t& state) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform01(state);
    return m;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-major vectorization, planes concatenated in depth order.
inline Eigen::VectorXd vec_stack(const std::vector<Eigen::MatrixXd>& planes) {
    Eigen::Index per = planes.front().size();
    Eigen::VectorXd v(static_cast<Eigen::Index>(planes.size()) * per);
    for (size_t k = 0; k < planes.size(); ++k) {
        Eigen::Map<const Eigen::VectorXd> flat(planes[k].data(), per);
        v.segment(static_cast<Eigen::Index>(k) * per, per) = flat;
    }
    return v;
}

inline std::vector<Eigen::MatrixXd> unvec_stack(const Eigen::VectorXd& v, int count,
                                                Eigen::Index rows, Eigen::Index cols) {
    std::vector<Eigen::MatrixXd> planes(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        planes[static_cast<size_t>(k)] =
            Eigen::Map<const Eigen::MatrixXd>(v.data() + k * rows * cols, rows, cols);
    }
    return planes;
}

// Explicit dense matrix of the coded-illumination system. With column-major
// vec and Y_i = L_k X R_k^T per plane, the frame-i, plane-k block is
// (R_k kron L_k) * diag(vec(P_i)).
inline Eigen::MatrixXd dense_system(const codedlens::SystemModel& model,
                                    const codedlens::IlluminationSequence& sequence) {
    const int m = model.sensor_pixels();
    const int n = model.grid_size();
    const int planes = model.plane_count();
    const int frames = sequence.count();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(frames) * m * m,
                      static_cast<Eigen::Index>(planes) * n * n);
    for (int i = 0; i < frames; ++i) {
        Eigen::VectorXd p = vec_stack({sequence.patterns[static_cast<size_t>(i)]});
        for (int k = 0; k < planes; ++k) {
            Eigen::MatrixXd block = kron(model.right[static_cast<size_t>(k)],
                                         model.left[static_cast<size_t>(k)]);
            for (Eigen::Index col = 0; col < block.cols(); ++col) block.col(col) *= p(col);
            a.block(static_cast<Eigen::Index>(i) * m * m, static_cast<Eigen::Index>(k) * n * n,
                    m * m, n * n) = block;
        }
    }
    return a;
}

// A small but non-degenerate test geometry.
inline codedlens::CameraGeometry tiny_geometry(int sensor_pixels, int scene_angles,
                                               int mask_features, double baseline_mm = 0.0,
                                               double axial_mm = 0.0) {
    codedlens::CameraGeometry g;
    g.sensor_pixels = sensor_pixels;
    g.sensor_pitch_mm = 0.05;
    g.mask_features = mask_features;
    g.mask_pitch_mm = 0.06;
    g.mask_distance_mm = 2.0;
    g.baseline_mm = baseline_mm;
    g.baseline_axial_mm = axial_mm;
    g.scene_angles = scene_angles;
    g.projector_half_fov_rad = 0.0996686524911975;  // atan(0.1)
    return g;
}

inline codedlens::SceneVolume random_volume(int n, const codedlens::DepthGrid& depths,
                                            std::uint64_t seed) {
    codedlens::SceneVolume volume = codedlens::SceneVolume::zero(n, depths);
    std::uint64_t state = seed;
    for (auto& plane : volume.planes) plane = random_matrix(n, n, state);
    return volume;
}

}  // namespace testsupport
