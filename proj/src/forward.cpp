#include "codedlens/forward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "codedlens/parallel.hpp"

namespace codedlens {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based stream: the state is derived from (seed, frame, row, col)
// alone, so each entry gets the same draws no matter how work is scheduled.
class EntryRng {
 public:
    EntryRng(std::uint64_t seed, int frame, int row, int col) {
        state_ = seed;
        std::uint64_t s = state_ + 0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(frame) + 1);
        state_ = splitmix64(s);
        s = state_ ^ (0x8CB92BA72F3D8DD7ull * (static_cast<std::uint64_t>(row) + 1));
        state_ = splitmix64(s);
        s = state_ ^ (0xABCDEF1234567891ull * (static_cast<std::uint64_t>(col) + 1));
        state_ = splitmix64(s);
    }

    double uniform01() {  // in (0, 1]
        return (static_cast<double>(splitmix64(state_) >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Knuth's product method; valid while exp(-mean) stays representable.
    double poisson_small(double mean) {
        const double limit = std::exp(-mean);
        double count = 0.0;
        double product = uniform01();
        while (product > limit) {
            count += 1.0;
            product *= uniform01();
        }
        return count;
    }

    double poisson(double mean) {
        if (!(mean > 0.0)) return 0.0;
        if (mean > 1000.0) {
            // Normal approximation; error far below read noise at this scale.
            double v = std::round(mean + std::sqrt(mean) * gaussian());
            return v < 0.0 ? 0.0 : v;
        }
        // Split large means into chunks to keep exp(-mean) well above underflow.
        double total = 0.0;
        double remaining = mean;
        while (remaining > 256.0) {
            total += poisson_small(256.0);
            remaining -= 256.0;
        }
        return total + poisson_small(remaining);
    }

 private:
    std::uint64_t state_;
};

}  // namespace

SceneVolume SceneVolume::zero(int n, const DepthGrid& depths) {
    SceneVolume volume;
    volume.depths = depths;
    volume.planes.assign(static_cast<size_t>(depths.size()), Eigen::MatrixXd::Zero(n, n));
    return volume;
}

void SceneVolume::check_shape() const {
    if (planes.empty()) throw std::invalid_argument("scene volume: no planes");
    if (static_cast<int>(planes.size()) != depths.size())
        throw std::invalid_argument("scene volume: plane count does not match the depth grid");
    const auto n = planes.front().rows();
    for (const auto& plane : planes)
        if (plane.rows() != n || plane.cols() != n)
            throw std::invalid_argument("scene volume: planes must be square and equally sized");
}

void SceneVolume::validate() const {
    check_shape();
    for (const auto& plane : planes)
        if (plane.minCoeff() < 0.0)
            throw std::invalid_argument("scene volume: intensities must be nonnegative");
}

double NoiseModel::read_noise_sigma() const {
    return full_well * std::pow(10.0, -dynamic_range_db / 20.0);
}

void NoiseModel::validate() const {
    if (!(full_well > 0.0)) throw std::invalid_argument("noise: full well must be > 0");
    if (!(gain > 0.0)) throw std::invalid_argument("noise: gain must be > 0");
    if (!(dynamic_range_db > 0.0)) throw std::invalid_argument("noise: dynamic range must be > 0");
}

std::vector<Eigen::MatrixXd> forward_frames(const SceneVolume& scene,
                                            const IlluminationSequence& sequence,
                                            const SystemModel& model) {
    scene.check_shape();
    if (sequence.count() < 1) throw std::invalid_argument("forward: empty illumination sequence");
    if (sequence.grid_size() != scene.grid_size())
        throw std::invalid_argument("forward: pattern and scene grid sizes differ");
    if (model.grid_size() != scene.grid_size())
        throw std::invalid_argument("forward: system model and scene grid sizes differ");
    if (model.plane_count() != scene.plane_count())
        throw std::invalid_argument("forward: system model and scene depth counts differ");

    const int m = model.sensor_pixels();
    std::vector<Eigen::MatrixXd> frames(static_cast<size_t>(sequence.count()));

    parallel_for(sequence.count(), [&](int i) {
        const Eigen::MatrixXd& pattern = sequence.patterns[static_cast<size_t>(i)];
        Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < scene.plane_count(); ++k) {
            const Eigen::MatrixXd lit = pattern.cwiseProduct(scene.planes[static_cast<size_t>(k)]);
            frame.noalias() += model.left[static_cast<size_t>(k)] * lit *
                               model.right[static_cast<size_t>(k)].transpose();
        }
        frames[static_cast<size_t>(i)] = std::move(frame);
    });
    return frames;
}

MeasurementSet forward(const SceneVolume& scene, const IlluminationSequence& sequence,
                       const SystemModel& model) {
    scene.validate();
    MeasurementSet out;
    out.sequence = sequence;
    out.frames = forward_frames(scene, sequence, model);
    return out;
}

MeasurementSet add_noise(const MeasurementSet& clean, const NoiseModel& noise) {
    noise.validate();
    MeasurementSet out;
    out.sequence = clean.sequence;
    out.noise = noise;
    out.frames.assign(clean.frames.size(), Eigen::MatrixXd());

    const double sigma = noise.read_noise_sigma();
    const double photons_per_unit = noise.full_well / noise.gain;
    const double units_per_photon = noise.gain / noise.full_well;

    parallel_for(clean.frame_count(), [&](int i) {
        const Eigen::MatrixXd& src = clean.frames[static_cast<size_t>(i)];
        Eigen::MatrixXd dst(src.rows(), src.cols());
        for (int r = 0; r < src.rows(); ++r) {
            for (int c = 0; c < src.cols(); ++c) {
                EntryRng rng(noise.seed, i, r, c);
                const double value = std::max(src(r, c), 0.0);
                const double counts = rng.poisson(photons_per_unit * value);
                dst(r, c) = units_per_photon * (counts + sigma * rng.gaussian());
            }
        }
        out.frames[static_cast<size_t>(i)] = std::move(dst);
    });
    return out;
}

MeasurementSet sweepcam_forward(const SceneVolume& scene,
                                const std::vector<std::array<double, 2>>& shifts_mm,
                                const CameraGeometry& geometry, const MaskSpec& mask) {
    scene.validate();
    if (shifts_mm.empty()) throw std::invalid_argument("sweepcam: no mask shifts given");
    if (geometry.scene_angles != scene.grid_size())
        throw std::invalid_argument("sweepcam: geometry and scene grid sizes differ");

    const auto uniform = uniform_sequence(scene.grid_size());

    MeasurementSet out;
    out.sequence.family = PatternFamily::uniform;
    out.sequence.patterns.assign(shifts_mm.size(), uniform.patterns.front());
    out.frames.assign(shifts_mm.size(), Eigen::MatrixXd());

    parallel_for(static_cast<int>(shifts_mm.size()), [&](int j) {
        const SystemModel shifted =
            build_system_matrices(geometry, mask, scene.depths, shifts_mm[static_cast<size_t>(j)]);
        Eigen::MatrixXd frame =
            Eigen::MatrixXd::Zero(geometry.sensor_pixels, geometry.sensor_pixels);
        for (int k = 0; k < scene.plane_count(); ++k) {
            frame.noalias() += shifted.left[static_cast<size_t>(k)] *
                               scene.planes[static_cast<size_t>(k)] *
                               shifted.right[static_cast<size_t>(k)].transpose();
        }
        out.frames[static_cast<size_t>(j)] = std::move(frame);
    });
    return out;
}

}  // namespace codedlens
