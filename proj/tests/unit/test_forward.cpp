#include <doctest.h>

#include <cmath>

#include "codedlens/forward.hpp"
#include "codedlens/parallel.hpp"
#include "test_support.hpp"

using namespace codedlens;
using namespace testsupport;

namespace {

struct Fixture {
    CameraGeometry geometry;
    MaskSpec mask;
    SystemModel model;
    DepthGrid depths;

    Fixture(int m, int n, double baseline = 10.0)
        : geometry(tiny_geometry(m, n, 31, baseline)),
          mask(MaskSpec::mls(5, geometry.mask_pitch_mm)),
          depths(DepthGrid::uniform(400.0, 600.0, 2)) {
        model = build_system_matrices(geometry, mask, depths);
    }
};

}  // namespace

TEST_CASE("forward basics") {
    Fixture f(8, 4);
    auto sequence = shifting_lines_sequence(4, 2);

    SUBCASE("zero scene gives zero frames") {
        auto zero = SceneVolume::zero(4, f.depths);
        auto out = forward(zero, sequence, f.model);
        REQUIRE(out.frame_count() == sequence.count());
        for (const auto& frame : out.frames) CHECK(frame.norm() == 0.0);
    }
    SUBCASE("homogeneity") {
        auto scene = random_volume(4, f.depths, 11);
        auto scaled = scene;
        for (auto& p : scaled.planes) p *= 3.5;
        auto a = forward(scene, sequence, f.model);
        auto b = forward(scaled, sequence, f.model);
        for (int i = 0; i < a.frame_count(); ++i) {
            const auto diff =
                (3.5 * a.frames[static_cast<size_t>(i)] - b.frames[static_cast<size_t>(i)]);
            CHECK(diff.norm() <= 1e-12 * b.frames[static_cast<size_t>(i)].norm());
        }
    }
    SUBCASE("unit voxel produces an outer product of system columns") {
        const int plane = 1, row = 2, col = 1;
        auto scene = SceneVolume::zero(4, f.depths);
        scene.planes[plane](row, col) = 1.0;
        auto uniform = uniform_sequence(4);
        auto out = forward(scene, uniform, f.model);
        const Eigen::MatrixXd oracle =
            f.model.left[plane].col(row) * f.model.right[plane].col(col).transpose();
        CHECK((out.frames[0] - oracle).norm() <= 1e-14 * std::max(1.0, oracle.norm()));
    }
    SUBCASE("linearity") {
        auto s1 = random_volume(4, f.depths, 21);
        auto s2 = random_volume(4, f.depths, 22);
        SceneVolume mix = s1;
        for (size_t k = 0; k < mix.planes.size(); ++k)
            mix.planes[k] = 2.0 * s1.planes[k] + 0.5 * s2.planes[k];
        auto fa = forward(s1, sequence, f.model);
        auto fb = forward(s2, sequence, f.model);
        auto fm = forward(mix, sequence, f.model);
        for (int i = 0; i < fm.frame_count(); ++i) {
            const Eigen::MatrixXd expect = 2.0 * fa.frames[static_cast<size_t>(i)] +
                                           0.5 * fb.frames[static_cast<size_t>(i)];
            CHECK((fm.frames[static_cast<size_t>(i)] - expect).norm() <=
                  1e-12 * std::max(1.0, expect.norm()));
        }
    }
    SUBCASE("adding illumination never decreases a measurement") {
        auto scene = random_volume(4, f.depths, 33);
        IlluminationSequence base = shifting_dots_sequence(4, 2);
        IlluminationSequence widened = base;
        for (auto& p : widened.patterns) p = p.cwiseMax(shifting_lines_sequence(4, 2).patterns[0]);
        auto a = forward(scene, base, f.model);
        auto b = forward(scene, widened, f.model);
        for (int i = 0; i < a.frame_count(); ++i)
            CHECK(((b.frames[static_cast<size_t>(i)] - a.frames[static_cast<size_t>(i)])
                       .minCoeff()) >= -1e-12);
    }
    SUBCASE("shape mismatch is rejected") {
        auto scene = random_volume(4, f.depths, 5);
        CHECK_THROWS_AS(forward(scene, uniform_sequence(5), f.model), std::invalid_argument);
        auto wrong_depths = random_volume(4, DepthGrid::uniform(400.0, 600.0, 3), 5);
        CHECK_THROWS_AS(forward(wrong_depths, uniform_sequence(4), f.model),
                        std::invalid_argument);
    }
}

TEST_CASE("threaded execution is bit-identical to sequential") {
    Fixture f(16, 8, 20.0);
    auto sequence = shifting_lines_sequence(8, 4);
    auto scene = random_volume(8, f.depths, 99);
    NoiseModel noise;
    noise.seed = 5;

    set_max_threads(1);
    auto serial = forward(scene, sequence, f.model);
    auto serial_noisy = add_noise(serial, noise);
    set_max_threads(4);
    auto threaded = forward(scene, sequence, f.model);
    auto threaded_noisy = add_noise(threaded, noise);
    set_max_threads(0);

    for (int i = 0; i < serial.frame_count(); ++i) {
        CHECK(serial.frames[static_cast<size_t>(i)] == threaded.frames[static_cast<size_t>(i)]);
        CHECK(serial_noisy.frames[static_cast<size_t>(i)] ==
              threaded_noisy.frames[static_cast<size_t>(i)]);
    }
}

TEST_CASE("forward matches the dense oracle") {
    Fixture f(8, 4, 15.0);
    auto sequence = shifting_dots_sequence(4, 2);
    auto scene = random_volume(4, f.depths, 77);

    const Eigen::MatrixXd dense = dense_system(f.model, sequence);
    const Eigen::VectorXd y_dense = dense * vec_stack(scene.planes);
    const auto frames = forward(scene, sequence, f.model).frames;
    const Eigen::VectorXd y_fast = vec_stack(frames);
    CHECK((y_fast - y_dense).norm() <= 1e-12 * y_dense.norm());
}

TEST_CASE("noise model") {
    NoiseModel noise;
    noise.full_well = 1.0e4;
    noise.gain = 2.0;
    noise.dynamic_range_db = 60.0;
    noise.seed = 123;

    SUBCASE("sigma formula") {
        CHECK(noise.read_noise_sigma() == doctest::Approx(1.0e4 * 1e-3).epsilon(1e-12));
    }

    MeasurementSet clean;
    clean.sequence = uniform_sequence(2);

    SUBCASE("deterministic given the seed") {
        clean.frames = {Eigen::MatrixXd::Constant(16, 16, 0.3)};
        auto a = add_noise(clean, noise);
        auto b = add_noise(clean, noise);
        CHECK(a.frames[0] == b.frames[0]);
        NoiseModel other = noise;
        other.seed = 124;
        auto c = add_noise(clean, other);
        CHECK(a.frames[0] != c.frames[0]);
    }
    SUBCASE("unbiased: sample mean within three standard errors") {
        const double value = 0.4;
        clean.frames = {Eigen::MatrixXd::Constant(100, 100, value)};
        auto noisy = add_noise(clean, noise);
        const double mean = noisy.frames[0].mean();
        // Var = (G/F) * value + (G/F)^2 sigma^2 per entry.
        const double g_over_f = noise.gain / noise.full_well;
        const double var = g_over_f * value +
                           g_over_f * g_over_f * noise.read_noise_sigma() *
                               noise.read_noise_sigma();
        const double stderr3 = 3.0 * std::sqrt(var / 1e4);
        CHECK(std::abs(mean - value) <= stderr3);
    }
    SUBCASE("large dynamic range leaves pure shot noise") {
        NoiseModel quiet = noise;
        quiet.dynamic_range_db = 300.0;
        const double value = 0.5;
        clean.frames = {Eigen::MatrixXd::Constant(120, 120, value)};
        auto noisy = add_noise(clean, quiet);
        const double mean = noisy.frames[0].mean();
        double var = 0.0;
        for (Eigen::Index r = 0; r < 120; ++r)
            for (Eigen::Index c = 0; c < 120; ++c)
                var += (noisy.frames[0](r, c) - mean) * (noisy.frames[0](r, c) - mean);
        var /= (120.0 * 120.0 - 1.0);
        const double expected = (quiet.gain / quiet.full_well) * value;
        CHECK(var == doctest::Approx(expected).epsilon(0.1));
    }
    SUBCASE("negative inputs are clamped before sampling; outputs may stay negative") {
        NoiseModel loud = noise;
        loud.dynamic_range_db = 20.0;  // strong read noise
        clean.frames = {Eigen::MatrixXd::Constant(50, 50, -1e-9)};
        auto noisy = add_noise(clean, loud);
        CHECK(noisy.frames[0].minCoeff() < 0.0);  // read noise goes both ways
        CHECK(std::abs(noisy.frames[0].mean()) <= 0.05);
    }
}

TEST_CASE("sweepcam forward") {
    Fixture f(16, 6, 0.0);
    auto scene = random_volume(6, f.depths, 3);

    SUBCASE("zero shift equals the uniform-pattern forward") {
        auto swept = sweepcam_forward(scene, {{0.0, 0.0}}, f.geometry, f.mask);
        auto direct = forward(scene, uniform_sequence(6), f.model);
        CHECK((swept.frames[0] - direct.frames[0]).norm() <= 1e-14 * direct.frames[0].norm());
    }
    SUBCASE("48 shifts give 48 frames") {
        std::vector<std::array<double, 2>> shifts;
        for (int i = 0; i < 48; ++i)
            shifts.push_back({-1.44 + 0.06 * i, 1.44 - 0.06 * i});
        auto swept = sweepcam_forward(scene, shifts, f.geometry, f.mask);
        CHECK(swept.frame_count() == 48);
        CHECK(swept.sequence.count() == 48);  // uniform pattern per frame
    }
    SUBCASE("point source frames translate with the mask shift") {
        CameraGeometry g = tiny_geometry(128, 3, 63, 0.0);
        g.sensor_pitch_mm = 0.01;
        auto mask = MaskSpec::mls(6, g.mask_pitch_mm);
        DepthGrid one_plane(std::vector<double>{500.0});
        SceneVolume point = SceneVolume::zero(3, one_plane);
        point.planes[0](1, 1) = 1.0;

        const double shift = 0.24;
        auto frames = sweepcam_forward(point, {{0.0, 0.0}, {shift, 0.0}}, g, mask);
        // Mask translation t moves the PSF by t / (1 - d/z) along the row axis.
        const double scale = 1.0 - g.mask_distance_mm / 500.0;
        const int expected_px =
            static_cast<int>(std::lround(shift / scale / g.sensor_pitch_mm));

        // Collapse the unshifted axis; the row profile carries the translation.
        const Eigen::VectorXd a = frames.frames[0].rowwise().sum();
        const Eigen::VectorXd b = frames.frames[1].rowwise().sum();
        double best = -1.0;
        int best_lag = 0;
        for (int lag = -127; lag <= 127; ++lag) {
            double sum = 0.0;
            for (int i = 0; i < 128; ++i) {
                const int j = i + lag;
                if (j < 0 || j >= 128) continue;
                sum += a(i) * b(j);
            }
            if (sum > best) {
                best = sum;
                best_lag = lag;
            }
        }
        CHECK(std::abs(std::abs(best_lag) - expected_px) <= 1);
    }
}
