#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "codedlens/errors.hpp"
#include "codedlens/recon.hpp"
#include "test_support.hpp"

using namespace codedlens;
using namespace testsupport;

namespace {

std::vector<Eigen::MatrixXd> random_frames(int count, int m, std::uint64_t seed) {
    std::vector<Eigen::MatrixXd> frames(static_cast<size_t>(count));
    std::uint64_t state = seed;
    for (auto& f : frames) f = random_matrix(m, m, state);
    return frames;
}

}  // namespace

TEST_CASE("adjoint identity over geometry and pattern combinations") {
    struct Combo {
        int m, n, mask, planes;
        double baseline, axial;
        IlluminationSequence sequence;
    };
    std::vector<Combo> combos;
    combos.push_back({8, 4, 31, 2, 0.0, 0.0, uniform_sequence(4)});
    combos.push_back({10, 5, 31, 3, 20.0, 0.0, shifting_lines_sequence(5, 2)});
    combos.push_back({12, 6, 63, 2, 50.0, 30.0, shifting_dots_sequence(6, 3)});
    combos.push_back({9, 4, 31, 1, 35.0, 0.0, random_sequence(4, 12, 5)});

    std::uint64_t state = 2024;
    for (auto& combo : combos) {
        CAPTURE(combo.m);
        CAPTURE(combo.baseline);
        auto geometry = tiny_geometry(combo.m, combo.n, combo.mask, combo.baseline, combo.axial);
        auto mask = MaskSpec::mls(5, geometry.mask_pitch_mm);
        auto depths = DepthGrid::uniform(400.0, 600.0, combo.planes);
        auto model = build_system_matrices(geometry, mask, depths);

        for (int trial = 0; trial < 25; ++trial) {
            auto scene = random_volume(combo.n, depths, splitmix64(state));
            auto frames = random_frames(combo.sequence.count(), combo.m, splitmix64(state));
            const auto forward_frames_out = forward(scene, combo.sequence, model).frames;
            const auto back = apply_adjoint(frames, model, combo.sequence);
            double lhs = 0.0;
            for (size_t i = 0; i < frames.size(); ++i)
                lhs += frames[i].cwiseProduct(forward_frames_out[i]).sum();
            double rhs = 0.0;
            for (size_t k = 0; k < scene.planes.size(); ++k)
                rhs += scene.planes[k].cwiseProduct(back.planes[k]).sum();
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
        }
    }
}

TEST_CASE("adjoint of zero frames is a zero volume") {
    auto geometry = tiny_geometry(8, 4, 31, 10.0);
    auto mask = MaskSpec::mls(5, geometry.mask_pitch_mm);
    auto depths = DepthGrid::uniform(400.0, 600.0, 2);
    auto model = build_system_matrices(geometry, mask, depths);
    auto sequence = shifting_lines_sequence(4, 2);
    std::vector<Eigen::MatrixXd> zeros(static_cast<size_t>(sequence.count()),
                                       Eigen::MatrixXd::Zero(8, 8));
    auto back = apply_adjoint(zeros, model, sequence);
    for (const auto& plane : back.planes) CHECK(plane.norm() == 0.0);
}

TEST_CASE("adjoint matches the dense transpose") {
    auto geometry = tiny_geometry(8, 4, 31, 15.0);
    auto mask = MaskSpec::mls(5, geometry.mask_pitch_mm);
    auto depths = DepthGrid::uniform(400.0, 600.0, 2);
    auto model = build_system_matrices(geometry, mask, depths);
    auto sequence = shifting_dots_sequence(4, 2);

    const Eigen::MatrixXd dense = dense_system(model, sequence);
    auto frames = random_frames(sequence.count(), 8, 404);
    const Eigen::VectorXd back_dense = dense.transpose() * vec_stack(frames);
    const auto back = apply_adjoint(frames, model, sequence);
    CHECK((vec_stack(back.planes) - back_dense).norm() <= 1e-12 * back_dense.norm());
}

TEST_CASE("tv3d value and gradient") {
    SUBCASE("constant volume") {
        std::vector<Eigen::MatrixXd> planes(3, Eigen::MatrixXd::Constant(4, 4, 2.5));
        std::vector<Eigen::MatrixXd> grad;
        const double value = tv3d_value_and_gradient(planes, 1e-3, 1.0, &grad);
        CHECK(value == doctest::Approx(0.0).epsilon(1e-12));
        for (const auto& g : grad) CHECK(g.norm() == 0.0);
    }
    SUBCASE("gradient matches central finite differences") {
        std::uint64_t state = 31337;
        std::vector<Eigen::MatrixXd> planes;
        for (int k = 0; k < 3; ++k) planes.push_back(random_matrix(4, 4, state));
        const double eps = 0.05;
        const double weight = 0.7;
        std::vector<Eigen::MatrixXd> grad;
        tv3d_value_and_gradient(planes, eps, weight, &grad);
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) {
                    auto plus = planes, minus = planes;
                    plus[static_cast<size_t>(k)](r, c) += h;
                    minus[static_cast<size_t>(k)](r, c) -= h;
                    const double fd = (tv3d_value_and_gradient(plus, eps, weight, nullptr) -
                                       tv3d_value_and_gradient(minus, eps, weight, nullptr)) /
                                      (2.0 * h);
                    const double an = grad[static_cast<size_t>(k)](r, c);
                    CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(fd)));
                }
            }
        }
    }
    SUBCASE("unit step edge approaches the edge area as eps vanishes") {
        const int n = 8;
        Eigen::MatrixXd plane = Eigen::MatrixXd::Zero(n, n);
        plane.rightCols(n / 2).setOnes();  // one vertical edge
        std::vector<Eigen::MatrixXd> planes = {plane};
        const double value = tv3d_value_and_gradient(planes, 1e-9, 1.0, nullptr);
        CHECK(value == doctest::Approx(static_cast<double>(n)).epsilon(1e-5));
    }
}

TEST_CASE("lipschitz estimate") {
    auto geometry = tiny_geometry(8, 4, 9, 0.0);
    auto mask = MaskSpec::pinhole(9, 4, geometry.mask_pitch_mm);
    DepthGrid one_plane(std::vector<double>{500.0});
    auto model = build_system_matrices(geometry, mask, one_plane);
    CodedIlluminationOperator op(model, uniform_sequence(4));

    SUBCASE("matches the dense largest singular value") {
        const Eigen::MatrixXd dense = dense_system(model, op.sequence());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
        const double sigma_max = svd.singularValues()(0);
        const double estimate = lipschitz_estimate(op, 100);
        CHECK(estimate == doctest::Approx(sigma_max * sigma_max).epsilon(1e-8));
    }
    SUBCASE("quadratic under matrix scaling") {
        SystemModel scaled = model;
        for (auto& m : scaled.left) m *= 3.0;
        for (auto& m : scaled.right) m *= 3.0;
        CodedIlluminationOperator scaled_op(scaled, uniform_sequence(4));
        const double base = lipschitz_estimate(op, 60);
        const double big = lipschitz_estimate(scaled_op, 60);
        CHECK(big == doctest::Approx(81.0 * base).epsilon(1e-6));
    }
    SUBCASE("nonnegative") { CHECK(lipschitz_estimate(op, 10) >= 0.0); }
}

TEST_CASE("solve") {
    auto geometry = tiny_geometry(32, 16, 63, 30.0);
    auto mask = MaskSpec::mls(6, geometry.mask_pitch_mm);
    DepthGrid one_plane(std::vector<double>{500.0});
    auto model = build_system_matrices(geometry, mask, one_plane);
    auto sequence = shifting_lines_sequence(16, 4);
    CodedIlluminationOperator op(model, sequence);

    SUBCASE("zero measurements with positive lambda give the zero volume") {
        ReconProblem problem;
        problem.op = &op;
        problem.measurements.assign(static_cast<size_t>(sequence.count()),
                                    Eigen::MatrixXd::Zero(32, 32));
        problem.lambda = 1e-3;
        problem.tv_epsilon = 1e-6;
        auto [volume, report] = solve(problem, SolveOptions{.max_iters = 10});
        for (const auto& plane : volume.planes) CHECK(plane.norm() == 0.0);
        CHECK(report.objective_trace.back() <= report.objective_trace.front());
    }

    SUBCASE("noiseless single-plane scene is recovered") {
        SceneVolume truth = SceneVolume::zero(16, one_plane);
        // Piecewise-constant scene with structure.
        truth.planes[0].block(2, 2, 6, 6).setConstant(1.0);
        truth.planes[0].block(9, 8, 5, 6).setConstant(0.6);
        auto measurements = forward(truth, sequence, model);

        ReconProblem problem;
        problem.op = &op;
        problem.measurements = measurements.frames;
        problem.lambda = 1e-6;
        problem.tv_epsilon = 1e-4;
        auto [volume, report] = solve(problem, SolveOptions{.max_iters = 400});

        double err = 0.0, norm = 0.0;
        for (size_t k = 0; k < truth.planes.size(); ++k) {
            err += (volume.planes[k] - truth.planes[k]).squaredNorm();
            norm += truth.planes[k].squaredNorm();
        }
        CHECK(std::sqrt(err / norm) <= 1e-2);
        CHECK(report.objective_trace.back() <= report.objective_trace.front());
        for (const auto& plane : volume.planes) CHECK(plane.minCoeff() >= 0.0);
    }

    SUBCASE("deterministic across runs") {
        auto truth = random_volume(16, one_plane, 55);
        auto measurements = forward(truth, sequence, model);
        ReconProblem problem;
        problem.op = &op;
        problem.measurements = measurements.frames;
        problem.lambda = 1e-4;
        problem.tv_epsilon = 1e-5;
        auto [va, ra] = solve(problem, SolveOptions{.max_iters = 30});
        auto [vb, rb] = solve(problem, SolveOptions{.max_iters = 30});
        for (size_t k = 0; k < va.planes.size(); ++k) CHECK(va.planes[k] == vb.planes[k]);
        CHECK(ra.objective_trace == rb.objective_trace);
    }

    SUBCASE("fixed step that is far too large raises a numerical error") {
        auto truth = random_volume(16, one_plane, 9);
        auto measurements = forward(truth, sequence, model);
        ReconProblem problem;
        problem.op = &op;
        problem.measurements = measurements.frames;
        problem.lambda = 0.0;
        problem.tv_epsilon = 1e-5;
        SolveOptions options;
        options.max_iters = 200;
        options.step_rule = StepRule::fixed(1e200);  // overflows the objective
        CHECK_THROWS_AS(solve(problem, options), NumericalError);
    }
}
