#include "codedlens/recon.hpp"

#include <cmath>
#include <stdexcept>

#include "codedlens/errors.hpp"
#include "codedlens/parallel.hpp"

namespace codedlens {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double volume_dot(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
    double sum = 0.0;
    for (size_t k = 0; k < a.size(); ++k) sum += a[k].cwiseProduct(b[k]).sum();
    return sum;
}

double volume_sqnorm(const std::vector<Eigen::MatrixXd>& a) { return volume_dot(a, a); }

void check_frames(const std::vector<Eigen::MatrixXd>& frames, int count, int m,
                  const char* what) {
    if (static_cast<int>(frames.size()) != count)
        throw std::invalid_argument(std::string(what) + ": frame count mismatch");
    for (const auto& f : frames)
        if (f.rows() != m || f.cols() != m)
            throw std::invalid_argument(std::string(what) + ": frame shape mismatch");
}

}  // namespace

CodedIlluminationOperator::CodedIlluminationOperator(SystemModel model,
                                                     IlluminationSequence sequence)
    : model_(std::move(model)), sequence_(std::move(sequence)) {
    if (sequence_.count() < 1)
        throw std::invalid_argument("operator: empty illumination sequence");
    if (sequence_.grid_size() != model_.grid_size())
        throw std::invalid_argument("operator: pattern and model grid sizes differ");
}

std::vector<Eigen::MatrixXd> CodedIlluminationOperator::apply(const SceneVolume& scene) const {
    return forward_frames(scene, sequence_, model_);
}

SceneVolume CodedIlluminationOperator::apply_adjoint(
    const std::vector<Eigen::MatrixXd>& frames) const {
    return codedlens::apply_adjoint(frames, model_, sequence_);
}

MaskShiftOperator::MaskShiftOperator(const CameraGeometry& geometry, const MaskSpec& mask,
                                     const DepthGrid& depths,
                                     std::vector<std::array<double, 2>> shifts_mm)
    : geometry_(geometry), depths_(depths) {
    if (shifts_mm.empty()) throw std::invalid_argument("operator: no mask shifts given");
    models_.assign(shifts_mm.size(), SystemModel{});
    parallel_for(static_cast<int>(shifts_mm.size()), [&](int j) {
        models_[static_cast<size_t>(j)] =
            build_system_matrices(geometry, mask, depths, shifts_mm[static_cast<size_t>(j)]);
    });
}

std::vector<Eigen::MatrixXd> MaskShiftOperator::apply(const SceneVolume& scene) const {
    scene.check_shape();
    if (scene.grid_size() != grid_size() || scene.plane_count() != depths_.size())
        throw std::invalid_argument("operator: scene shape mismatch");
    const int m = sensor_pixels();
    std::vector<Eigen::MatrixXd> frames(models_.size());
    parallel_for(frame_count(), [&](int j) {
        const SystemModel& model = models_[static_cast<size_t>(j)];
        Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < depths_.size(); ++k) {
            frame.noalias() += model.left[static_cast<size_t>(k)] *
                               scene.planes[static_cast<size_t>(k)] *
                               model.right[static_cast<size_t>(k)].transpose();
        }
        frames[static_cast<size_t>(j)] = std::move(frame);
    });
    return frames;
}

SceneVolume MaskShiftOperator::apply_adjoint(const std::vector<Eigen::MatrixXd>& frames) const {
    check_frames(frames, frame_count(), sensor_pixels(), "mask-shift adjoint");
    SceneVolume out = SceneVolume::zero(grid_size(), depths_);
    parallel_for(depths_.size(), [&](int k) {
        Eigen::MatrixXd& plane = out.planes[static_cast<size_t>(k)];
        for (size_t j = 0; j < models_.size(); ++j) {
            plane.noalias() += models_[j].left[static_cast<size_t>(k)].transpose() * frames[j] *
                               models_[j].right[static_cast<size_t>(k)];
        }
    });
    return out;
}

SceneVolume apply_adjoint(const std::vector<Eigen::MatrixXd>& frames, const SystemModel& model,
                          const IlluminationSequence& sequence) {
    if (static_cast<int>(frames.size()) != sequence.count())
        throw std::invalid_argument("adjoint: frame count does not match the pattern count");
    check_frames(frames, sequence.count(), model.sensor_pixels(), "adjoint");
    if (sequence.grid_size() != model.grid_size())
        throw std::invalid_argument("adjoint: pattern and model grid sizes differ");

    SceneVolume out = SceneVolume::zero(model.grid_size(), model.depths);
    parallel_for(model.plane_count(), [&](int k) {
        const Eigen::MatrixXd& left = model.left[static_cast<size_t>(k)];
        const Eigen::MatrixXd& right = model.right[static_cast<size_t>(k)];
        Eigen::MatrixXd& plane = out.planes[static_cast<size_t>(k)];
        for (size_t i = 0; i < frames.size(); ++i) {
            const Eigen::MatrixXd back = left.transpose() * frames[i] * right;
            plane.noalias() += sequence.patterns[i].cwiseProduct(back);
        }
    });
    return out;
}

double tv3d_value_and_gradient(const std::vector<Eigen::MatrixXd>& planes, double epsilon,
                               double depth_weight, std::vector<Eigen::MatrixXd>* grad) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("tv: epsilon must be > 0");
    if (depth_weight < 0.0) throw std::invalid_argument("tv: depth weight must be >= 0");
    if (planes.empty()) return 0.0;

    const int depth_count = static_cast<int>(planes.size());
    const auto rows = planes.front().rows();
    const auto cols = planes.front().cols();
    if (grad) {
        grad->assign(planes.size(), Eigen::MatrixXd::Zero(rows, cols));
    }

    double value = 0.0;
    const double eps_sq = epsilon * epsilon;
    for (int k = 0; k < depth_count; ++k) {
        const Eigen::MatrixXd& plane = planes[static_cast<size_t>(k)];
        const Eigen::MatrixXd* next_plane =
            (k + 1 < depth_count) ? &planes[static_cast<size_t>(k + 1)] : nullptr;
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                const double v = plane(r, c);
                const double dx = (c + 1 < cols) ? plane(r, c + 1) - v : 0.0;
                const double dy = (r + 1 < rows) ? plane(r + 1, c) - v : 0.0;
                const double dz = next_plane ? (*next_plane)(r, c) - v : 0.0;
                const double mag =
                    std::sqrt(dx * dx + dy * dy + depth_weight * dz * dz + eps_sq);
                value += mag;
                if (grad) {
                    const double inv = 1.0 / mag;
                    auto& g = *grad;
                    g[static_cast<size_t>(k)](r, c) -=
                        (dx + dy + depth_weight * dz) * inv;
                    if (c + 1 < cols) g[static_cast<size_t>(k)](r, c + 1) += dx * inv;
                    if (r + 1 < rows) g[static_cast<size_t>(k)](r + 1, c) += dy * inv;
                    if (next_plane)
                        g[static_cast<size_t>(k + 1)](r, c) += depth_weight * dz * inv;
                }
            }
        }
    }
    value -= epsilon * static_cast<double>(depth_count) * static_cast<double>(rows) *
             static_cast<double>(cols);
    return value;
}

double lipschitz_estimate(const ForwardOperator& op, int iterations) {
    const int n = op.grid_size();
    SceneVolume v = SceneVolume::zero(n, op.depths());
    std::uint64_t state = 0x5DEECE66Dull;
    for (auto& plane : v.planes)
        for (Eigen::Index r = 0; r < plane.rows(); ++r)
            for (Eigen::Index c = 0; c < plane.cols(); ++c)
                plane(r, c) = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;

    double norm = std::sqrt(volume_sqnorm(v.planes));
    if (!(norm > 0.0)) return 0.0;
    for (auto& plane : v.planes) plane /= norm;

    double eigenvalue = 0.0;
    for (int it = 0; it < iterations; ++it) {
        SceneVolume w = op.apply_adjoint(op.apply(v));
        eigenvalue = volume_dot(v.planes, w.planes);  // Rayleigh quotient
        norm = std::sqrt(volume_sqnorm(w.planes));
        if (!(norm > 0.0)) return 0.0;
        for (auto& plane : w.planes) plane /= norm;
        v = std::move(w);
    }
    return eigenvalue;
}

void ReconProblem::validate() const {
    if (op == nullptr) throw std::invalid_argument("recon: missing forward operator");
    if (lambda < 0.0) throw std::invalid_argument("recon: lambda must be >= 0");
    if (!(tv_epsilon > 0.0)) throw std::invalid_argument("recon: tv epsilon must be > 0");
    if (depth_weight < 0.0) throw std::invalid_argument("recon: depth weight must be >= 0");
    check_frames(measurements, op->frame_count(), op->sensor_pixels(), "recon measurements");
}

std::pair<SceneVolume, SolverReport> solve(const ReconProblem& problem,
                                           const SolveOptions& options) {
    problem.validate();
    if (options.max_iters < 0) throw std::invalid_argument("recon: max_iters must be >= 0");
    const ForwardOperator& op = *problem.op;
    const auto& measurements = problem.measurements;
    const double lambda = problem.lambda;

    auto data_residual = [&](const std::vector<Eigen::MatrixXd>& frames) {
        double sum = 0.0;
        for (size_t i = 0; i < frames.size(); ++i)
            sum += (frames[i] - measurements[i]).squaredNorm();
        return sum;
    };
    auto objective = [&](const SceneVolume& v) {
        double value = data_residual(op.apply(v));
        if (lambda > 0.0)
            value += lambda * tv3d_value_and_gradient(v.planes, problem.tv_epsilon,
                                                      problem.depth_weight, nullptr);
        return value;
    };

    SceneVolume x = SceneVolume::zero(op.grid_size(), op.depths());
    SolverReport report;
    report.lambda = lambda;

    double fx = objective(x);
    if (!std::isfinite(fx)) throw NumericalError("solver: non-finite initial objective");
    report.objective_trace.push_back(fx);

    SceneVolume best = x;
    double best_value = fx;

    double step;
    if (options.step_rule.kind == StepRule::Kind::fixed) {
        step = options.step_rule.fixed_step;
        if (!(step > 0.0)) throw std::invalid_argument("solver: fixed step must be > 0");
    } else if (options.initial_step > 0.0) {
        step = options.initial_step;
    } else {
        const double l_data = 2.0 * lipschitz_estimate(op);
        const double l_tv =
            lambda > 0.0 ? lambda * (8.0 + 4.0 * problem.depth_weight) / problem.tv_epsilon : 0.0;
        step = (l_data + l_tv > 0.0) ? 1.0 / (l_data + l_tv) : 1.0;
    }
    const bool backtracking = options.step_rule.kind == StepRule::Kind::backtracking;

    SceneVolume y = x;
    double momentum_t = 1.0;
    int stalled = 0;
    report.stop_reason = "max_iters";

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        report.iterations = iter;

        // Objective and gradient at the extrapolated point.
        const auto frames_y = op.apply(y);
        double fy = data_residual(frames_y);
        std::vector<Eigen::MatrixXd> residual(frames_y.size());
        for (size_t i = 0; i < frames_y.size(); ++i) residual[i] = frames_y[i] - measurements[i];
        SceneVolume grad = op.apply_adjoint(residual);
        for (auto& plane : grad.planes) plane *= 2.0;
        if (lambda > 0.0) {
            std::vector<Eigen::MatrixXd> tv_grad;
            fy += lambda * tv3d_value_and_gradient(y.planes, problem.tv_epsilon,
                                                   problem.depth_weight, &tv_grad);
            for (size_t k = 0; k < grad.planes.size(); ++k)
                grad.planes[k] += lambda * tv_grad[k];
        }
        if (!std::isfinite(fy)) throw NumericalError("solver: non-finite objective");

        // Projected gradient step with optional backtracking on the usual
        // quadratic upper bound.
        SceneVolume x_new = SceneVolume::zero(op.grid_size(), op.depths());
        double f_new = 0.0;
        if (backtracking) step *= 1.25;
        for (int halvings = 0;; ++halvings) {
            for (size_t k = 0; k < x_new.planes.size(); ++k)
                x_new.planes[k] =
                    (y.planes[k] - step * grad.planes[k]).cwiseMax(0.0);
            f_new = objective(x_new);
            if (!backtracking) break;
            double inner = 0.0;
            double sq = 0.0;
            for (size_t k = 0; k < x_new.planes.size(); ++k) {
                const Eigen::MatrixXd diff = x_new.planes[k] - y.planes[k];
                inner += diff.cwiseProduct(grad.planes[k]).sum();
                sq += diff.squaredNorm();
            }
            const double bound = fy + inner + sq / (2.0 * step);
            if (std::isfinite(f_new) && f_new <= bound + 1e-12 * std::abs(bound) + 1e-300) break;
            if (halvings >= 60)
                throw NumericalError("solver: backtracking failed; step size diverged");
            step *= 0.5;
        }
        if (!std::isfinite(f_new)) throw NumericalError("solver: non-finite objective");

        if (f_new > fx) {
            // Momentum overshoot: drop the trial point and restart from x.
            ++report.restarts;
            momentum_t = 1.0;
            y = x;
            continue;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
        const double beta = (momentum_t - 1.0) / t_next;
        y = x_new;
        for (size_t k = 0; k < y.planes.size(); ++k)
            y.planes[k] += beta * (x_new.planes[k] - x.planes[k]);
        momentum_t = t_next;

        const double decrease = fx - f_new;
        x = std::move(x_new);
        fx = f_new;
        report.objective_trace.push_back(fx);
        report.step_size = step;
        if (fx < best_value) {
            best_value = fx;
            best = x;
        }
        if (decrease <= options.rel_tolerance * std::max(std::abs(fx), 1e-30)) {
            if (++stalled >= 5) {
                report.stop_reason = "converged";
                break;
            }
        } else {
            stalled = 0;
        }
    }

    const auto final_frames = op.apply(best);
    report.final_data_residual = data_residual(final_frames);
    report.final_tv = tv3d_value_and_gradient(best.planes, problem.tv_epsilon,
                                              problem.depth_weight, nullptr);
    return {std::move(best), std::move(report)};
}

}  // namespace codedlens
