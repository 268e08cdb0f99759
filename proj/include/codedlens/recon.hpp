#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "codedlens/forward.hpp"
#include "codedlens/optics.hpp"
#include "codedlens/patterns.hpp"

namespace codedlens {

// Linear measurement operator: scene volume -> stack of sensor frames.
class ForwardOperator {
 public:
    virtual ~ForwardOperator() = default;
    virtual int frame_count() const = 0;
    virtual int sensor_pixels() const = 0;
    virtual int grid_size() const = 0;
    virtual const DepthGrid& depths() const = 0;
    virtual std::vector<Eigen::MatrixXd> apply(const SceneVolume& scene) const = 0;
    virtual SceneVolume apply_adjoint(const std::vector<Eigen::MatrixXd>& frames) const = 0;
};

// Coded illumination: frame i = sum_k L_k (P_i o I_k) R_k^T.
class CodedIlluminationOperator final : public ForwardOperator {
 public:
    CodedIlluminationOperator(SystemModel model, IlluminationSequence sequence);

    int frame_count() const override { return sequence_.count(); }
    int sensor_pixels() const override { return model_.sensor_pixels(); }
    int grid_size() const override { return model_.grid_size(); }
    const DepthGrid& depths() const override { return model_.depths; }
    std::vector<Eigen::MatrixXd> apply(const SceneVolume& scene) const override;
    SceneVolume apply_adjoint(const std::vector<Eigen::MatrixXd>& frames) const override;

    const SystemModel& model() const { return model_; }
    const IlluminationSequence& sequence() const { return sequence_; }

 private:
    SystemModel model_;
    IlluminationSequence sequence_;
};

// Mask translation under uniform illumination: frame j uses its own
// (shifted-mask) system matrices.
class MaskShiftOperator final : public ForwardOperator {
 public:
    MaskShiftOperator(const CameraGeometry& geometry, const MaskSpec& mask,
                      const DepthGrid& depths, std::vector<std::array<double, 2>> shifts_mm);

    int frame_count() const override { return static_cast<int>(models_.size()); }
    int sensor_pixels() const override { return geometry_.sensor_pixels; }
    int grid_size() const override { return geometry_.scene_angles; }
    const DepthGrid& depths() const override { return depths_; }
    std::vector<Eigen::MatrixXd> apply(const SceneVolume& scene) const override;
    SceneVolume apply_adjoint(const std::vector<Eigen::MatrixXd>& frames) const override;

 private:
    CameraGeometry geometry_;
    DepthGrid depths_;
    std::vector<SystemModel> models_;  // one per mask shift
};

// Adjoint of forward(): plane k = sum_i P_i o (L_k^T Y_i R_k).
SceneVolume apply_adjoint(const std::vector<Eigen::MatrixXd>& frames, const SystemModel& model,
                          const IlluminationSequence& sequence);

// Smoothed isotropic 3-D total variation with forward differences and
// replicate boundary:
//     sum_v sqrt(dx^2 + dy^2 + w*dz^2 + eps^2) - eps * voxel_count.
// Returns the value; when grad is non-null it receives the exact gradient.
double tv3d_value_and_gradient(const std::vector<Eigen::MatrixXd>& planes, double epsilon,
                               double depth_weight, std::vector<Eigen::MatrixXd>* grad);

// Largest eigenvalue of adjoint(forward(.)) by power iteration from a fixed
// deterministic start vector.
double lipschitz_estimate(const ForwardOperator& op, int iterations = 50);

struct StepRule {
    enum class Kind { backtracking, fixed };
    Kind kind = Kind::backtracking;
    double fixed_step = 0.0;  // used by Kind::fixed

    static StepRule backtracking() { return {}; }
    static StepRule fixed(double step) { return {Kind::fixed, step}; }
};

struct ReconProblem {
    const ForwardOperator* op = nullptr;
    std::vector<Eigen::MatrixXd> measurements;
    double lambda = 0.0;       // TV weight, >= 0
    double tv_epsilon = 1e-6;  // smoothing, > 0
    double depth_weight = 1.0;

    void validate() const;
};

struct SolverReport {
    std::vector<double> objective_trace;  // accepted iterates, trace[0] = start
    double final_data_residual = 0.0;     // sum_i |Y_i - F_i(I)|_F^2
    double final_tv = 0.0;
    int iterations = 0;
    int restarts = 0;
    double lambda = 0.0;
    double step_size = 0.0;  // last accepted step
    std::string stop_reason;
};

struct SolveOptions {
    int max_iters = 200;
    StepRule step_rule = StepRule::backtracking();
    double rel_tolerance = 1e-7;  // stop when the objective stalls
    double initial_step = 0.0;    // backtracking start; 0 = estimate internally
};

// Accelerated projected-gradient descent on
//     f(I) = sum_i |Y_i - F_i(I)|_F^2 + lambda * TV_eps(I),  I >= 0,
// with momentum restart whenever the objective rises. Returns the best
// iterate seen. Throws NumericalError if the objective turns non-finite.
std::pair<SceneVolume, SolverReport> solve(const ReconProblem& problem,
                                           const SolveOptions& options);

}  // namespace codedlens
