#include "codedlens/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace codedlens {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

Eigen::VectorXd gaussian_kernel_1d() {
    Eigen::VectorXd kernel(kSsimWindow);
    const double center = (kSsimWindow - 1) / 2.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - center;
        kernel[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    }
    kernel /= kernel.sum();
    return kernel;
}

// Separable Gaussian filtering, valid region only (no padding).
Eigen::MatrixXd gaussian_filter_valid(const Eigen::MatrixXd& img, const Eigen::VectorXd& kernel) {
    const auto w = kernel.size();
    const auto rows = img.rows();
    const auto cols = img.cols();
    Eigen::MatrixXd horizontal(rows, cols - w + 1);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c + w <= cols; ++c)
            horizontal(r, c) = img.row(r).segment(c, w).dot(kernel);
    Eigen::MatrixXd out(rows - w + 1, cols - w + 1);
    for (Eigen::Index c = 0; c < horizontal.cols(); ++c)
        for (Eigen::Index r = 0; r + w <= rows; ++r)
            out(r, c) = horizontal.col(c).segment(r, w).dot(kernel);
    return out;
}

}  // namespace

DepthAndImage extract_depth_and_aif(const SceneVolume& volume, double threshold_fraction) {
    volume.validate();
    const int n = volume.grid_size();
    const int depth_count = volume.plane_count();

    double global_max = 0.0;
    for (const auto& plane : volume.planes) global_max = std::max(global_max, plane.maxCoeff());
    const double threshold = threshold_fraction * global_max;

    DepthAndImage out;
    out.depth.depth_cm = Eigen::MatrixXd::Zero(n, n);
    out.depth.valid = ValidityMask::Zero(n, n);
    out.all_in_focus = Eigen::MatrixXd::Zero(n, n);

    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int best_k = 0;
            double best_v = volume.planes[0](r, c);
            for (int k = 1; k < depth_count; ++k) {
                const double v = volume.planes[static_cast<size_t>(k)](r, c);
                if (v > best_v) {  // ties keep the nearer plane
                    best_v = v;
                    best_k = k;
                }
            }
            out.all_in_focus(r, c) = best_v;
            const bool is_valid = global_max > 0.0 && best_v >= threshold && best_v > 0.0;
            if (is_valid) {
                out.depth.valid(r, c) = 1;
                out.depth.depth_cm(r, c) = volume.depths[best_k] / 10.0;  // mm -> cm
            }
        }
    }
    return out;
}

double depth_rmse(const DepthMap& estimated, const DepthMap& reference) {
    if (estimated.depth_cm.rows() != reference.depth_cm.rows() ||
        estimated.depth_cm.cols() != reference.depth_cm.cols())
        throw std::invalid_argument("depth_rmse: grid size mismatch");

    double sum_sq = 0.0;
    long count = 0;
    for (Eigen::Index r = 0; r < estimated.depth_cm.rows(); ++r) {
        for (Eigen::Index c = 0; c < estimated.depth_cm.cols(); ++c) {
            if (estimated.valid(r, c) && reference.valid(r, c)) {
                const double d = estimated.depth_cm(r, c) - reference.depth_cm(r, c);
                sum_sq += d * d;
                ++count;
            }
        }
    }
    if (count == 0)
        throw std::invalid_argument("depth_rmse: no jointly valid pixels");
    return std::sqrt(sum_sq / static_cast<double>(count));
}

double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dynamic_range) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("ssim: image shape mismatch");
    if (!(dynamic_range > 0.0)) throw std::invalid_argument("ssim: dynamic range must be > 0");
    if (a.rows() < kSsimWindow || a.cols() < kSsimWindow)
        throw std::invalid_argument("ssim: images smaller than the 11x11 window");

    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const Eigen::VectorXd kernel = gaussian_kernel_1d();

    const Eigen::MatrixXd mu1 = gaussian_filter_valid(a, kernel);
    const Eigen::MatrixXd mu2 = gaussian_filter_valid(b, kernel);
    const Eigen::MatrixXd raw11 = gaussian_filter_valid(a.cwiseProduct(a), kernel);
    const Eigen::MatrixXd raw22 = gaussian_filter_valid(b.cwiseProduct(b), kernel);
    const Eigen::MatrixXd raw12 = gaussian_filter_valid(a.cwiseProduct(b), kernel);

    double total = 0.0;
    for (Eigen::Index r = 0; r < mu1.rows(); ++r) {
        for (Eigen::Index c = 0; c < mu1.cols(); ++c) {
            const double m1 = mu1(r, c);
            const double m2 = mu2(r, c);
            const double s11 = raw11(r, c) - m1 * m1;
            const double s22 = raw22(r, c) - m2 * m2;
            const double s12 = raw12(r, c) - m1 * m2;
            total += ((2.0 * m1 * m2 + c1) * (2.0 * s12 + c2)) /
                     ((m1 * m1 + m2 * m2 + c1) * (s11 + s22 + c2));
        }
    }
    return total / static_cast<double>(mu1.rows() * mu1.cols());
}

MetricReport compute_metrics(const SceneVolume& reconstructed, const DepthMap& reference_depth,
                             const Eigen::MatrixXd& reference_image, double threshold_fraction) {
    const DepthAndImage extracted = extract_depth_and_aif(reconstructed, threshold_fraction);

    MetricReport report;
    report.depth_rmse_cm = depth_rmse(extracted.depth, reference_depth);

    const double range = reference_image.maxCoeff() - std::min(0.0, reference_image.minCoeff());
    report.ssim = ssim(extracted.all_in_focus, reference_image, range > 0.0 ? range : 1.0);

    // Bucket reference pixels by nearest reconstruction plane.
    const int depth_count = reconstructed.plane_count();
    std::vector<double> sum_sq(static_cast<size_t>(depth_count), 0.0);
    std::vector<long> counts(static_cast<size_t>(depth_count), 0);
    const int n = extracted.depth.size();
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (!extracted.depth.valid(r, c) || !reference_depth.valid(r, c)) continue;
            const double ref_mm = reference_depth.depth_cm(r, c) * 10.0;
            int nearest = 0;
            double best = std::numeric_limits<double>::max();
            for (int k = 0; k < depth_count; ++k) {
                const double d = std::abs(reconstructed.depths[k] - ref_mm);
                if (d < best) {
                    best = d;
                    nearest = k;
                }
            }
            const double err =
                extracted.depth.depth_cm(r, c) - reference_depth.depth_cm(r, c);
            sum_sq[static_cast<size_t>(nearest)] += err * err;
            ++counts[static_cast<size_t>(nearest)];
        }
    }
    report.per_plane_rmse_cm.resize(static_cast<size_t>(depth_count), 0.0);
    for (int k = 0; k < depth_count; ++k) {
        report.per_plane_rmse_cm[static_cast<size_t>(k)] =
            counts[static_cast<size_t>(k)] > 0
                ? std::sqrt(sum_sq[static_cast<size_t>(k)] /
                            static_cast<double>(counts[static_cast<size_t>(k)]))
                : 0.0;
    }
    return report;
}

}  // namespace codedlens
