#include "codedlens/patterns.hpp"

#include <bit>
#include <random>
#include <stdexcept>

namespace codedlens {

namespace {

// Primitive polynomial exponents below the register order, x^0 included.
// Order r uses p(x) = x^r + sum of the listed powers. Index = order - 2.
constexpr int kMaxTaps = 4;
constexpr int kPolyLow[19][kMaxTaps] = {
    {1, 0, -1, -1},   // r=2:  x^2 + x + 1
    {1, 0, -1, -1},   // r=3:  x^3 + x + 1
    {1, 0, -1, -1},   // r=4:  x^4 + x + 1
    {2, 0, -1, -1},   // r=5:  x^5 + x^2 + 1
    {1, 0, -1, -1},   // r=6:  x^6 + x + 1
    {1, 0, -1, -1},   // r=7:  x^7 + x + 1
    {4, 3, 2, 0},     // r=8:  x^8 + x^4 + x^3 + x^2 + 1
    {5, 0, -1, -1},   // r=9:  x^9 + x^5 + 1
    {3, 0, -1, -1},   // r=10: x^10 + x^3 + 1
    {2, 0, -1, -1},   // r=11: x^11 + x^2 + 1
    {6, 4, 1, 0},     // r=12: x^12 + x^6 + x^4 + x + 1
    {4, 3, 1, 0},     // r=13: x^13 + x^4 + x^3 + x + 1
    {10, 6, 1, 0},    // r=14: x^14 + x^10 + x^6 + x + 1
    {1, 0, -1, -1},   // r=15: x^15 + x + 1
    {12, 3, 1, 0},    // r=16: x^16 + x^12 + x^3 + x + 1
    {3, 0, -1, -1},   // r=17: x^17 + x^3 + 1
    {7, 0, -1, -1},   // r=18: x^18 + x^7 + 1
    {5, 2, 1, 0},     // r=19: x^19 + x^5 + x^2 + x + 1
    {3, 0, -1, -1},   // r=20: x^20 + x^3 + 1
};

Eigen::MatrixXd zeros(int n) { return Eigen::MatrixXd::Zero(n, n); }

void check_grid(int n) {
    if (n < 1) throw std::invalid_argument("illumination: grid size must be >= 1");
}

void check_spacing(int n, int k) {
    check_grid(n);
    if (k < 1 || k > n) throw std::invalid_argument("illumination: need 1 <= k <= N");
}

}  // namespace

std::vector<std::uint8_t> mls_vector(int register_order) {
    if (register_order < 2 || register_order > 20)
        throw std::invalid_argument("mls_vector: register order must be in [2, 20]");

    std::uint32_t feedback_mask = 0;
    for (int e : kPolyLow[register_order - 2])
        if (e >= 0) feedback_mask |= 1u << e;

    const std::uint32_t length = (1u << register_order) - 1u;
    std::uint32_t state = length;  // all ones
    std::vector<std::uint8_t> seq(length);
    for (std::uint32_t i = 0; i < length; ++i) {
        seq[i] = static_cast<std::uint8_t>(state & 1u);
        std::uint32_t fb = static_cast<std::uint32_t>(std::popcount(state & feedback_mask)) & 1u;
        state = (state >> 1) | (fb << (register_order - 1));
    }
    return seq;
}

MaskSpec MaskSpec::mls(int register_order, double feature_pitch_mm) {
    auto bits = mls_vector(register_order);
    MaskSpec spec;
    spec.row_features.assign(bits.begin(), bits.end());
    spec.col_features = spec.row_features;
    spec.feature_pitch_mm = feature_pitch_mm;
    spec.kind = MaskKind::mls;
    spec.validate();
    return spec;
}

MaskSpec MaskSpec::pinhole(int features, int hole_index, double feature_pitch_mm) {
    if (features < 1) throw std::invalid_argument("pinhole mask: features must be >= 1");
    if (hole_index < 0 || hole_index >= features)
        throw std::invalid_argument("pinhole mask: hole index out of range");
    MaskSpec spec;
    spec.row_features.assign(static_cast<size_t>(features), 0.0);
    spec.row_features[static_cast<size_t>(hole_index)] = 1.0;
    spec.col_features = spec.row_features;
    spec.feature_pitch_mm = feature_pitch_mm;
    spec.kind = MaskKind::pinhole;
    spec.validate();
    return spec;
}

void MaskSpec::validate() const {
    if (row_features.empty() || col_features.empty())
        throw std::invalid_argument("mask: feature vectors must be nonempty");
    if (row_features.size() != col_features.size())
        throw std::invalid_argument("mask: feature vectors must have equal length");
    if (!(feature_pitch_mm > 0.0)) throw std::invalid_argument("mask: feature pitch must be > 0");
    auto binary = [](const std::vector<double>& v) {
        for (double x : v)
            if (x != 0.0 && x != 1.0) return false;
        return true;
    };
    if (!binary(row_features) || !binary(col_features))
        throw std::invalid_argument("mask: feature values must be 0 or 1");
    if (kind == MaskKind::pinhole) {
        auto ones = [](const std::vector<double>& v) {
            int c = 0;
            for (double x : v) c += (x == 1.0);
            return c;
        };
        if (ones(row_features) != 1 || ones(col_features) != 1)
            throw std::invalid_argument("pinhole mask: exactly one open feature per axis");
    }
}

const char* to_string(PatternFamily family) {
    switch (family) {
        case PatternFamily::uniform: return "uniform";
        case PatternFamily::random: return "random";
        case PatternFamily::shifting_dots: return "shifting_dots";
        case PatternFamily::shifting_lines: return "shifting_lines";
    }
    return "unknown";
}

IlluminationSequence uniform_sequence(int n) {
    check_grid(n);
    IlluminationSequence seq;
    seq.family = PatternFamily::uniform;
    seq.patterns.push_back(Eigen::MatrixXd::Ones(n, n));
    return seq;
}

IlluminationSequence random_sequence(int n, int count, std::uint64_t seed) {
    check_grid(n);
    if (count < 1) throw std::invalid_argument("illumination: pattern count must be >= 1");

    constexpr int kMaxAttempts = 64;
    std::mt19937_64 engine(seed);
    auto draw_bits = [&](Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) v[i] = static_cast<double>(engine() & 1u);
    };

    IlluminationSequence seq;
    seq.family = PatternFamily::random;
    seq.seed = seed;
    Eigen::VectorXd u(n), v(n);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        seq.patterns.clear();
        Eigen::MatrixXd cover = zeros(n);
        for (int i = 0; i < count; ++i) {
            draw_bits(u);
            draw_bits(v);
            Eigen::MatrixXd p = u * v.transpose();
            cover = cover.cwiseMax(p);
            seq.patterns.push_back(std::move(p));
        }
        if (cover.minCoeff() == 1.0) return seq;
    }
    throw std::invalid_argument(
        "random_sequence: coverage not achieved within retry bound; increase the pattern count");
}

IlluminationSequence shifting_dots_sequence(int n, int k) {
    check_spacing(n, k);
    IlluminationSequence seq;
    seq.family = PatternFamily::shifting_dots;
    seq.spacing = k;
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            Eigen::MatrixXd p = zeros(n);
            for (int i = a; i < n; i += k)
                for (int j = b; j < n; j += k) p(i, j) = 1.0;
            seq.patterns.push_back(std::move(p));
        }
    }
    return seq;
}

IlluminationSequence shifting_lines_sequence(int n, int k) {
    check_spacing(n, k);
    IlluminationSequence seq;
    seq.family = PatternFamily::shifting_lines;
    seq.spacing = k;
    for (int a = 0; a < k; ++a) {
        Eigen::MatrixXd p = zeros(n);
        for (int i = a; i < n; i += k) p.row(i).setOnes();
        seq.patterns.push_back(std::move(p));
    }
    for (int b = 0; b < k; ++b) {
        Eigen::MatrixXd p = zeros(n);
        for (int j = b; j < n; j += k) p.col(j).setOnes();
        seq.patterns.push_back(std::move(p));
    }
    return seq;
}

}  // namespace codedlens
