#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace codedlens {

// Maximum length sequence of 2^order - 1 bits from a Fibonacci LFSR.
// One primitive polynomial is pinned per order (order 9 uses x^9 + x^5 + 1)
// and the register is seeded with all ones, so the output is deterministic.
// Valid orders: 2..20.
std::vector<std::uint8_t> mls_vector(int register_order);

enum class MaskKind { mls, pinhole };

// Separable amplitude mask. The 2-D transmittance pattern is the outer
// product of the two binary feature vectors.
struct MaskSpec {
    std::vector<double> row_features;  // values in {0,1}
    std::vector<double> col_features;
    double feature_pitch_mm = 0.0;
    MaskKind kind = MaskKind::mls;

    static MaskSpec mls(int register_order, double feature_pitch_mm);
    // Opaque mask with a single open feature at hole_index.
    static MaskSpec pinhole(int features, int hole_index, double feature_pitch_mm);

    int features() const { return static_cast<int>(row_features.size()); }
    void validate() const;
};

enum class PatternFamily { uniform, random, shifting_dots, shifting_lines };

const char* to_string(PatternFamily family);

// Ordered set of N x N binary illumination patterns. Every generator below
// guarantees coverage: the elementwise maximum over the sequence is all ones.
struct IlluminationSequence {
    std::vector<Eigen::MatrixXd> patterns;  // entries in {0,1}
    PatternFamily family = PatternFamily::uniform;
    int spacing = 0;         // k, for the shifting families
    std::uint64_t seed = 0;  // random family only

    int count() const { return static_cast<int>(patterns.size()); }
    int grid_size() const {
        return patterns.empty() ? 0 : static_cast<int>(patterns.front().rows());
    }
};

// Single all-ones pattern.
IlluminationSequence uniform_sequence(int n);

// `count` outer products of independent Bernoulli(1/2) binary vectors; the
// whole sequence is redrawn until it covers the grid. Throws
// std::invalid_argument if coverage is not reached within the retry bound.
IlluminationSequence random_sequence(int n, int count, std::uint64_t seed);

// k^2 patterns; pattern (a, b) lights pixel (i, j) iff i = a and j = b mod k.
// The patterns partition the grid and sum to all ones.
IlluminationSequence shifting_dots_sequence(int n, int k);

// k row-line patterns (rows = a mod k) followed by k column-line patterns
// (columns = b mod k); 2k patterns total, summing to 2 everywhere.
IlluminationSequence shifting_lines_sequence(int n, int k);

}  // namespace codedlens
