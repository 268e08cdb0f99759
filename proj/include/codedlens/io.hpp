#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "codedlens/errors.hpp"

namespace codedlens {

// Stack container for volumes, measurement sets and pattern sequences:
//   magic "LLV1\n",
//   ASCII header "<count> <rows> <cols>\n",
//   count*rows*cols little-endian float64 values, plane-major, row-major.
void write_llv(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& planes);
std::vector<Eigen::MatrixXd> read_llv(const std::filesystem::path& path);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples); values map
// linearly from [lo, hi] onto [0, 65535], clamped.
void write_pgm16(const std::filesystem::path& path, const Eigen::MatrixXd& image, double lo,
                 double hi);

// Depth-map rendering: invalid pixels are written as 0, valid depths map
// linearly from [lo, hi] onto [1, 65535].
void write_depth_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& depth_cm,
                     const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& valid,
                     double lo_cm, double hi_cm);

// RFC 4180 CSV: fields containing commas, quotes or line breaks are quoted,
// rows end in CRLF.
std::string csv_escape(const std::string& field);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::uint64_t fnv1a64(std::string_view bytes);

// Flat "key = value" configuration text with '#' comments. Keeps line
// numbers for diagnostics and tracks key access so unknown keys can be
// reported.
class KeyValueConfig {
 public:
    static KeyValueConfig parse_file(const std::filesystem::path& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::uint64_t get_uint64_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    // Throws ConfigError naming the first accessed-but-unknown line.
    void ensure_all_keys_consumed() const;

    const std::string& origin() const { return origin_; }

 private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> consumed_;
    std::string origin_;

    const Entry& require(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

}  // namespace codedlens
