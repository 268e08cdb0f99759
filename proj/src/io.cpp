#include "codedlens/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace codedlens {

namespace {

void write_f64_le(std::ostream& out, double value) {
    static_assert(sizeof(double) == 8);
    unsigned char bytes[8];
    std::memcpy(bytes, &value, 8);
    // Host is little-endian on every supported target; keep the check cheap.
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    double value;
    std::memcpy(&value, bytes, 8);
    return value;
}

std::uint16_t quantize16(double value, double lo, double hi, int floor_level) {
    const double span = hi - lo;
    double t = span > 0.0 ? (value - lo) / span : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double top = 65535.0;
    return static_cast<std::uint16_t>(std::lround(floor_level + t * (top - floor_level)));
}

void write_pgm16_raw(const std::filesystem::path& path,
                     const Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic>& levels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P5\n" << levels.cols() << " " << levels.rows() << "\n65535\n";
    for (Eigen::Index r = 0; r < levels.rows(); ++r) {
        for (Eigen::Index c = 0; c < levels.cols(); ++c) {
            const std::uint16_t v = levels(r, c);
            const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                            static_cast<unsigned char>(v & 0xFF)};
            out.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void write_llv(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& planes) {
    if (planes.empty()) throw IoError("llv: refusing to write an empty stack");
    const auto rows = planes.front().rows();
    const auto cols = planes.front().cols();
    for (const auto& p : planes)
        if (p.rows() != rows || p.cols() != cols)
            throw IoError("llv: planes must share one shape");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "LLV1\n" << planes.size() << " " << rows << " " << cols << "\n";
    for (const auto& p : planes)
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) write_f64_le(out, p(r, c));
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Eigen::MatrixXd> read_llv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());

    std::string magic;
    std::getline(in, magic);
    if (magic != "LLV1") throw IoError("llv: bad magic in " + path.string());

    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    long long count = 0, rows = 0, cols = 0;
    if (!(hs >> count >> rows >> cols) || count < 1 || rows < 1 || cols < 1)
        throw IoError("llv: malformed header '" + header + "' in " + path.string());
    std::string extra;
    if (hs >> extra) throw IoError("llv: malformed header '" + header + "' in " + path.string());

    std::vector<Eigen::MatrixXd> planes(static_cast<size_t>(count));
    for (auto& p : planes) {
        p.resize(rows, cols);
        for (long long r = 0; r < rows; ++r)
            for (long long c = 0; c < cols; ++c) p(r, c) = read_f64_le(in);
    }
    if (!in) throw IoError("llv: truncated payload in " + path.string());
    in.peek();
    if (!in.eof()) throw IoError("llv: trailing bytes in " + path.string());
    return planes;
}

void write_pgm16(const std::filesystem::path& path, const Eigen::MatrixXd& image, double lo,
                 double hi) {
    Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> levels(image.rows(),
                                                                        image.cols());
    for (Eigen::Index r = 0; r < image.rows(); ++r)
        for (Eigen::Index c = 0; c < image.cols(); ++c)
            levels(r, c) = quantize16(image(r, c), lo, hi, 0);
    write_pgm16_raw(path, levels);
}

void write_depth_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& depth_cm,
                     const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& valid,
                     double lo_cm, double hi_cm) {
    Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> levels(depth_cm.rows(),
                                                                        depth_cm.cols());
    for (Eigen::Index r = 0; r < depth_cm.rows(); ++r)
        for (Eigen::Index c = 0; c < depth_cm.cols(); ++c)
            levels(r, c) = valid(r, c) ? quantize16(depth_cm(r, c), lo_cm, hi_cm, 1) : 0;
    write_pgm16_raw(path, levels);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char ch : field) {
        if (ch == '"') quoted += "\"\"";
        else quoted += ch;
    }
    quoted += '"';
    return quoted;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    auto write_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << "\r\n";
    };
    write_row(header);
    for (const auto& row : rows) write_row(row);
    if (!out) throw IoError("write failed: " + path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001B3ull;
    }
    return hash;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path.string());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig config;
    config.origin_ = origin.empty() ? "<config>" : origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // '#' starts a comment at line start or after whitespace.
        size_t cut = std::string::npos;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                cut = i;
                break;
            }
        }
        std::string body = trim(cut == std::string::npos ? line : line.substr(0, cut));
        if (body.empty()) continue;
        size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(config.origin_ + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(config.origin_ + ":" + std::to_string(line_no) + ": empty key");
        if (config.entries_.count(key))
            throw ConfigError(config.origin_ + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        config.entries_[key] = Entry{value, line_no};
    }
    return config;
}

bool KeyValueConfig::has(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    consumed_.insert(key);
    return true;
}

const KeyValueConfig::Entry& KeyValueConfig::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": key '" + key + "' " + what);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    return require(key).value;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
    return has(key) ? require(key).value : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const auto& entry = require(key);
    try {
        size_t used = 0;
        double v = std::stod(entry.value, &used);
        if (used != entry.value.size()) fail(key, "is not a number: '" + entry.value + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "is not a number: '" + entry.value + "'");
    }
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const auto& entry = require(key);
    try {
        size_t used = 0;
        long long v = std::stoll(entry.value, &used);
        if (used != entry.value.size()) fail(key, "is not an integer: '" + entry.value + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "is not an integer: '" + entry.value + "'");
    }
}

long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint64_or(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& entry = require(key);
    try {
        size_t used = 0;
        unsigned long long v = std::stoull(entry.value, &used);
        if (used != entry.value.size()) fail(key, "is not an unsigned integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "is not an unsigned integer: '" + entry.value + "'");
    }
}

bool KeyValueConfig::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = require(key).value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "is not a boolean: '" + v + "'");
}

void KeyValueConfig::ensure_all_keys_consumed() const {
    for (const auto& [key, entry] : entries_) {
        if (!consumed_.count(key))
            throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                              key + "'");
    }
}

}  // namespace codedlens
