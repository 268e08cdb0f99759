#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "codedlens/io.hpp"
#include "test_support.hpp"

using namespace codedlens;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "codedlens_io_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("llv round trip") {
    auto dir = temp_dir();
    std::uint64_t state = 12;
    std::vector<Eigen::MatrixXd> planes;
    for (int k = 0; k < 3; ++k) planes.push_back(random_matrix(5, 7, state));
    planes[1](2, 3) = -4.75;  // negatives survive

    const auto path = dir / "roundtrip.llv";
    write_llv(path, planes);
    auto loaded = read_llv(path);
    REQUIRE(loaded.size() == 3);
    for (size_t k = 0; k < 3; ++k) CHECK(loaded[k] == planes[k]);

    SUBCASE("header carries count rows cols") {
        const std::string bytes = slurp(path);
        CHECK(bytes.substr(0, 5) == "LLV1\n");
        CHECK(bytes.substr(5, 6) == "3 5 7\n");
        CHECK(bytes.size() == 5 + 6 + 3 * 5 * 7 * 8);
    }
}

TEST_CASE("llv format diagnostics") {
    auto dir = temp_dir();

    SUBCASE("bad magic") {
        const auto path = dir / "bad_magic.llv";
        std::ofstream(path, std::ios::binary) << "NOPE\n1 1 1\n";
        CHECK_THROWS_AS(read_llv(path), IoError);
    }
    SUBCASE("truncated payload") {
        const auto path = dir / "short.llv";
        std::ofstream(path, std::ios::binary) << "LLV1\n1 2 2\nxx";
        CHECK_THROWS_AS(read_llv(path), IoError);
    }
    SUBCASE("trailing bytes") {
        const auto path = dir / "long.llv";
        write_llv(path, {Eigen::MatrixXd::Zero(2, 2)});
        std::ofstream(path, std::ios::binary | std::ios::app) << "junk";
        CHECK_THROWS_AS(read_llv(path), IoError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_llv(dir / "absent.llv"), IoError); }
    SUBCASE("malformed header") {
        const auto path = dir / "header.llv";
        std::ofstream(path, std::ios::binary) << "LLV1\n1 2\n";
        CHECK_THROWS_AS(read_llv(path), IoError);
    }
}

TEST_CASE("pgm output") {
    auto dir = temp_dir();
    Eigen::MatrixXd img(2, 3);
    img << 0.0, 0.5, 1.0, 1.5, -1.0, 0.25;
    const auto path = dir / "img.pgm";
    write_pgm16(path, img, 0.0, 1.0);
    const std::string bytes = slurp(path);
    CHECK(bytes.substr(0, 3) == "P5\n");
    CHECK(bytes.find("3 2\n65535\n") != std::string::npos);
    const size_t header = bytes.find("65535\n") + 6;
    CHECK(bytes.size() - header == 2 * 3 * 2);
    // Clamped entries hit the rails.
    auto sample = [&](int index) {
        return (static_cast<unsigned char>(bytes[header + 2 * index]) << 8) |
               static_cast<unsigned char>(bytes[header + 2 * index + 1]);
    };
    CHECK(sample(0) == 0);
    CHECK(sample(2) == 65535);
    CHECK(sample(3) == 65535);  // 1.5 clamps
    CHECK(sample(4) == 0);      // -1.0 clamps
}

TEST_CASE("csv escaping") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("with,comma") == "\"with,comma\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");

    auto dir = temp_dir();
    const auto path = dir / "table.csv";
    write_csv(path, {"a", "b"}, {{"1", "x,y"}, {"2", "z"}});
    CHECK(slurp(path) == "a,b\r\n1,\"x,y\"\r\n2,z\r\n");
}

TEST_CASE("key-value config parsing") {
    SUBCASE("values, comments and access") {
        auto config = KeyValueConfig::parse_string(
            "# leading comment\n"
            "alpha = 3.5\n"
            "name = hello world # trailing comment\n"
            "count = 42\n"
            "flag = true\n",
            "test.cfg");
        CHECK(config.get_double("alpha") == 3.5);
        CHECK(config.get_string("name") == "hello world");
        CHECK(config.get_int("count") == 42);
        CHECK(config.get_bool_or("flag", false));
        CHECK(config.get_int_or("absent", 7) == 7);
        config.ensure_all_keys_consumed();
    }
    SUBCASE("missing equals sign names the line") {
        try {
            KeyValueConfig::parse_string("alpha = 1\nbroken line\n", "bad.cfg");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
        }
    }
    SUBCASE("duplicate keys are rejected") {
        CHECK_THROWS_AS(KeyValueConfig::parse_string("a = 1\na = 2\n"), ConfigError);
    }
    SUBCASE("type errors name the line") {
        auto config = KeyValueConfig::parse_string("alpha = notanumber\n", "types.cfg");
        try {
            config.get_double("alpha");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("types.cfg:1") != std::string::npos);
        }
    }
    SUBCASE("unconsumed keys are reported with their line") {
        auto config = KeyValueConfig::parse_string("known = 1\nmystery = 2\n", "extra.cfg");
        CHECK(config.get_int("known") == 1);
        try {
            config.ensure_all_keys_consumed();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find("extra.cfg:2") != std::string::npos);
            CHECK(what.find("mystery") != std::string::npos);
        }
    }
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
    CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}
