#pragma once

#include <stdexcept>
#include <string>

namespace codedlens {

// Bad or inconsistent user configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / file-format failures. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
 public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown (divergence, non-finite objective). Maps to CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace codedlens
