#pragma once

namespace codedlens {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace codedlens
