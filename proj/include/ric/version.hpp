#pragma once

namespace ric {

inline constexpr const char* kToolName = "ric-toolkit";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace ric
