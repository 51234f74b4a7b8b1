#pragma once

namespace phi_sentinel {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr int kModelFormatVersion = 1;

}  // namespace phi_sentinel
