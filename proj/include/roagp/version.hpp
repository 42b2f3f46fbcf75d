#pragma once

namespace roagp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace roagp
