#pragma once

namespace textprint {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace textprint
