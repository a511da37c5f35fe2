#pragma once

namespace camtrap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace camtrap
