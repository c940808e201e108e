#pragma once

namespace nowcast {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace nowcast
