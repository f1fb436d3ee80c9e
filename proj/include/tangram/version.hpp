#pragma once

namespace tangram {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tangram
