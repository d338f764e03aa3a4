#pragma once

namespace junctiongen {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace junctiongen
