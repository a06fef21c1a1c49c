#pragma once

namespace uep {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uep
