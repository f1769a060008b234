#pragma once

namespace netrisk {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace netrisk
