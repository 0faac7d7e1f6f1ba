#pragma once

namespace lprisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lprisk
