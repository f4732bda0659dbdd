#pragma once

namespace bbr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bbr
