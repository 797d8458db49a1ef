#pragma once

namespace wigner {
inline constexpr const char* kVersion = "0.1.0";
}
