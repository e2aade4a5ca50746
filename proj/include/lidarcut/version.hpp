#pragma once

namespace lidarcut {
inline constexpr const char* kVersion = "0.1.0";
}
