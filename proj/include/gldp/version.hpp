#pragma once

namespace gldp {
inline constexpr const char* kVersion = "0.1.0";
}
