#pragma once

namespace escalate {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace escalate
