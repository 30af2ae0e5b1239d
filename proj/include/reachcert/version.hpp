#pragma once

namespace reachcert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace reachcert
