#pragma once

namespace mixvar {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixvar
