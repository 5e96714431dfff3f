#pragma once

namespace gsa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gsa
