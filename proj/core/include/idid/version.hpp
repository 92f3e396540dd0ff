#pragma once

namespace idid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace idid
