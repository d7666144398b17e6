#pragma once

namespace ntrack {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace ntrack
