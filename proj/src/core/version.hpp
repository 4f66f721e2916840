#pragma once

#include <string_view>

namespace ispi {

inline constexpr std::string_view kToolName = "ispi";
inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace ispi
