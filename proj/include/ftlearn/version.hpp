#pragma once

namespace ftlearn {

inline constexpr const char* version = "0.1.0";

}  // namespace ftlearn
