#pragma once

namespace tg {

inline constexpr const char* tool_version = "1.0.0";

}  // namespace tg
