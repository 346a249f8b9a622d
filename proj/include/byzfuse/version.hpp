#pragma once

namespace byzfuse {
inline constexpr const char *kVersion = "0.3.0";
}
