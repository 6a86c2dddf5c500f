#pragma once

#define SEMIFLOW_VERSION "0.1.0"

namespace semiflow {
inline constexpr const char* version = SEMIFLOW_VERSION;
}
