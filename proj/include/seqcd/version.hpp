#pragma once

namespace seqcd {
inline constexpr const char* kVersion = "0.1.0";
}
