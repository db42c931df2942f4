#pragma once

namespace kanseq {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace kanseq
