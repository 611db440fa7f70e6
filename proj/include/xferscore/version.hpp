#pragma once

namespace xfer {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xfer
