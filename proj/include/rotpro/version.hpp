#pragma once

namespace rotpro {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rotpro
