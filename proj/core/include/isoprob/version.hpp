#pragma once

namespace isoprob {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace isoprob
