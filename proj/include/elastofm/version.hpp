#pragma once

#include <string>

namespace elastofm {

inline std::string version_string() { return "elastofm 0.1.0"; }

}  // namespace elastofm
