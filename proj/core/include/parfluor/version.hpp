#pragma once

#include <string_view>

namespace parfluor {

/// Library version, recorded in every run manifest.
std::string_view version();

}  // namespace parfluor
