#include "parfluor/version.hpp"

namespace parfluor {

std::string_view version() { return PARFLUOR_VERSION; }

}  // namespace parfluor
