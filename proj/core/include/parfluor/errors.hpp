#pragma once

#include <stdexcept>
#include <string>

namespace parfluor {

/// Base of every error raised by the library. `kind()` gives a stable tag
/// that the CLI prints and maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PARFLUOR_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

PARFLUOR_DEFINE_ERROR(OutOfDispersionWindow);
PARFLUOR_DEFINE_ERROR(EvanescentMode);
PARFLUOR_DEFINE_ERROR(NoRealRoot);
PARFLUOR_DEFINE_ERROR(NoPhaseMatch);
PARFLUOR_DEFINE_ERROR(TotalInternalReflection);
PARFLUOR_DEFINE_ERROR(NotConverged);
PARFLUOR_DEFINE_ERROR(GridUnderresolved);
PARFLUOR_DEFINE_ERROR(InvalidArgument);
PARFLUOR_DEFINE_ERROR(ConfigError);
PARFLUOR_DEFINE_ERROR(IoError);

#undef PARFLUOR_DEFINE_ERROR

}  // namespace parfluor
