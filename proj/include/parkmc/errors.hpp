#pragma once

#include <stdexcept>
#include <string>

namespace parkmc {

/// Base of every error raised by the library. `kind()` is a stable
/// identifier used in machine-readable CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PARKMC_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

PARKMC_DEFINE_ERROR(NonDividingWidth);
PARKMC_DEFINE_ERROR(WidthTooSmall);
PARKMC_DEFINE_ERROR(WrongMoveKind);
PARKMC_DEFINE_ERROR(StateSpaceTooLarge);
PARKMC_DEFINE_ERROR(NotConverged);
PARKMC_DEFINE_ERROR(InfiniteEPR);
PARKMC_DEFINE_ERROR(SupportViolation);
PARKMC_DEFINE_ERROR(TooManyPaths);
PARKMC_DEFINE_ERROR(AtanhDomain);
PARKMC_DEFINE_ERROR(ZeroReverseRate);
PARKMC_DEFINE_ERROR(UnavailableTransitionProbability);
PARKMC_DEFINE_ERROR(IncompatibleReports);
PARKMC_DEFINE_ERROR(ConfigError);

#undef PARKMC_DEFINE_ERROR

}  // namespace parkmc
