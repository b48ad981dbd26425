#pragma once

#include <stdexcept>
#include <string>

namespace sphlab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPHLAB_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

SPHLAB_DEFINE_ERROR(InvalidArgumentError);
SPHLAB_DEFINE_ERROR(EvaluationDomainError);
SPHLAB_DEFINE_ERROR(DegenerateFunctionError);
SPHLAB_DEFINE_ERROR(UnknownFamilyError);
SPHLAB_DEFINE_ERROR(DegenerateTargetError);
SPHLAB_DEFINE_ERROR(ResolutionTooLowError);
SPHLAB_DEFINE_ERROR(AreaBoundViolatedError);
SPHLAB_DEFINE_ERROR(InsufficientMeasureError);
SPHLAB_DEFINE_ERROR(DegenerateSetError);
SPHLAB_DEFINE_ERROR(ScheduleTooShortError);
SPHLAB_DEFINE_ERROR(NotConcentratedError);
SPHLAB_DEFINE_ERROR(ParameterRangeError);
SPHLAB_DEFINE_ERROR(OutsideDiskError);
SPHLAB_DEFINE_ERROR(HypothesisViolatedError);

#undef SPHLAB_DEFINE_ERROR

}  // namespace sphlab
