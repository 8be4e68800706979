#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FPP_DEFINE_ERROR(Name)       \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

FPP_DEFINE_ERROR(InvalidSpec);
FPP_DEFINE_ERROR(EmptyBoundary);
FPP_DEFINE_ERROR(BadRemovedSet);
FPP_DEFINE_ERROR(OutOfWindow);
FPP_DEFINE_ERROR(Disconnected);
FPP_DEFINE_ERROR(NoCrossing);
FPP_DEFINE_ERROR(Uncertified);
FPP_DEFINE_ERROR(NotBoundaryVertices);
FPP_DEFINE_ERROR(NegativeValue);
FPP_DEFINE_ERROR(UnboundedSupport);
FPP_DEFINE_ERROR(HypothesisViolated);
FPP_DEFINE_ERROR(BadInputs);
FPP_DEFINE_ERROR(ConfigError);
FPP_DEFINE_ERROR(MissingData);
FPP_DEFINE_ERROR(InvariantViolation);

#undef FPP_DEFINE_ERROR

}  // namespace fpp
