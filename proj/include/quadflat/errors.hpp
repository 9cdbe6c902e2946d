#pragma once

#include <stdexcept>
#include <string>

namespace quadflat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QUADFLAT_DEFINE_ERROR(Name)  \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

QUADFLAT_DEFINE_ERROR(NonSkewInput);
QUADFLAT_DEFINE_ERROR(DegenerateHeading);
QUADFLAT_DEFINE_ERROR(NotNearRotation);
QUADFLAT_DEFINE_ERROR(ZeroThrustSingularity);
QUADFLAT_DEFINE_ERROR(ZeroForceSingularity);
QUADFLAT_DEFINE_ERROR(FlipOverSingularity);
QUADFLAT_DEFINE_ERROR(OutOfDomain);
QUADFLAT_DEFINE_ERROR(NonConjugateClosure);
QUADFLAT_DEFINE_ERROR(UnstablePole);
QUADFLAT_DEFINE_ERROR(WrongOrder);
QUADFLAT_DEFINE_ERROR(NotALeader);
QUADFLAT_DEFINE_ERROR(MissingNeighbor);
QUADFLAT_DEFINE_ERROR(EmptyLog);
QUADFLAT_DEFINE_ERROR(ConfigError);

#undef QUADFLAT_DEFINE_ERROR

}  // namespace quadflat
