#pragma once

#include <stdexcept>
#include <string>

namespace heatflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HEATFLOW_ERROR(Name)                   \
    class Name : public Error {                \
    public:                                    \
        explicit Name(const std::string& what) \
            : Error(#Name ": " + what) {}      \
    }

HEATFLOW_ERROR(InvalidArgument);
HEATFLOW_ERROR(ExtendedRange);
HEATFLOW_ERROR(NoConvergence);
HEATFLOW_ERROR(CollisionDetected);
HEATFLOW_ERROR(CollisionUnresolved);
HEATFLOW_ERROR(ZeroPoint);
HEATFLOW_ERROR(AmbiguousMatch);
HEATFLOW_ERROR(InsufficientSamples);
HEATFLOW_ERROR(PoleHit);
HEATFLOW_ERROR(GridMismatch);
HEATFLOW_ERROR(NonpositiveMean);
HEATFLOW_ERROR(Overflow);
HEATFLOW_ERROR(StencilIllConditioned);
HEATFLOW_ERROR(ConfigInvalid);
HEATFLOW_ERROR(ParseError);

#undef HEATFLOW_ERROR

}  // namespace heatflow
