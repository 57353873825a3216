#pragma once

#include <stdexcept>
#include <string>

namespace mosb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct DegreeOverflow : Error { using Error::Error; };
struct PartitionOverflow : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct InfeasibleAtCap : Error { using Error::Error; };
struct NoBoundAvailable : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct LPInfeasible : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };

}  // namespace mosb
