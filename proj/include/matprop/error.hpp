#pragma once

#include <stdexcept>
#include <string>

namespace matprop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MATPROP_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& what) : Error(what) {}     \
    }

// algebra
MATPROP_DEFINE_ERROR(ZeroInverse);
MATPROP_DEFINE_ERROR(ConvergenceFailure);
MATPROP_DEFINE_ERROR(ZeroMatrix);
MATPROP_DEFINE_ERROR(ShapeMismatch);
MATPROP_DEFINE_ERROR(InvalidArgument);

// oracle access
MATPROP_DEFINE_ERROR(AlreadyRead);
MATPROP_DEFINE_ERROR(NonAdaptivityViolation);
MATPROP_DEFINE_ERROR(BudgetExceeded);
MATPROP_DEFINE_ERROR(IndexOutOfRange);

// testers and estimators
MATPROP_DEFINE_ERROR(OutOfRange);
MATPROP_DEFINE_ERROR(MaskNotStaircase);
MATPROP_DEFINE_ERROR(NotFullRankBase);
MATPROP_DEFINE_ERROR(EmptyPool);
MATPROP_DEFINE_ERROR(InsufficientSketch);
MATPROP_DEFINE_ERROR(TooLarge);

// harness
MATPROP_DEFINE_ERROR(ConfigError);
MATPROP_DEFINE_ERROR(FormatError);

#undef MATPROP_DEFINE_ERROR

}  // namespace matprop
