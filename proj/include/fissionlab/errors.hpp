#ifndef FISSIONLAB_ERRORS_HPP
#define FISSIONLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fissionlab {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FISSIONLAB_DEFINE_ERROR(NAME)                                  \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& msg) : Error(msg) {}          \
    }

FISSIONLAB_DEFINE_ERROR(ParameterError);       // invalid distribution / tuning parameter
FISSIONLAB_DEFINE_ERROR(DecompositionError);   // non-PSD covariance plugin
FISSIONLAB_DEFINE_ERROR(LabelError);           // missing / out-of-range conditional labels
FISSIONLAB_DEFINE_ERROR(NegativeCountError);   // count matrix with negative entries
FISSIONLAB_DEFINE_ERROR(InsufficientDataError);
FISSIONLAB_DEFINE_ERROR(DegenerateDataError);
FISSIONLAB_DEFINE_ERROR(ZeroVarianceError);
FISSIONLAB_DEFINE_ERROR(LengthMismatchError);
FISSIONLAB_DEFINE_ERROR(DimMismatchError);
FISSIONLAB_DEFINE_ERROR(RangeError);
FISSIONLAB_DEFINE_ERROR(DomainError);
FISSIONLAB_DEFINE_ERROR(ConvergenceError);
FISSIONLAB_DEFINE_ERROR(ParseError);
FISSIONLAB_DEFINE_ERROR(NegativeEntryError);
FISSIONLAB_DEFINE_ERROR(DuplicateIdError);
FISSIONLAB_DEFINE_ERROR(IOError);
FISSIONLAB_DEFINE_ERROR(ConfigError);

#undef FISSIONLAB_DEFINE_ERROR

// Wraps a failure inside the experiment harness with its grid location.
class PipelineError : public Error {
public:
    PipelineError(const std::string& stage, const std::string& where,
                  const std::string& msg)
        : Error("pipeline stage '" + stage + "' failed at " + where + ": " + msg),
          stage_(stage), where_(where) {}
    const std::string& stage() const { return stage_; }
    const std::string& where() const { return where_; }

private:
    std::string stage_;
    std::string where_;
};

} // namespace fissionlab

#endif
