#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace sloop {

enum class ErrorKind {
    Usage,
    Parse,
    Expression,
    DiscontinuousSegment,
    NotNormal,
    NotALoop,
    MultiplicityViolation,
    ContourHitsSpectrum,
    QuadratureNotConverged,
    NotHermitian,
    NegativeEigenvalue,
    SizeMismatch,
    PreconditionViolated,
    TooFar,
    NotIntertwining,
    RefineGrid,
    NoCertifiedClosure,
    TransportBreakdown,
    SpanDeficient,
    Condition1Missing,
    EmptySn,
    CannotSeparate,
    BoundViolated,
    SpectraMismatch,
    ChartTooCoarse,
    ClosureDefectNotDiagonal,
    NoFeasibleM,
    NotAContraction,
};

const char* kind_name(ErrorKind k);

// CLI exit status for each diagnostic class.
int exit_code(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what,
          std::optional<long> index = std::nullopt,
          std::optional<double> value = std::nullopt)
        : std::runtime_error(what), kind_(kind), index_(index), value_(value) {}

    ErrorKind kind() const { return kind_; }
    // grid index, position in an expression, or track id depending on kind
    std::optional<long> index() const { return index_; }
    std::optional<double> value() const { return value_; }

private:
    ErrorKind kind_;
    std::optional<long> index_;
    std::optional<double> value_;
};

} // namespace sloop
