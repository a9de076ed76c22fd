#include "spectral_loop/errors.hpp"

namespace sloop {

const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::Usage: return "Usage";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Expression: return "ExpressionError";
    case ErrorKind::DiscontinuousSegment: return "DiscontinuousSegment";
    case ErrorKind::NotNormal: return "NotNormal";
    case ErrorKind::NotALoop: return "NotALoop";
    case ErrorKind::MultiplicityViolation: return "MultiplicityViolation";
    case ErrorKind::ContourHitsSpectrum: return "ContourHitsSpectrum";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::TooFar: return "TooFar";
    case ErrorKind::NotIntertwining: return "NotIntertwining";
    case ErrorKind::RefineGrid: return "RefineGrid";
    case ErrorKind::NoCertifiedClosure: return "NoCertifiedClosure";
    case ErrorKind::TransportBreakdown: return "TransportBreakdown";
    case ErrorKind::SpanDeficient: return "SpanDeficient";
    case ErrorKind::Condition1Missing: return "Condition1Missing";
    case ErrorKind::EmptySn: return "EmptySn";
    case ErrorKind::CannotSeparate: return "CannotSeparate";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::SpectraMismatch: return "SpectraMismatch";
    case ErrorKind::ChartTooCoarse: return "ChartTooCoarse";
    case ErrorKind::ClosureDefectNotDiagonal: return "ClosureDefectNotDiagonal";
    case ErrorKind::NoFeasibleM: return "NoFeasibleM";
    case ErrorKind::NotAContraction: return "NotAContraction";
    }
    return "Unknown";
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Parse:
    case ErrorKind::Expression:
    case ErrorKind::DiscontinuousSegment: return 2;
    case ErrorKind::NotNormal: return 3;
    case ErrorKind::RefineGrid: return 4;
    case ErrorKind::MultiplicityViolation: return 5;
    case ErrorKind::SpectraMismatch: return 6;
    case ErrorKind::NoFeasibleM: return 7;
    case ErrorKind::BoundViolated: return 8;
    case ErrorKind::Condition1Missing: return 9;
    case ErrorKind::ChartTooCoarse: return 10;
    case ErrorKind::NoCertifiedClosure: return 11;
    case ErrorKind::TransportBreakdown: return 12;
    default: return 13;
    }
}

} // namespace sloop
