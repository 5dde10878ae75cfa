#include "osc/error.hpp"

namespace osc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::EmptyMask: return "EmptyMask";
        case ErrorKind::DegenerateMask: return "DegenerateMask";
        case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
        case ErrorKind::DegenerateCurve: return "DegenerateCurve";
        case ErrorKind::UndefinedMetric: return "UndefinedMetric";
        case ErrorKind::DivergenceDetected: return "DivergenceDetected";
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::CorruptFile: return "CorruptFile";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

bool is_numerical(ErrorKind kind) noexcept {
    return kind == ErrorKind::NonFiniteValue || kind == ErrorKind::DivergenceDetected;
}

}  // namespace osc
