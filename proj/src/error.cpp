#include "qdnuc/error.hpp"

#include <sstream>

namespace qdnuc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::kNonConverged: return "NON_CONVERGED";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kBracketEscape: return "BRACKET_ESCAPE";
    case ErrorCode::kGridTooSmall: return "GRID_TOO_SMALL";
    case ErrorCode::kCflViolation: return "CFL_VIOLATION";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kValidationError: return "VALIDATION_ERROR";
    }
    return "UNKNOWN";
}

namespace {

std::string with_tau(const std::string& message, std::optional<double> tau) {
    if (!tau) {
        return message;
    }
    std::ostringstream os;
    os << message << " (tau = " << *tau << " ns)";
    return os.str();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<double> tau)
    : std::runtime_error(with_tau(message, tau)), code_(code), tau_(tau) {}

Error Error::at_tau(double tau) const {
    if (tau_) {
        return *this;
    }
    return Error(code_, what(), tau);
}

}  // namespace qdnuc
