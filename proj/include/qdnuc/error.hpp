#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qdnuc {

enum class ErrorCode {
    kNonConverged,   // pulse-map fixed point iteration
    kNoConvergence,  // steady-state relaxation exceeded its time cap
    kBracketEscape,  // Overhauser shift left the search bracket
    kGridTooSmall,   // density reached the edge of the grid
    kCflViolation,   // explicit step or cell Peclet bound cannot be met
    kParseError,
    kValidationError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

/// Error raised by every module. Numeric failures carry the pulse delay at
/// which they occurred when it is known.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<double> tau = std::nullopt);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<double> tau() const noexcept { return tau_; }

    /// True for configuration problems (parse/validation), false for numeric ones.
    [[nodiscard]] bool is_config_error() const noexcept {
        return code_ == ErrorCode::kParseError || code_ == ErrorCode::kValidationError;
    }

    /// Copy of this error with the pulse delay attached.
    [[nodiscard]] Error at_tau(double tau) const;

private:
    ErrorCode code_;
    std::optional<double> tau_;
};

/// Throws a validation error when `ok` is false.
inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(ErrorCode::kValidationError, what);
    }
}

}  // namespace qdnuc
