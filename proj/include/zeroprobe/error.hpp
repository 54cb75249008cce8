#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zeroprobe {

enum class ErrorKind {
    Parse,
    Validation,
    UnknownStimulus,
    SpanMismatch,
    NonFiniteLogprob,
    DuplicateRecord,
    EmptyMainClause,
    IncompleteScores,
    SingularDesign,
    NonConvergence,
    NotNested,
    CriterionMismatch,
    NotReml,
    InvalidContrast,
    MissingCell,
    EmptyReport,
    Config,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace zeroprobe
