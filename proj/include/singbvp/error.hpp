#pragma once

#include <stdexcept>
#include <string>

namespace singbvp {

enum class ErrorKind {
    Dimension,
    Domain,
    Range,
    Resonance,
    Containment,
    Decomposition,
    Consistency,
    Syntax,
    Invariant,
    UnsupportedDerivative,
    ConditionA,
    ConditionB,
    ConditionC,
    Structural,
    Degeneracy,
    NumericalFailure,
    Accuracy,
    Conditioning,
    Unsolvable,
    DichotomyQuality,
    Internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace singbvp
