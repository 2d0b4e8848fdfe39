#pragma once

#include <stdexcept>
#include <string>

namespace qshedge {

/// Error codes carried by every qshedge::Error. Grouped by the surface that
/// raises them; the CLI maps validation-type codes to exit 1 and
/// numerical/internal codes to exit 2.
enum class Errc {
    // tree validation
    DuplicateId,
    OrphanNode,
    TimeSkew,
    ChildlessInterior,
    NonFinitePrice,
    // tree lookups
    UnknownLeaf,
    UnknownNode,
    MissingStrategyNode,
    // model / instance validation
    InvalidModel,
    InvalidClaim,
    EmptySupport,
    InconsistentInstance,
    // generators
    InfeasibleInterval,
    NoViableModel,
    // solvers
    NumericalFailure,
    TooLarge,
    // I/O
    ParseError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::OrphanNode: return "OrphanNode";
    case Errc::TimeSkew: return "TimeSkew";
    case Errc::ChildlessInterior: return "ChildlessInterior";
    case Errc::NonFinitePrice: return "NonFinitePrice";
    case Errc::UnknownLeaf: return "UnknownLeaf";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::MissingStrategyNode: return "MissingStrategyNode";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::InvalidClaim: return "InvalidClaim";
    case Errc::EmptySupport: return "EmptySupport";
    case Errc::InconsistentInstance: return "InconsistentInstance";
    case Errc::InfeasibleInterval: return "InfeasibleInterval";
    case Errc::NoViableModel: return "NoViableModel";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Returns true for failures of user-supplied data (reject the input) as
/// opposed to internal/numerical breakdowns (retry or fall back).
inline bool is_validation_error(Errc c) {
    return c != Errc::NumericalFailure && c != Errc::TooLarge;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace qshedge
