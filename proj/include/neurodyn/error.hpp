#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace neurodyn {

enum class Errc {
    DimensionMismatch,
    InvalidArgument,
    NonSymmetric,
    NotPositiveDefinite,
    NonPositiveGamma,
    DaeNotIntegrable,
    FactorizationFailed,
    NonFiniteState,
    UnsupportedKind,
    NotUnique,
    InsufficientData,
    NotSettled,
    Io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    // NonFiniteState only: simulated time (seconds) of the offending step.
    Error(Errc code, const std::string& what, double at_time)
        : std::runtime_error(what), code_(code), at_time_(at_time) {}

    Errc code() const noexcept { return code_; }
    std::optional<double> at_time() const noexcept { return at_time_; }

private:
    Errc code_;
    std::optional<double> at_time_;
};

}  // namespace neurodyn
