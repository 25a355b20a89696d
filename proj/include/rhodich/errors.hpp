#ifndef RHODICH_ERRORS_HPP
#define RHODICH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rhodich {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Rate inversion bracket grew past domain_hint * 2^10 (rate grows too slowly).
struct RateDivergenceError : Error {
    using Error::Error;
};

// Adaptive integrator step size underflowed on some interval.
struct StiffnessError : Error {
    StiffnessError(const std::string& msg, double t_lo, double t_hi)
        : Error(msg), interval_lo(t_lo), interval_hi(t_hi) {}
    double interval_lo, interval_hi;
};

struct ArgumentError : Error {
    using Error::Error;
};

// Lower bound of the norm-equivalence sandwich violated at (t, probe).
struct NormLowerBoundError : Error {
    NormLowerBoundError(const std::string& msg, double t_at, int probe)
        : Error(msg), t(t_at), probe_index(probe) {}
    double t;
    int probe_index;
};

// Restriction of T(s,t) to Ker P(t) is numerically singular.
struct InvertibilityError : Error {
    InvertibilityError(const std::string& msg, double cond)
        : Error(msg), condition_number(cond) {}
    double condition_number;
};

// A finite-time exponent fell inside the spectral dead zone (-eta, eta).
struct GapViolationError : Error {
    GapViolationError(const std::string& msg, double exp)
        : Error(msg), exponent(exp) {}
    double exponent;
};

// Stable and unstable bases are (numerically) not transversal.
struct DegenerateSplittingError : Error {
    using Error::Error;
};

struct NoDichotomyError : Error {
    using Error::Error;
};

// Forward supremand of the adapted norm still increasing at the truncation edge.
struct HorizonTooShortError : Error {
    using Error::Error;
};

// Picard iteration for the perturbed propagator failed to contract.
struct NonConvergenceError : Error {
    NonConvergenceError(const std::string& msg, double ratio)
        : Error(msg), last_contraction_ratio(ratio) {}
    double last_contraction_ratio;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace rhodich

#endif
