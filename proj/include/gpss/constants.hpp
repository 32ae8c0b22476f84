#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace gpss {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A named precondition or hypothesis violation (CLI exit code 2).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A solver failed to converge (CLI exit code 3).
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

/// Filesystem or serialization failure (CLI exit code 4).
class IoError : public Error {
  public:
    using Error::Error;
};

/// Problem definition for the radial equation
///   u'' + (d-1)/r u' - (r^2 - lambda) u + |u|^{q-1}u + |u|^{p-1}u = 0.
///
/// q absent drops the |u|^{q-1}u term. linear_mode zeroes both nonlinear
/// terms, turning the equation into the harmonic-oscillator problem whose
/// ground state e^{-r^2/2} at lambda = d serves as an exact test oracle.
struct ProblemParams {
    int d = 5;
    double p = 3.0;
    std::optional<double> q{};
    std::optional<double> lambda{};
    bool linear_mode = false;

    bool operator==(const ProblemParams&) const = default;
};

/// Closed-form constants derived from (d, p).
struct DerivedConstants {
    double A;       ///< leading origin amplitude, A^{p-1} = alpha (d-2-alpha)
    double alpha;   ///< 2/(p-1)
    double sigma;   ///< d/2 - 2/(p-1)
    double beta;    ///< (p+1)/2
    double omega;   ///< sqrt(|(d-2)^2 - 4 p A^{p-1}|)
    double p_jl;    ///< Joseph-Lundgren exponent (+inf for d <= 10)
    double lambda1; ///< first eigenvalue of -Laplacian + r^2, equals d
    double m;       ///< {alpha (d-2-alpha)}^{-1/2}
    double mu;      ///< m (d-2-2 alpha)
    /// Exponent of the leading origin correction of the singular solution:
    /// 2(p-q)/(p-1), or 2 when q is absent.
    double origin_correction_exponent;
    /// True when the discriminant (d-2)^2 - 4 p A^{p-1} is negative, i.e.
    /// p < p_JL and the origin modes oscillate in log r.
    bool oscillatory;
    /// Oscillation frequency per unit log r of the origin/tail modes.
    /// The indicial roots of phi'' + (d-1)/r phi' + p A^{p-1}/r^2 phi = 0
    /// are -(d-2)/2 +- i omega/2, so this equals omega / 2.
    double mode_frequency;
};

/// Joseph-Lundgren exponent: +inf for d <= 10, 1 + 4/(d-4-2 sqrt(d-1))
/// for d >= 11. Throws ValidationError for d < 3.
double joseph_lundgren(int d);

/// Populate every derived constant from validated params.
/// Throws ValidationError when d-2-alpha <= 0 (A undefined).
DerivedConstants derive_constants(const ProblemParams& params);

enum class ValidationMode {
    basic,   ///< d >= 3, p > 1, q > 1 only
    strict,  ///< full hypothesis set: (d+2)/(d-2) < p < p_JL(d),
             ///< 1 < q < min((p+1)/2, p), and 0 < lambda < d when given
};

/// Check params against the requested mode and return them unchanged.
/// Each violated condition throws a ValidationError naming the violated
/// inequality. Idempotent.
ProblemParams validate(const ProblemParams& params, ValidationMode mode);

/// Flat JSON round-trip (keys d, p, q, lambda, linear_mode; a missing key
/// is an absent optional field).
std::string params_to_json(const ProblemParams& params);
ProblemParams params_from_json(const std::string& text);

} // namespace gpss
