#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpss/constants.hpp"
#include "gpss/integrate.hpp"

namespace gpss {

class WindowTooShortError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Least-squares fit of y = amplitude * sin(frequency * log r + phase) + offset.
struct SinFit {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0; ///< in [0, 2pi)
    double offset = 0.0;
    double residual_rms = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
};

/// Nonlinear least squares with the frequency free: coarse scan around the
/// hint (a broad band when absent), linear solve for the in-phase/quadrature
/// amplitudes at each trial frequency, then parabolic refinement.
/// Requires >= 32 samples spanning >= 3 periods at the hinted frequency;
/// throws WindowTooShortError otherwise.
SinFit fit_log_sinusoid(std::span<const double> r, std::span<const double> y,
                        std::optional<double> frequency_hint = {});

/// Log-log linear regression y ~ coefficient * x^exponent.
struct PowerFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double residual_rms = 0.0;
    double r2 = 0.0;
    int points = 0;
};

PowerFit fit_power(std::span<const double> x, std::span<const double> y);

/// Decaying tail rebuilt by backward relaxation: the asymptotic form
/// u = e^{-R^2/2} R^{(lambda-d)/2} seeds a backward integration from r_far
/// (where the growing mode dies off backward), which is then scale-matched
/// to the forward profile at r_match = sqrt(lambda)+1. The forward tail
/// itself is unusable past r ~ sqrt(lambda)+2: accumulated integration
/// error is amplified by e^{+r^2/2}.
struct TailSamples {
    std::vector<double> r, u, du;
    double r_match = 0.0;
    double scale = 0.0;
    double du_mismatch = 0.0; ///< relative u' mismatch at r_match (glue quality)
};

TailSamples relax_tail(const Profile& prof, const ProblemParams& params,
                       double lambda, double r_far = 10.0);

/// Far-field diagnostics E/Psi with E = r Psi' + 2 r^2 Psi, Psi = e^{-r^2/2} u.
/// Identically E/Psi = r u'/u + r^2. Plateaus are read off by extrapolating
/// value(r) = a + b/r^2 + c/r^4 over the tail window; the direct median
/// carries an O(1/r^2) truncation too large for the targets at reachable
/// radii.
struct FarField {
    std::vector<double> r;
    std::vector<double> e_over_psi;
    std::vector<double> plateau2_series; ///< r^2 (E/Psi - (lambda-d)/2)
    double plateau1 = 0.0;               ///< extrapolated limit of E/Psi
    double plateau2 = 0.0;               ///< extrapolated limit of the series
    double plateau1_median = 0.0;        ///< last-half-decade median (diagnostic)
    double drift1 = 0.0;                 ///< residual drift after extrapolation
    double drift2 = 0.0;
    bool no_plateau = false; ///< drift > 10%: values still returned
    double window_lo = 0.0, window_hi = 0.0;
};

FarField far_field_diagnostics(const Profile& prof, double lambda,
                               const ProblemParams& params, double r_far = 10.0);

struct KayResult {
    double K = 0.0;
    double drift = 0.0; ///< residual drift of the extrapolation fit
    bool no_plateau = false;
};

/// Far-field constant of u ~ K e^{-r^2/2} r^{(lambda-d)/2}.
KayResult extract_K(const Profile& prof, double lambda, const ProblemParams& params,
                    double r_far = 10.0);

/// Kernel solution psi of the linearization around Phi,
///   psi'' + (d-1)/r psi' - (r^2 - lambda*) psi + (p Phi^{p-1} + q Phi^{q-1}) psi = 0,
/// integrated backward from R_start with the decaying seed (K = 1), then
/// resampled onto an ascending log grid. linear_mode params drop the
/// Phi-potential (the equation then has the Hermite ground state at
/// lambda* = d). Requires R_start >= sqrt(lambda*) + 2 and Phi covering
/// [Phi.r_min(), R_start].
Profile kernel_psi1(double lambda_star, const Profile& phi, double r_start,
                    const ProblemParams& params, const Tol& tol = {1e-12, 0.0});

/// An independent second kernel solution, launched forward from r_lo with
/// cosine-mode initial data. Certifies independence through the Wronskian.
Profile kernel_second(double lambda_star, const Profile& phi, double r_lo,
                      double r_hi, const ProblemParams& params,
                      const Tol& tol = {1e-12, 0.0});

struct WronskianResult {
    std::vector<double> r;
    std::vector<double> w; ///< f' g - g' f
    double median_w_rd = 0.0;     ///< median of W r^{d-1}
    double max_rel_dev = 0.0;     ///< max relative deviation of W r^{d-1} from it
};

/// Wronskian on the overlap of the two grids (dense interpolation).
/// Throws on disjoint grids.
WronskianResult wronskian(const Profile& f, const Profile& g);

/// Exact Euler-type modes of phi'' + (d-1)/r phi' + p A^{p-1}/r^2 phi = 0.
/// The indicial roots are -(d-2)/2 +- i nu with nu = mode_frequency =
/// sqrt(4 p A^{p-1} - (d-2)^2)/2, so
///   phi1 = sin(nu log r) / r^{(d-2)/2},  phi2 = cos(nu log r) / r^{(d-2)/2},
/// and W(phi1, phi2) r^{d-1} = nu.
struct EulerModes {
    double phi1, phi2;
    double dphi1, dphi2;
};

EulerModes euler_modes(double r, const ProblemParams& params);

/// Scaling-mode identity for the profile operator H = -Lap - p Q^{p-1}:
/// Lambda Q = (2/(p-1)) Q + tau Q' satisfies H(Lambda Q) = 0. The residual
/// is evaluated with dense-output derivatives plus one 4th-order finite
/// difference, on tau in [0.1, 10].
struct LambdaQResult {
    std::vector<double> tau;
    std::vector<double> lambda_q;
    double max_rel_residual = 0.0;
};

LambdaQResult lambda_Q_residual(const Profile& Q, const ProblemParams& params);

/// Algebra check of the exterior change of variables v = r^{-eps/2} u:
/// if u solves the radial equation at lambda, then v solves
///   v'' + (d~-1)/r v' - (r^2-lambda) v + r^{eps(p-1)/2}|v|^{p-1}v
///      + r^{eps(q-1)/2}|v|^{q-1}v + (eps/2)(eps/2+d-2) v/r^2 = 0
/// with d~ = d + eps. flip_sign evaluates the wrong transform
/// v = r^{+eps/2} u as a negative control; its residual must not vanish.
struct TransformResidual {
    double max_rel = 0.0;
    double at_r = 0.0;
};

TransformResidual exterior_transform_residual(const Profile& u, double epsilon,
                                              const ProblemParams& params,
                                              bool flip_sign = false);

} // namespace gpss
