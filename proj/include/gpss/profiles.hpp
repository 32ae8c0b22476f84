#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gpss/constants.hpp"
#include "gpss/integrate.hpp"

namespace gpss {

struct BracketRecord {
    double lo, hi;
    ClassKind class_lo, class_hi;
};

/// One converged eigenvalue lambda(theta) with its bisection evidence.
struct ShootResult {
    std::optional<double> theta;
    double lambda = 0.0;
    std::vector<BracketRecord> bracket_history;
    int iterations = 0;
    double achieved_tol = 0.0;
    Profile profile;
};

class NoSignChangeError : public ConvergenceError {
  public:
    using ConvergenceError::ConvergenceError;
};

/// Knobs shared by all shooting calls. r_end = sqrt(lambda) + r_end_pad,
/// capped at r_end_cap; near-separatrix runs that finish undetermined are
/// retried once with the interval extended by r_extend.
struct ShootOptions {
    Tol tol{1e-12, 0.0};
    double lambda_tol = 1e-10;
    double r0_singular = 1e-4;
    SingularOrder singular_order = SingularOrder::corrected;
    double r_end_pad = 4.0;
    double r_end_cap = 8.0;
    double r_extend = 4.0;
    /// Decay floor used while classifying lambda-trials. Tight on purpose:
    /// a floor of 1e-6 u_turn tags an O(1e-7)-wide lambda band as Decaying
    /// and caps the bisection accuracy there; 1e-12 keeps that band well
    /// under lambda_tol while staying reachable before the extension cap.
    double classify_floor_rel = 1e-12;
    /// Decay floor for the final production profile (stops it while still
    /// comfortably positive).
    double decay_floor_rel = 1e-6;
    double ceiling_factor = 1.5;
    int prescan_points = 64;
    std::optional<double> lambda_ref; ///< disambiguates multiple sign changes
};

/// Smooth-start radius: 1e-2 shrunk with the interior scale theta^{-(p-1)/2},
/// clamped to [1e-6, 1e-2].
double smooth_start_radius(double theta, const ProblemParams& params);

/// Classify one lambda-trial launched from the given origin state.
Classification classify_shot(const RadialState& init, const ProblemParams& params,
                             double lambda, const ShootOptions& opt);

/// Bisection on lambda over the shooting dichotomy for the regular solution
/// with u(0) = theta. When the endpoint classifications agree, a coarse
/// pre-scan over prescan_points locates the sign-change sub-interval closest
/// to lambda_ref. Throws NoSignChangeError / ConvergenceError.
ShootResult shoot_lambda(double theta, std::pair<double, double> bracket,
                         double tol, const ProblemParams& params,
                         const ShootOptions& opt = {});

struct LambdaStarResult {
    double lambda_star = 0.0;
    Profile phi;
    ShootResult shoot;
    /// All sign-change sub-intervals seen by the pre-scan (multiplicity report).
    std::vector<std::pair<double, double>> sign_changes;
    bool cache_hit = false;
};

/// Same bisection launched from origin_init_singular; result cached keyed by
/// (d, p, q, r0, lambda_tol, rtol) when cache_dir is given. The cached value
/// short-circuits the bisection; the profile is always recomputed.
LambdaStarResult find_lambda_star(std::pair<double, double> bracket, double tol,
                                  double r0, const ProblemParams& params,
                                  const ShootOptions& opt = {},
                                  const std::optional<std::filesystem::path>& cache_dir = {});

/// Profile equation Q'' + (d-1)/r Q' + Q^p = 0, Q(0)=1, Q'(0)=0, solved on
/// [r0, r_max] from a fourth-order Taylor start. Supercritical p required;
/// a zero crossing aborts with "subcritical-like oscillation".
Profile solve_emden_fowler(double r_max, const Tol& tol, const ProblemParams& params);

/// Evaluator of the scaled family u0(r) = theta Q(theta^{(p-1)/2} r).
class ScaledEmden {
  public:
    ScaledEmden(double theta, const Profile& q_profile, double p);

    double operator()(double r) const { return theta_ * q_->eval(scale_ * r); }
    double deriv(double r) const { return theta_ * scale_ * q_->deriv(scale_ * r); }
    double scale() const { return scale_; }

  private:
    double theta_;
    double scale_;
    const Profile* q_;
};

/// Interior remainder T of u = theta (Q + theta^{1-p} T)(theta^{(p-1)/2} r),
/// computed from the true interior trajectory at (theta, lambda), with the
/// weighted norm sup (1+tau)^{2/(p-1)-2} (|T| + tau |T'|) on the grid.
struct InteriorRemainder {
    std::vector<double> tau;
    std::vector<double> T;
    std::vector<double> dT;
    double y_norm = 0.0;
    double tau1 = 0.0;
};

InteriorRemainder interior_remainder(double theta, double r_star, double lambda,
                                     const ProblemParams& params, const Profile& Q,
                                     const Tol& tol = {1e-13, 0.0});

} // namespace gpss
