#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "gpss/constants.hpp"

namespace gpss {

/// One phase point (r, u, u') of a radial trajectory.
struct RadialState {
    double r = 0.0;
    double u = 0.0;
    double du = 0.0;
};

enum class ProfileKind { Smooth, Singular, EmdenFowler, Kernel };

enum class EventType {
    ZeroCross,     ///< u changed sign; located on the dense output
    MagnitudeCap,  ///< |u| exceeded the blow-up threshold while rising
    DecayFloor,    ///< |u| fell below the decay floor beyond the turning point
    Overflow,      ///< non-finite state (treated as blow-up)
    StepUnderflow, ///< step size collapsed; trajectory undetermined
};

struct Event {
    EventType type;
    double r;
};

struct Tol {
    double rtol = 1e-12;
    double atol = 1e-14;
};

/// Terminal-event configuration for one integration. All thresholds are
/// precomputed by the caller; a disabled feature is signalled by the
/// sentinel values noted below.
struct EventConfig {
    bool detect_zero_cross = false;
    double cap_abs = 0.0;        ///< absolute magnitude cap; 0 disables
    double ceiling_factor = 0.0; ///< fires at u > factor*(r^2-lambda)^ceiling_pow; 0 disables
    double ceiling_pow = 0.0;    ///< 1/(p-1)
    double turn_r = 0.0;         ///< sqrt(lambda); ceiling/decay checks start past it
    double decay_floor_rel = 0.0; ///< relative to u at turn_r+1; 0 disables
    double u_turn_seed = 0.0;    ///< carries u_turn into a continuation segment
};

namespace detail {

/// Dense-output coefficients of one accepted Dormand-Prince step,
/// for both solution components (u, du).
struct DenseStep {
    double r_left;
    double h;
    std::array<double, 5> cu;  // contd5 coefficients for u
    std::array<double, 5> cdu; // contd5 coefficients for du

    static double poly(const std::array<double, 5>& c, double th)
    {
        const double th1 = 1.0 - th;
        return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
    }
    static double poly_deriv(const std::array<double, 5>& c, double th)
    {
        const double b = c[2] + th * (c[3] + (1.0 - th) * c[4]);
        const double bp = c[3] + (1.0 - 2.0 * th) * c[4];
        return c[1] + (1.0 - 2.0 * th) * b + th * (1.0 - th) * bp;
    }
};

} // namespace detail

/// A computed trajectory with dense output between nodes.
struct Profile {
    ProblemParams params{};
    double lambda = 0.0;
    ProfileKind kind = ProfileKind::Smooth;
    std::vector<double> grid;   ///< strictly increasing node radii
    std::vector<double> values; ///< u at nodes
    std::vector<double> derivs; ///< u' at nodes
    std::optional<Event> event;
    std::vector<detail::DenseStep> dense;
    double u_turn = 0.0;  ///< |u| sampled at turn_r + 1 (0 if never reached)
    double rescale = 1.0; ///< cumulative rescaling applied (kernel runs)

    double r_min() const { return grid.front(); }
    double r_max() const { return grid.back(); }
    bool covers(double r) const { return r >= r_min() && r <= r_max(); }

    /// Dense-output u(r). Throws ValidationError outside the grid span.
    double eval(double r) const;
    /// Dense-output u'(r).
    double deriv(double r) const;
    /// u''(r), obtained by differentiating the dense interpolant of u'.
    double deriv2(double r) const;

  private:
    const detail::DenseStep& locate(double r) const;
};

/// Right-hand side of the radial equation, as u'' given (r, u, u').
/// q-term skipped when q is absent; both nonlinear terms skipped in
/// linear_mode. Fast paths for the common exponents p=3, p=2, q=1.5, q=2.
struct GpRhs {
    double d1;       // d-1
    double lambda;
    double p, pm1;
    double q = 0.0, qm1 = 0.0;
    bool has_q = false;
    bool linear = false;
    int p_kind = 0; // 0 generic, 3 cube, 2 square
    int q_kind = 0;

    GpRhs(const ProblemParams& params, double lambda_);

    double nonlinear(double u) const
    {
        if (linear) return 0.0;
        double s;
        if (p_kind == 3) s = u * u * u;
        else if (p_kind == 2) s = std::fabs(u) * u;
        else s = (u == 0.0) ? 0.0 : std::pow(std::fabs(u), pm1) * u;
        if (has_q) {
            if (q_kind == 15) s += std::sqrt(std::fabs(u)) * u;
            else if (q_kind == 2) s += std::fabs(u) * u;
            else s += (u == 0.0) ? 0.0 : std::pow(std::fabs(u), qm1) * u;
        }
        return s;
    }

    void operator()(double r, const double y[2], double dy[2]) const
    {
        dy[0] = y[1];
        dy[1] = -d1 / r * y[1] + (r * r - lambda) * y[0] - nonlinear(y[0]);
    }
};

/// Right-hand side of the profile equation u'' + (d-1)/r u' + |u|^{p-1}u = 0.
struct EmdenRhs {
    double d1;
    double p, pm1;
    int p_kind = 0;

    EmdenRhs(int d, double p_);

    void operator()(double r, const double y[2], double dy[2]) const
    {
        double s;
        if (p_kind == 3) s = y[0] * y[0] * y[0];
        else if (p_kind == 2) s = std::fabs(y[0]) * y[0];
        else s = (y[0] == 0.0) ? 0.0 : std::pow(std::fabs(y[0]), pm1) * y[0];
        dy[0] = y[1];
        dy[1] = -d1 / r * dy[0] - s;
    }
};

/// Spec'd single-point RHS evaluation: returns (u', u'') at (r, s).
/// Throws ValidationError at r = 0 (use an origin series instead).
std::pair<double, double> rhs(double r, const RadialState& s,
                              const ProblemParams& params, double lambda);

/// Second-order Taylor start for the regular solution with u(0) = theta:
///   u(r0) = theta + g0 r0^2 / (2d),  u'(r0) = g0 r0 / d,
/// where g0 = -lambda*theta - theta^q - theta^p (terms per mode).
/// Requires 0 < r0 <= 1e-2; truncation error O(r0^4).
RadialState origin_init_smooth(double theta, double r0,
                               const ProblemParams& params, double lambda);

enum class SingularOrder { leading, corrected };

/// Origin asymptotics of the singular solution:
///   leading:   u = A r0^{-alpha},  u' = -alpha A r0^{-alpha-1}
///   corrected: one Picard sweep adds the explicit corrections
///              eta = c_q r^{2(p-q)/(p-1)} + c_lam r^2 to u (the q-term
///              when q is present, the lambda-term when params.lambda is
///              set), and the matching derivative factor to u'. The
///              remaining truncation error exponent is twice the leading
///              correction exponent.
/// Requires 0 < r0 < 1.
RadialState origin_init_singular(double r0, const ProblemParams& params,
                                 SingularOrder order = SingularOrder::corrected);

struct IntegrateOptions {
    Tol tol{};
    EventConfig events{};
    bool keep_profile = true; ///< false: store only endpoint state (classification runs)
    std::size_t max_steps = 20'000'000;
};

namespace detail {

struct Dopri5Result {
    RadialState last;
    std::optional<Event> event;
    double u_turn;
    bool positive_throughout;
};

/// Core Dormand-Prince 5(4) loop with PI step control, dense output and
/// event location. Appends to `out` when keep_profile is set.
template <class Rhs>
Dopri5Result dopri5(const Rhs& f, RadialState init, double r_end,
                    const IntegrateOptions& opt, Profile* out);

} // namespace detail

/// Integrate from init.r to r_end (or the first terminal event).
/// Step-size underflow yields a StepUnderflow event, non-finite state an
/// Overflow event; neither throws.
template <class Rhs>
Profile integrate(const Rhs& f, const RadialState& init, double r_end,
                  const IntegrateOptions& opt);

/// Shooting dichotomy verdict for one trajectory.
enum class ClassKind { Decaying, CrossesZero, BlowsUpPositive, Undetermined };

struct Classification {
    ClassKind kind = ClassKind::Undetermined;
    double r = 0.0;      ///< radius at which the decision fired
    bool overflow = false;
};

/// Deterministic tail classification of a finished profile: events map
/// directly; otherwise terminal rules on (u, u') at the right endpoint
/// decide, using the turning-point sample u_turn and the nonlinear ceiling
/// (r^2-lambda)^{1/(p-1)}.
Classification classify_tail(const Profile& profile, const ProblemParams& params,
                             double lambda);

const char* to_string(ClassKind k);
const char* to_string(EventType t);
const char* to_string(ProfileKind k);

// ---------------------------------------------------------------------------
// template implementation

namespace detail {

template <class Rhs>
Dopri5Result dopri5(const Rhs& f, RadialState init, double r_end,
                    const IntegrateOptions& opt, Profile* out)
{
    // Dormand-Prince 5(4) tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights (Hairer-Norsett-Wanner CONTD5)
    constexpr double d1 = -12715105075.0 / 11282082432.0,
                     d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0,
                     d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0,
                     d7 = 69997945.0 / 29380423.0;

    const double rtol = opt.tol.rtol, atol = opt.tol.atol;
    const EventConfig& ev = opt.events;

    Dopri5Result res{};
    res.positive_throughout = init.u > 0.0;
    res.u_turn = ev.u_turn_seed;

    double r = init.r;
    double y[2] = {init.u, init.du};
    double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], k7[2];
    double yt[2], ynew[2], yerr[2];

    f(r, y, k1);

    auto push_node = [&](double rr, const double yy[2]) {
        if (!out) return;
        out->grid.push_back(rr);
        out->values.push_back(yy[0]);
        out->derivs.push_back(yy[1]);
    };
    push_node(r, y);

    // initial step size from the local derivative scale
    double h;
    {
        const double sc0 = atol + rtol * std::fabs(y[0]);
        const double sc1 = atol + rtol * std::fabs(y[1]);
        const double d0 = std::hypot(y[0] / sc0, y[1] / sc1);
        const double dd = std::hypot(k1[0] / sc0, k1[1] / sc1);
        h = (dd > 0.0) ? 0.01 * d0 / dd : 1e-6;
        h = std::min({h, (r_end - r) * 0.1, 0.1 * std::max(r, 1e-8)});
        h = std::max(h, 1e-14 * std::max(r, 1.0));
    }

    constexpr double safety = 0.9, beta_pi = 0.04;
    constexpr double expo = 0.2 - beta_pi * 0.75;
    double facold = 1e-4;
    bool last_step = false;
    std::size_t nsteps = 0;
    int consecutive_rejects = 0;

    DenseStep ds{};

    while (!last_step) {
        if (++nsteps > opt.max_steps) {
            res.event = Event{EventType::StepUnderflow, r};
            break;
        }
        if (r + h >= r_end) {
            h = r_end - r;
            last_step = true;
        }
        if (h <= std::fabs(r) * 1e-15 || h <= 1e-300) {
            res.event = Event{EventType::StepUnderflow, r};
            break;
        }

        auto stage = [&](double c, double* k, auto... pairs) {
            // evaluates k = f(r + c h, y + h * sum a_i k_i)
            yt[0] = y[0];
            yt[1] = y[1];
            auto add = [&](double a, const double* kk) {
                yt[0] += h * a * kk[0];
                yt[1] += h * a * kk[1];
            };
            (add(pairs.first, pairs.second), ...);
            f(r + c * h, yt, k);
        };
        using P = std::pair<double, const double*>;
        stage(c2, k2, P{a21, k1});
        stage(c3, k3, P{a31, k1}, P{a32, k2});
        stage(c4, k4, P{a41, k1}, P{a42, k2}, P{a43, k3});
        stage(c5, k5, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4});
        stage(1.0, k6, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5});
        for (int i = 0; i < 2; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                                  a75 * k5[i] + a76 * k6[i]);
        f(r + h, ynew, k7);
        for (int i = 0; i < 2; ++i)
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);

        if (!std::isfinite(ynew[0]) || !std::isfinite(ynew[1])) {
            if (++consecutive_rejects > 40) {
                res.event = Event{EventType::Overflow, r};
                break;
            }
            h *= 0.25;
            last_step = false;
            continue;
        }

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            const double e = yerr[i] / sc;
            err += e * e;
        }
        err = std::sqrt(0.5 * err);

        if (err > 1.0) {
            ++consecutive_rejects;
            const double fac = std::max(0.1, safety * std::pow(err, -0.2));
            h *= fac;
            last_step = false;
            if (consecutive_rejects > 200) {
                res.event = Event{EventType::StepUnderflow, r};
                break;
            }
            continue;
        }
        consecutive_rejects = 0;

        // accepted: dense coefficients for both components
        ds.r_left = r;
        ds.h = h;
        for (int i = 0; i < 2; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            std::array<double, 5>& c = (i == 0) ? ds.cu : ds.cdu;
            c[0] = y[i];
            c[1] = ydiff;
            c[2] = bspl;
            c[3] = ydiff - h * k7[i] - bspl;
            c[4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                        d6 * k6[i] + d7 * k7[i]);
        }
        if (out) out->dense.push_back(ds);

        const double r_new = r + h;

        // turning-point sample for the decay floor
        if (res.u_turn == 0.0 && ev.turn_r > 0.0 && r_new >= ev.turn_r + 1.0) {
            const double rt = ev.turn_r + 1.0;
            const double th = (rt - r) / h;
            res.u_turn = std::fabs(DenseStep::poly(ds.cu, std::clamp(th, 0.0, 1.0)));
            if (res.u_turn == 0.0) res.u_turn = std::fabs(ynew[0]);
        }

        std::optional<Event> fired;

        if (ev.detect_zero_cross &&
            ((y[0] > 0.0 && ynew[0] <= 0.0) || (y[0] < 0.0 && ynew[0] >= 0.0))) {
            // bisection on the dense polynomial, then Newton polish
            double lo = 0.0, hi = 1.0;
            const double s0 = y[0];
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double um = DenseStep::poly(ds.cu, mid);
                if ((um > 0.0) == (s0 > 0.0)) lo = mid;
                else hi = mid;
            }
            double th = 0.5 * (lo + hi);
            for (int it = 0; it < 4; ++it) {
                const double uu = DenseStep::poly(ds.cu, th);
                const double dd = DenseStep::poly_deriv(ds.cu, th); // du/dtheta
                if (dd == 0.0) break;
                const double step = uu / dd;
                const double cand = th - step;
                if (cand >= 0.0 && cand <= 1.0) th = cand;
            }
            fired = Event{EventType::ZeroCross, r + th * h};
        }

        if (!fired && ev.cap_abs > 0.0 && std::fabs(ynew[0]) > ev.cap_abs) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (std::fabs(DenseStep::poly(ds.cu, mid)) > ev.cap_abs) hi = mid;
                else lo = mid;
            }
            fired = Event{EventType::MagnitudeCap, r + hi * h};
        }

        if (!fired && ev.ceiling_factor > 0.0 && r_new > ev.turn_r + 0.5 &&
            ynew[1] > 0.0) {
            const double ceil_val =
                std::pow(std::max(r_new * r_new - ev.turn_r * ev.turn_r, 1.0),
                         ev.ceiling_pow);
            if (ynew[0] > ev.ceiling_factor * ceil_val)
                fired = Event{EventType::MagnitudeCap, r_new};
        }

        if (!fired && ev.decay_floor_rel > 0.0 && res.u_turn > 0.0 &&
            res.positive_throughout && ynew[0] > 0.0 &&
            ynew[0] < ev.decay_floor_rel * res.u_turn) {
            fired = Event{EventType::DecayFloor, r_new};
        }

        if (fired) {
            const double th = std::clamp((fired->r - r) / h, 0.0, 1.0);
            ynew[0] = DenseStep::poly(ds.cu, th);
            ynew[1] = DenseStep::poly(ds.cdu, th);
            if (out && fired->r > r + 1e-300) {
                out->dense.back().h = fired->r - r; // truncated step remains valid
                push_node(fired->r, ynew);
            } else if (out) {
                out->dense.pop_back();
            }
            res.event = fired;
            r = fired->r;
            y[0] = ynew[0];
            y[1] = ynew[1];
            break;
        }

        r = r_new;
        y[0] = ynew[0];
        y[1] = ynew[1];
        k1[0] = k7[0];
        k1[1] = k7[1];
        if (y[0] <= 0.0) res.positive_throughout = false;
        push_node(r, y);

        // PI step-size controller
        const double fac11 = std::pow(std::max(err, 1e-32), expo);
        double fac = fac11 / std::pow(facold, beta_pi);
        fac = std::clamp(fac / safety, 0.2, 10.0);
        h = h / fac;
        facold = std::max(err, 1e-4);
        h = std::min(h, r_end - r + 1e-300);
    }

    res.last = RadialState{r, y[0], y[1]};
    return res;
}

} // namespace detail

template <class Rhs>
Profile integrate(const Rhs& f, const RadialState& init, double r_end,
                  const IntegrateOptions& opt)
{
    if (!(init.r < r_end)) {
        throw ValidationError("integrate: init.r < r_end required");
    }
    if (!(opt.tol.rtol >= 1e-13)) {
        throw ValidationError("integrate: rtol >= 1e-13 required");
    }
    Profile prof;
    prof.kind = ProfileKind::Smooth;
    prof.grid.reserve(1024);
    prof.values.reserve(1024);
    prof.derivs.reserve(1024);
    prof.dense.reserve(1024);
    auto res = detail::dopri5(f, init, r_end, opt, opt.keep_profile ? &prof : nullptr);
    if (!opt.keep_profile) {
        prof.grid = {init.r, res.last.r};
        prof.values = {init.u, res.last.u};
        prof.derivs = {init.du, res.last.du};
        if (prof.grid[1] <= prof.grid[0]) { // event at the very first node
            prof.grid.pop_back();
            prof.values.pop_back();
            prof.derivs.pop_back();
        }
    }
    prof.event = res.event;
    prof.u_turn = res.u_turn;
    return prof;
}

} // namespace gpss
