#include "gpss/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace gpss {

namespace {

// cubic Hermite pieces on the node arrays; used when a profile carries no
// dense data (resampled profiles)
struct HermitePiece {
    double x0, h, u0, u1, m0, m1;

    double value(double x) const
    {
        const double t = (x - x0) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * h * m0 +
               (-2 * t3 + 3 * t2) * u1 + (t3 - t2) * h * m1;
    }
    double slope(double x) const
    {
        const double t = (x - x0) / h;
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * u0 + (3 * t2 - 4 * t + 1) * h * m0 +
                (-6 * t2 + 6 * t) * u1 + (3 * t2 - 2 * t) * h * m1) / h;
    }
    double slope2(double x) const
    {
        const double t = (x - x0) / h;
        return ((12 * t - 6) * u0 + (6 * t - 4) * h * m0 + (-12 * t + 6) * u1 +
                (6 * t - 2) * h * m1) / (h * h);
    }
};

} // namespace

const detail::DenseStep& Profile::locate(double r) const
{
    if (!covers(r)) {
        throw ValidationError("Profile: evaluation at r = " + std::to_string(r) +
                              " outside [" + std::to_string(r_min()) + ", " +
                              std::to_string(r_max()) + "]");
    }
    auto it = std::upper_bound(dense.begin(), dense.end(), r,
                               [](double rr, const detail::DenseStep& s) {
                                   return rr < s.r_left;
                               });
    if (it != dense.begin()) --it;
    return *it;
}

namespace {

HermitePiece node_piece(const Profile& p, double r)
{
    if (p.grid.size() < 2) {
        throw ValidationError("Profile: no interpolation data");
    }
    if (!p.covers(r)) {
        throw ValidationError("Profile: evaluation at r = " + std::to_string(r) +
                              " outside the grid span");
    }
    auto it = std::upper_bound(p.grid.begin(), p.grid.end(), r);
    std::size_t i = (it == p.grid.begin()) ? 0 : (it - p.grid.begin() - 1);
    if (i + 1 >= p.grid.size()) i = p.grid.size() - 2;
    return {p.grid[i], p.grid[i + 1] - p.grid[i], p.values[i], p.values[i + 1],
            p.derivs[i], p.derivs[i + 1]};
}

} // namespace

double Profile::eval(double r) const
{
    if (dense.empty()) return node_piece(*this, r).value(r);
    const auto& s = locate(r);
    return detail::DenseStep::poly(s.cu, (r - s.r_left) / s.h);
}

double Profile::deriv(double r) const
{
    if (dense.empty()) return node_piece(*this, r).slope(r);
    const auto& s = locate(r);
    return detail::DenseStep::poly(s.cdu, (r - s.r_left) / s.h);
}

double Profile::deriv2(double r) const
{
    if (dense.empty()) return node_piece(*this, r).slope2(r);
    const auto& s = locate(r);
    return detail::DenseStep::poly_deriv(s.cdu, (r - s.r_left) / s.h) / s.h;
}

namespace {

int pow_kind(double e)
{
    if (e == 3.0) return 3;
    if (e == 2.0) return 2;
    if (e == 1.5) return 15;
    return 0;
}

} // namespace

GpRhs::GpRhs(const ProblemParams& params, double lambda_)
    : d1(params.d - 1.0),
      lambda(lambda_),
      p(params.p),
      pm1(params.p - 1.0),
      linear(params.linear_mode)
{
    p_kind = pow_kind(p);
    if (params.q) {
        has_q = true;
        q = *params.q;
        qm1 = q - 1.0;
        q_kind = pow_kind(q);
    }
}

EmdenRhs::EmdenRhs(int d, double p_) : d1(d - 1.0), p(p_), pm1(p_ - 1.0)
{
    p_kind = pow_kind(p);
}

std::pair<double, double> rhs(double r, const RadialState& s,
                              const ProblemParams& params, double lambda)
{
    if (r <= 0.0) {
        throw ValidationError("rhs: r > 0 required (use an origin series at r = 0)");
    }
    GpRhs f(params, lambda);
    double y[2] = {s.u, s.du};
    double dy[2];
    f(r, y, dy);
    return {dy[0], dy[1]};
}

RadialState origin_init_smooth(double theta, double r0,
                               const ProblemParams& params, double lambda)
{
    if (!(r0 > 0.0) || r0 > 1e-2) {
        throw ValidationError("origin_init_smooth: 0 < r0 <= 1e-2 required");
    }
    if (theta < 0.0) {
        throw ValidationError("origin_init_smooth: theta >= 0 required");
    }
    if (theta == 0.0) return {r0, 0.0, 0.0};

    double g0 = -lambda * theta;
    if (!params.linear_mode) {
        GpRhs f(params, lambda);
        g0 -= f.nonlinear(theta);
    }
    const double d = params.d;
    return {r0, theta + g0 * r0 * r0 / (2.0 * d), g0 * r0 / d};
}

RadialState origin_init_singular(double r0, const ProblemParams& params,
                                 SingularOrder order)
{
    if (!(r0 > 0.0) || !(r0 < 1.0)) {
        throw ValidationError("origin_init_singular: 0 < r0 < 1 required (asymptotics invalid)");
    }
    const auto c = derive_constants(params);
    const double base_u = c.A * std::pow(r0, -c.alpha);
    const double base_du = -c.alpha * c.A * std::pow(r0, -c.alpha - 1.0);
    if (order == SingularOrder::leading) {
        return {r0, base_u, base_du};
    }

    // One Picard sweep of the origin equation in the log variable: each
    // explicit forcing term -c e^{-ks} contributes -c e^{-ks}/(k^2+mu k+p-1),
    // which in r reads c_j r^{kappa_j}; the derivative picks up the factor
    // (1 - kappa_j/alpha).
    double eta = 0.0, eta_d = 0.0;
    auto add_term = [&](double coeff, double kappa) {
        const double k_s = kappa * c.m; // decay rate in the log variable
        const double denom = k_s * k_s + c.mu * k_s + (params.p - 1.0);
        const double cj = -coeff / denom;
        const double term = cj * std::pow(r0, kappa);
        eta += term;
        eta_d += term * (1.0 - kappa / c.alpha);
    };
    if (params.q) {
        add_term(std::pow(c.A, *params.q - 1.0) * c.m * c.m,
                 c.origin_correction_exponent);
    }
    if (params.lambda) {
        add_term(*params.lambda * c.m * c.m, 2.0);
    }
    return {r0, base_u * (1.0 + eta), base_du * (1.0 + eta_d)};
}

Classification classify_tail(const Profile& profile, const ProblemParams& params,
                             double lambda)
{
    Classification out;
    const double r_last = profile.grid.back();
    const double u_last = profile.values.back();
    const double du_last = profile.derivs.back();

    if (!std::isfinite(u_last) || !std::isfinite(du_last)) {
        return {ClassKind::BlowsUpPositive, r_last, true};
    }
    if (profile.event) {
        switch (profile.event->type) {
            case EventType::ZeroCross:
                return {ClassKind::CrossesZero, profile.event->r, false};
            case EventType::MagnitudeCap:
                return {ClassKind::BlowsUpPositive, profile.event->r, false};
            case EventType::Overflow:
                return {ClassKind::BlowsUpPositive, profile.event->r, true};
            case EventType::DecayFloor:
                return {ClassKind::Decaying, profile.event->r, false};
            case EventType::StepUnderflow:
                return {ClassKind::Undetermined, profile.event->r, false};
        }
    }

    // no event: terminal rules at r_end
    if (u_last <= 0.0) {
        return {ClassKind::CrossesZero, r_last, false};
    }
    const double u_turn = profile.u_turn > 0.0 ? profile.u_turn
                                               : std::fabs(profile.values.front());
    if (u_last < 1e-4 * u_turn) {
        return {ClassKind::Decaying, r_last, false};
    }
    if (du_last > 0.0) {
        return {ClassKind::BlowsUpPositive, r_last, false};
    }
    if (!params.linear_mode) {
        const double ceil_val = std::pow(
            std::max(r_last * r_last - lambda, 1.0), 1.0 / (params.p - 1.0));
        if (u_last > 0.05 * ceil_val) {
            return {ClassKind::BlowsUpPositive, r_last, false};
        }
    }
    return {ClassKind::Undetermined, r_last, false};
}

const char* to_string(ClassKind k)
{
    switch (k) {
        case ClassKind::Decaying: return "Decaying";
        case ClassKind::CrossesZero: return "CrossesZero";
        case ClassKind::BlowsUpPositive: return "BlowsUpPositive";
        case ClassKind::Undetermined: return "Undetermined";
    }
    return "?";
}

const char* to_string(EventType t)
{
    switch (t) {
        case EventType::ZeroCross: return "zero_cross";
        case EventType::MagnitudeCap: return "magnitude_cap";
        case EventType::DecayFloor: return "decay_floor";
        case EventType::Overflow: return "overflow";
        case EventType::StepUnderflow: return "step_underflow";
    }
    return "?";
}

const char* to_string(ProfileKind k)
{
    switch (k) {
        case ProfileKind::Smooth: return "Smooth";
        case ProfileKind::Singular: return "Singular";
        case ProfileKind::EmdenFowler: return "EmdenFowler";
        case ProfileKind::Kernel: return "Kernel";
    }
    return "?";
}

} // namespace gpss
