#include "gpss/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace gpss {

namespace {

// solve the 3x3 normal equations for y ~ a sin(f x) + b cos(f x) + c,
// returning the sum of squared residuals
double sinusoid_ls(std::span<const double> x, std::span<const double> y, double f,
                   double& a, double& b, double& c)
{
    double s_ss = 0, s_cc = 0, s_sc = 0, s_s = 0, s_c = 0;
    double s_ys = 0, s_yc = 0, s_y = 0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = std::sin(f * x[i]);
        const double co = std::cos(f * x[i]);
        s_ss += s * s;
        s_cc += co * co;
        s_sc += s * co;
        s_s += s;
        s_c += co;
        s_ys += y[i] * s;
        s_yc += y[i] * co;
        s_y += y[i];
    }
    // Cramer on [[s_ss, s_sc, s_s], [s_sc, s_cc, s_c], [s_s, s_c, n]]
    const double m11 = s_ss, m12 = s_sc, m13 = s_s;
    const double m22 = s_cc, m23 = s_c, m33 = n;
    const double det = m11 * (m22 * m33 - m23 * m23) - m12 * (m12 * m33 - m23 * m13) +
                       m13 * (m12 * m23 - m22 * m13);
    if (std::fabs(det) < 1e-300) {
        a = b = c = 0.0;
        return std::numeric_limits<double>::infinity();
    }
    const double d1 = s_ys * (m22 * m33 - m23 * m23) - m12 * (s_yc * m33 - m23 * s_y) +
                      m13 * (s_yc * m23 - m22 * s_y);
    const double d2 = m11 * (s_yc * m33 - s_y * m23) - s_ys * (m12 * m33 - m23 * m13) +
                      m13 * (m12 * s_y - s_yc * m13);
    const double d3 = m11 * (m22 * s_y - m23 * s_yc) - m12 * (m12 * s_y - s_yc * m13) +
                      s_ys * (m12 * m23 - m22 * m13);
    a = d1 / det;
    b = d2 / det;
    c = d3 / det;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = a * std::sin(f * x[i]) + b * std::cos(f * x[i]) + c;
        sse += (y[i] - m) * (y[i] - m);
    }
    return sse;
}

} // namespace

SinFit fit_log_sinusoid(std::span<const double> r, std::span<const double> y,
                        std::optional<double> frequency_hint)
{
    if (r.size() != y.size()) {
        throw ValidationError("fit_log_sinusoid: length mismatch");
    }
    if (r.size() < 32) {
        throw WindowTooShortError("fit_log_sinusoid: fewer than 32 samples");
    }
    std::vector<double> x(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0)) throw ValidationError("fit_log_sinusoid: r > 0 required");
        x[i] = std::log(r[i]);
    }
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double span = *mx - *mn;

    double f_lo, f_hi;
    if (frequency_hint) {
        // With a hint the frequency is identifiable from well under three
        // periods; 1.2 is the practical floor. The 3-period rule below
        // applies to hint-free scans, which need room to lock on.
        if (span * *frequency_hint < 1.2 * 2.0 * M_PI) {
            throw WindowTooShortError(
                "fit_log_sinusoid: window too short at the hinted frequency");
        }
        f_lo = *frequency_hint / 2.5;
        f_hi = *frequency_hint * 2.5;
    } else {
        f_lo = 3.0 * 2.0 * M_PI / span; // at least 3 periods in window
        f_hi = 2.0 * M_PI * static_cast<double>(r.size()) / (8.0 * span);
        if (f_hi <= f_lo) {
            throw WindowTooShortError("fit_log_sinusoid: window too short for a scan");
        }
    }

    // coarse scan (log-spaced), keep the best frequency
    const int n_scan = 600;
    double best_f = f_lo, best_sse = std::numeric_limits<double>::infinity();
    double a, b, c;
    for (int i = 0; i < n_scan; ++i) {
        const double f = f_lo * std::pow(f_hi / f_lo, i / (n_scan - 1.0));
        const double sse = sinusoid_ls(x, y, f, a, b, c);
        if (sse < best_sse) {
            best_sse = sse;
            best_f = f;
        }
    }
    // parabolic refinement on the frequency
    double step = best_f * 5e-3;
    double f0 = best_f;
    for (int it = 0; it < 60; ++it) {
        const double sm = sinusoid_ls(x, y, f0 - step, a, b, c);
        const double s0 = sinusoid_ls(x, y, f0, a, b, c);
        const double sp = sinusoid_ls(x, y, f0 + step, a, b, c);
        const double denom = sm - 2.0 * s0 + sp;
        if (denom > 0.0) {
            double shift = 0.5 * (sm - sp) / denom * step;
            shift = std::clamp(shift, -step, step);
            f0 += shift;
        } else {
            f0 = (sm < sp) ? f0 - step : f0 + step;
        }
        step *= 0.6;
        if (step < 1e-12 * f0) break;
    }
    const double sse = sinusoid_ls(x, y, f0, a, b, c);

    SinFit fit;
    fit.frequency = f0;
    fit.amplitude = std::hypot(a, b);
    fit.phase = std::atan2(b, a);
    if (fit.phase < 0.0) fit.phase += 2.0 * M_PI;
    fit.offset = c;
    fit.residual_rms = std::sqrt(sse / static_cast<double>(x.size()));
    fit.window_lo = std::exp(*mn);
    fit.window_hi = std::exp(*mx);
    return fit;
}

PowerFit fit_power(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3) {
        throw ValidationError("fit_power: need >= 3 points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const auto n = static_cast<double>(x.size());
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(std::fabs(y[i]) > 0.0)) {
            throw ValidationError("fit_power: positive x and nonzero y required");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(std::fabs(y[i]));
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    PowerFit fit;
    fit.points = static_cast<int>(x.size());
    const double denom = n * sxx - sx * sx;
    fit.exponent = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.exponent * sx) / n;
    fit.coefficient = std::exp(intercept);
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = intercept + fit.exponent * lx[i];
        sse += (ly[i] - m) * (ly[i] - m);
    }
    fit.residual_rms = std::sqrt(sse / n);
    const double sst = syy - sy * sy / n;
    fit.r2 = (sst > 0.0) ? 1.0 - sse / sst : 1.0;
    return fit;
}

namespace {

// backward integration adapter: v(s) = u(-s) turns decreasing-r integration
// into the increasing-s form the stepper expects
template <class Rhs>
struct BackwardRhs {
    const Rhs& f;
    void operator()(double s, const double y[2], double dy[2]) const
    {
        const double yy[2] = {y[0], -y[1]};
        double dyy[2];
        f(-s, yy, dyy);
        dy[0] = y[1];
        dy[1] = dyy[1];
    }
};

} // namespace

TailSamples relax_tail(const Profile& prof, const ProblemParams& params,
                       double lambda, double r_far)
{
    const double r_match = std::sqrt(std::max(lambda, 0.0)) + 1.0;
    if (!prof.covers(r_match)) {
        throw ValidationError("relax_tail: profile does not reach sqrt(lambda)+1");
    }
    if (!(r_far > r_match + 2.0)) {
        throw ValidationError("relax_tail: r_far too close to the matching radius");
    }
    const double nu = (lambda - params.d) / 2.0;
    const double uR = std::exp(-r_far * r_far / 2.0) * std::pow(r_far, nu);
    RadialState seed{-r_far, uR, uR * (-r_far + nu / r_far)};
    // state in s = -r: v' = -u'
    seed.du = -seed.du;

    GpRhs f(params, lambda);
    BackwardRhs<GpRhs> fb{f};
    IntegrateOptions opt;
    opt.tol = {1e-13, 0.0};
    Profile back = integrate(fb, seed, -r_match, opt);

    TailSamples out;
    out.r_match = r_match;
    const double u_fwd = prof.eval(r_match);
    const double du_fwd = prof.deriv(r_match);
    const double u_back = back.eval(-r_match);
    const double du_back = -back.deriv(-r_match);
    out.scale = u_fwd / u_back;
    out.du_mismatch = std::fabs(out.scale * du_back - du_fwd) /
                      std::max(std::fabs(du_fwd), 1e-300);

    const int n = 2400;
    out.r.resize(n);
    out.u.resize(n);
    out.du.resize(n);
    for (int i = 0; i < n; ++i) {
        const double r = r_match + (r_far - 0.05 - r_match) * i / (n - 1.0);
        out.r[i] = r;
        out.u[i] = out.scale * back.eval(-r);
        out.du[i] = -out.scale * back.deriv(-r);
    }
    return out;
}

namespace {

// least squares for y ~ a + b / r^2 + c / r^4 on a window; returns a and the
// residual drift (max-min of residuals over |a|)
struct PlateauEstimate {
    double value;
    double drift;
};

PlateauEstimate plateau_extrapolate(std::span<const double> r,
                                    std::span<const double> y,
                                    double scale_floor = 0.0)
{
    const std::size_t n = r.size();
    double m[3][3] = {};
    double v[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double b1 = 1.0, b2 = 1.0 / (r[i] * r[i]), b3 = b2 * b2;
        const double basis[3] = {b1, b2, b3};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
            v[a] += basis[a] * y[i];
        }
    }
    // gaussian elimination, 3x3
    double aug[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
        aug[i][3] = v[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::fabs(aug[row][col]) > std::fabs(aug[piv][col])) piv = row;
        }
        std::swap(aug[col], aug[piv]);
        for (int row = col + 1; row < 3; ++row) {
            const double fac = aug[row][col] / aug[col][col];
            for (int j = col; j < 4; ++j) aug[row][j] -= fac * aug[col][j];
        }
    }
    double coef[3];
    for (int i = 2; i >= 0; --i) {
        double s = aug[i][3];
        for (int j = i + 1; j < 3; ++j) s -= aug[i][j] * coef[j];
        coef[i] = s / aug[i][i];
    }
    double res_lo = 1e300, res_hi = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double b2 = 1.0 / (r[i] * r[i]);
        const double res = y[i] - (coef[0] + coef[1] * b2 + coef[2] * b2 * b2);
        res_lo = std::min(res_lo, res);
        res_hi = std::max(res_hi, res);
    }
    const double scale = std::max({std::fabs(coef[0]), scale_floor, 1e-300});
    return {coef[0], (res_hi - res_lo) / scale};
}

} // namespace

FarField far_field_diagnostics(const Profile& prof, double lambda,
                               const ProblemParams& params, double r_far)
{
    const auto tail = relax_tail(prof, params, lambda, r_far);

    FarField out;
    out.window_lo = std::max(std::sqrt(std::max(lambda, 0.0)) + 2.5, 5.5);
    out.window_hi = r_far - 1.0;
    if (out.window_hi <= out.window_lo + 0.5) {
        throw ValidationError("far_field_diagnostics: r_far leaves no tail window");
    }
    const double target1 = (lambda - params.d) / 2.0;

    std::vector<double> rw, y1, y2;
    for (std::size_t i = 0; i < tail.r.size(); ++i) {
        const double r = tail.r[i];
        if (tail.u[i] <= 0.0) continue;
        const double e_psi = r * tail.du[i] / tail.u[i] + r * r;
        out.r.push_back(r);
        out.e_over_psi.push_back(e_psi);
        out.plateau2_series.push_back(r * r * (e_psi - target1));
        if (r >= out.window_lo && r <= out.window_hi) {
            rw.push_back(r);
            y1.push_back(e_psi);
            y2.push_back(r * r * (e_psi - target1));
        }
    }
    if (rw.size() < 16) {
        throw ValidationError("far_field_diagnostics: tail window empty");
    }
    const auto p1 = plateau_extrapolate(rw, y1, 0.05);
    const auto p2 = plateau_extrapolate(rw, y2, 0.05);
    out.plateau1 = p1.value;
    out.plateau2 = p2.value;
    out.drift1 = p1.drift;
    out.drift2 = p2.drift;

    // last-half-decade median, kept as the raw diagnostic
    const double half_lo = out.window_hi / std::sqrt(10.0);
    std::vector<double> med;
    for (std::size_t i = 0; i < rw.size(); ++i) {
        if (rw[i] >= half_lo) med.push_back(y1[i]);
    }
    if (!med.empty()) {
        std::nth_element(med.begin(), med.begin() + med.size() / 2, med.end());
        out.plateau1_median = med[med.size() / 2];
    }
    out.no_plateau = p1.drift > 0.10;
    return out;
}

KayResult extract_K(const Profile& prof, double lambda, const ProblemParams& params,
                    double r_far)
{
    const auto tail = relax_tail(prof, params, lambda, r_far);
    const double nu = (lambda - params.d) / 2.0;
    const double w_lo = std::max(std::sqrt(std::max(lambda, 0.0)) + 2.0, 5.0);
    const double w_hi = r_far - 1.0;

    std::vector<double> rw, kw;
    for (std::size_t i = 0; i < tail.r.size(); ++i) {
        const double r = tail.r[i];
        if (r < w_lo || r > w_hi || tail.u[i] <= 0.0) continue;
        rw.push_back(r);
        kw.push_back(tail.u[i] * std::exp(r * r / 2.0) * std::pow(r, -nu));
    }
    if (rw.size() < 16) throw ValidationError("extract_K: tail window empty");
    const auto fit = plateau_extrapolate(rw, kw);
    return {fit.value, fit.drift, fit.drift > 0.10};
}

namespace {

/// linearized-operator right-hand side around a frozen profile
struct KernelRhs {
    double d1;
    double lambda;
    double p, q;
    bool has_q;
    bool drop_potential;
    const Profile* phi;

    void operator()(double r, const double y[2], double dy[2]) const
    {
        double pot = 0.0;
        if (!drop_potential) {
            const double ph = phi->eval(r);
            pot = p * std::pow(ph, p - 1.0);
            if (has_q) pot += q * std::pow(ph, q - 1.0);
        }
        dy[0] = y[1];
        dy[1] = -d1 / r * y[1] + (r * r - lambda - pot) * y[0];
    }
};

Profile resample_descending(const Profile& back, double r_lo, double r_hi,
                            int n_nodes)
{
    // `back` lives in s = -r with s ascending; map onto an ascending log-r grid
    Profile out;
    out.grid.resize(n_nodes);
    out.values.resize(n_nodes);
    out.derivs.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, i / (n_nodes - 1.0));
        const double s = std::clamp(-r, back.grid.front(), back.grid.back());
        out.grid[i] = r;
        out.values[i] = back.eval(s);
        out.derivs[i] = -back.deriv(s);
    }
    return out;
}

} // namespace

Profile kernel_psi1(double lambda_star, const Profile& phi, double r_start,
                    const ProblemParams& params, const Tol& tol)
{
    if (!(r_start >= std::sqrt(std::max(lambda_star, 0.0)) + 2.0)) {
        throw ValidationError("kernel_psi1: R_start >= sqrt(lambda*) + 2 required");
    }
    if (!params.linear_mode && !phi.covers(r_start)) {
        throw ValidationError("kernel_psi1: Phi does not cover R_start");
    }
    const double r_lo = params.linear_mode ? 1e-4 : phi.r_min();

    const double nu = (lambda_star - params.d) / 2.0;
    const double uR = std::exp(-r_start * r_start / 2.0) * std::pow(r_start, nu);
    KernelRhs f{params.d - 1.0, lambda_star, params.p,
                params.q.value_or(0.0), params.q.has_value(),
                params.linear_mode, &phi};

    IntegrateOptions opt;
    opt.tol = tol;

    // backward in segments; psi is defined up to scale, so rescale on the
    // (unreachable in practice) approach to overflow
    double rescale = 1.0;
    RadialState state{-r_start, uR, -uR * (-r_start + nu / r_start)};
    std::vector<Profile> segments;
    const int n_seg = 6;
    for (int k = 1; k <= n_seg; ++k) {
        const double r_next = r_start * std::pow(r_lo / r_start, k / double(n_seg));
        BackwardRhs<KernelRhs> fb{f};
        segments.push_back(integrate(fb, state, -r_next, opt));
        const Profile& seg = segments.back();
        state = {seg.grid.back(), seg.values.back(), seg.derivs.back()};
        const double mag = std::max(std::fabs(state.u), std::fabs(state.du));
        if (mag > 1e250) {
            state.u *= 1e-250;
            state.du *= 1e-250;
            rescale *= 1e-250;
            for (auto& done : segments) {
                for (auto& v : done.values) v *= 1e-250;
                for (auto& v : done.derivs) v *= 1e-250;
            }
        }
    }

    // merge segments into one ascending-r node profile
    Profile merged;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        Profile res = resample_descending(*it, -it->grid.back(), -it->grid.front(), 1200);
        for (std::size_t i = 0; i < res.grid.size(); ++i) {
            if (!merged.grid.empty() && res.grid[i] <= merged.grid.back() * (1 + 1e-14))
                continue;
            merged.grid.push_back(res.grid[i]);
            merged.values.push_back(res.values[i]);
            merged.derivs.push_back(res.derivs[i]);
        }
    }
    merged.params = params;
    merged.lambda = lambda_star;
    merged.kind = ProfileKind::Kernel;
    merged.rescale = rescale;
    return merged;
}

Profile kernel_second(double lambda_star, const Profile& phi, double r_lo,
                      double r_hi, const ProblemParams& params, const Tol& tol)
{
    const auto em = euler_modes(r_lo, params);
    KernelRhs f{params.d - 1.0, lambda_star, params.p,
                params.q.value_or(0.0), params.q.has_value(),
                params.linear_mode, &phi};
    IntegrateOptions opt;
    opt.tol = tol;
    Profile prof = integrate(f, {r_lo, em.phi2, em.dphi2}, r_hi, opt);
    prof.params = params;
    prof.lambda = lambda_star;
    prof.kind = ProfileKind::Kernel;
    return prof;
}

WronskianResult wronskian(const Profile& f, const Profile& g)
{
    const double lo = std::max(f.r_min(), g.r_min());
    const double hi = std::min(f.r_max(), g.r_max());
    if (!(lo < hi)) {
        throw ValidationError("wronskian: disjoint grids");
    }
    const double d = f.params.d;
    WronskianResult out;
    const int n = 400;
    std::vector<double> wrd;
    for (int i = 0; i < n; ++i) {
        const double r = lo * std::pow(hi / lo, i / (n - 1.0));
        const double w = f.deriv(r) * g.eval(r) - g.deriv(r) * f.eval(r);
        out.r.push_back(r);
        out.w.push_back(w);
        wrd.push_back(w * std::pow(r, d - 1.0));
    }
    std::vector<double> sorted = wrd;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    out.median_w_rd = sorted[sorted.size() / 2];
    double dev = 0.0;
    for (double v : wrd) {
        dev = std::max(dev, std::fabs(v - out.median_w_rd));
    }
    out.max_rel_dev = dev / std::max(std::fabs(out.median_w_rd), 1e-300);
    return out;
}

EulerModes euler_modes(double r, const ProblemParams& params)
{
    if (!(r > 0.0)) throw ValidationError("euler_modes: r > 0 required");
    const auto c = derive_constants(params);
    const double nu = c.mode_frequency;
    const double cexp = (params.d - 2.0) / 2.0;
    const double L = std::log(r);
    const double s = std::sin(nu * L), co = std::cos(nu * L);
    const double rp = std::pow(r, -cexp);
    const double rp1 = std::pow(r, -cexp - 1.0);
    return {rp * s, rp * co, rp1 * (nu * co - cexp * s), rp1 * (-nu * s - cexp * co)};
}

LambdaQResult lambda_Q_residual(const Profile& Q, const ProblemParams& params)
{
    const double alpha = 2.0 / (params.p - 1.0);
    const double d = params.d;
    const double p = params.p;

    LambdaQResult out;
    const double h = 5e-4;
    auto g = [&](double tau) { return alpha * Q.eval(tau) + tau * Q.deriv(tau); };
    // g' from dense-output derivatives (Q'' = derivative of the du interpolant)
    auto gp = [&](double tau) {
        return (alpha + 1.0) * Q.deriv(tau) + tau * Q.deriv2(tau);
    };

    double max_rel = 0.0;
    for (double tau = 0.1; tau <= 10.0 + 1e-12; tau += 0.01) {
        const double gv = g(tau);
        const double gpv = gp(tau);
        // one numerical differentiation: 4th-order central difference of g'
        const double gpp = (-gp(tau + 2 * h) + 8.0 * gp(tau + h) - 8.0 * gp(tau - h) +
                            gp(tau - 2 * h)) / (12.0 * h);
        const double qv = Q.eval(tau);
        const double pot = p * std::pow(qv, p - 1.0);
        const double residual = -gpp - (d - 1.0) / tau * gpv - pot * gv;
        const double scale = std::fabs(gpp) + std::fabs((d - 1.0) / tau * gpv) +
                             std::fabs(pot * gv);
        out.tau.push_back(tau);
        out.lambda_q.push_back(gv);
        max_rel = std::max(max_rel, std::fabs(residual) / std::max(scale, 1e-300));
    }
    out.max_rel_residual = max_rel;
    return out;
}

TransformResidual exterior_transform_residual(const Profile& u, double epsilon,
                                              const ProblemParams& params,
                                              bool flip_sign)
{
    const double lambda = u.lambda;
    const double d_tilde = params.d + epsilon;
    const double e_t = (flip_sign ? +0.5 : -0.5) * epsilon; // v = r^{e_t} u
    GpRhs gp(params, lambda);

    const double lo = std::max(u.r_min() * 1.01, 0.05);
    const double hi = std::min(u.r_max() * 0.999, std::sqrt(std::max(lambda, 1.0)) + 1.0);
    if (!(lo < hi)) throw ValidationError("exterior_transform_residual: empty window");

    TransformResidual out;
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        const double r = lo * std::pow(hi / lo, i / (n - 1.0));
        const double uu = u.eval(r);
        const double up = u.deriv(r);
        const double upp = u.deriv2(r);
        const double w = std::pow(r, e_t);
        const double v = w * uu;
        const double vp = w * (up + e_t * uu / r);
        const double vpp = w * (upp + 2.0 * e_t * up / r + e_t * (e_t - 1.0) * uu / (r * r));

        double nl = 0.0;
        if (!params.linear_mode) {
            nl = std::pow(r, epsilon * (params.p - 1.0) / 2.0) *
                 std::pow(std::fabs(v), params.p - 1.0) * v;
            if (params.q) {
                nl += std::pow(r, epsilon * (*params.q - 1.0) / 2.0) *
                      std::pow(std::fabs(v), *params.q - 1.0) * v;
            }
        }
        const double extra = 0.5 * epsilon * (0.5 * epsilon + params.d - 2.0) * v / (r * r);
        const double residual =
            vpp + (d_tilde - 1.0) / r * vp - (r * r - lambda) * v + nl + extra;
        const double scale = std::fabs(vpp) + std::fabs((d_tilde - 1.0) / r * vp) +
                             std::fabs((r * r - lambda) * v) + std::fabs(nl) +
                             std::fabs(extra);
        const double rel = std::fabs(residual) / std::max(scale, 1e-300);
        if (rel > out.max_rel) {
            out.max_rel = rel;
            out.at_r = r;
        }
    }
    return out;
}

} // namespace gpss
