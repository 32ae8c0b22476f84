#include "gpss/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace gpss {

std::vector<double> log_grid(double lo, double hi, int points)
{
    if (!(lo > 0.0) || !(hi > lo) || points < 2) {
        throw ValidationError("log_grid: need 0 < lo < hi and points >= 2");
    }
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        g[i] = lo * std::pow(hi / lo, i / (points - 1.0));
    }
    return g;
}

namespace {

ShootSample shoot_one(double theta, std::pair<double, double> bracket, double tol,
                      const ProblemParams& params, const ShootOptions& opt)
{
    ShootSample s;
    s.theta = theta;
    try {
        auto res = shoot_lambda(theta, bracket, tol, params, opt);
        s.lambda = res.lambda;
        s.iterations = res.iterations;
        s.achieved_tol = res.achieved_tol;
        s.converged = true;
    } catch (const ConvergenceError&) {
        s.converged = false;
    }
    return s;
}

} // namespace

BifurcationCurve sweep(const std::vector<double>& theta_grid,
                       std::pair<double, double> bracket, double tol,
                       const ProblemParams& params, const SweepOptions& opt)
{
    if (theta_grid.empty()) throw ValidationError("sweep: empty theta grid");
    for (std::size_t i = 1; i < theta_grid.size(); ++i) {
        if (!(theta_grid[i] > theta_grid[i - 1])) {
            throw ValidationError("sweep: theta grid must be strictly increasing");
        }
    }

    BifurcationCurve curve;
    curve.samples.resize(theta_grid.size());
    if (opt.lambda_star_ref) curve.lambda_star_ref = *opt.lambda_star_ref;

    const bool parallel = opt.threads > 1;
    curve.parallel_mode = parallel;

    if (!parallel && opt.warm_start) {
        std::optional<double> prev;
        for (std::size_t i = 0; i < theta_grid.size(); ++i) {
            const double theta = theta_grid[i];
            ShootOptions so = opt.shoot;
            so.lambda_ref = prev ? prev : opt.lambda_star_ref;
            ShootSample s;
            s.theta = theta;
            s.converged = false;
            if (prev) {
                // expanding warm bracket around the previous eigenvalue
                for (double w = opt.warm_width; w <= 16.0 * opt.warm_width; w *= 2.0) {
                    const double lo = std::max(*prev - w, bracket.first);
                    const double hi = std::min(*prev + w, bracket.second);
                    if (!(lo < hi)) break;
                    try {
                        auto res = shoot_lambda(theta, {lo, hi}, tol, params, so);
                        s.lambda = res.lambda;
                        s.iterations = res.iterations;
                        s.achieved_tol = res.achieved_tol;
                        s.converged = true;
                        break;
                    } catch (const NoSignChangeError&) {
                        continue;
                    } catch (const ConvergenceError&) {
                        break;
                    }
                }
            }
            if (!s.converged) {
                s = shoot_one(theta, bracket, tol, params, so);
            }
            curve.samples[i] = s;
            if (s.converged) prev = s.lambda;
        }
    } else {
        // per-point pre-scans; order-independent and safe to fan out
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= theta_grid.size()) return;
                ShootOptions so = opt.shoot;
                so.lambda_ref = opt.lambda_star_ref;
                curve.samples[i] = shoot_one(theta_grid[i], bracket, tol, params, so);
            }
        };
        if (parallel) {
            std::vector<std::thread> pool;
            const int n = std::min<int>(opt.threads, static_cast<int>(theta_grid.size()));
            pool.reserve(n);
            for (int t = 0; t < n; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        } else {
            worker();
        }
    }

    const auto converged = static_cast<double>(
        std::count_if(curve.samples.begin(), curve.samples.end(),
                      [](const ShootSample& s) { return s.converged; }));
    const double frac = converged / static_cast<double>(curve.samples.size());
    if (frac < opt.min_converged_fraction) {
        std::ostringstream ss;
        ss << "sweep: degenerate, only " << converged << "/" << curve.samples.size()
           << " points converged; failures at theta =";
        int listed = 0;
        for (const auto& s : curve.samples) {
            if (!s.converged && listed++ < 8) ss << " " << s.theta;
        }
        throw SweepDegenerateError(ss.str());
    }
    return curve;
}

std::vector<BranchPoint> extract_branch_points(const BifurcationCurve& curve,
                                               double lambda_star)
{
    std::vector<double> x, y;
    for (const auto& s : curve.samples) {
        if (!s.converged) continue;
        x.push_back(std::log(s.theta));
        y.push_back(s.lambda - lambda_star);
    }
    if (x.size() < 8) throw CurveMonotoneError("extract_branch_points: too few samples");

    std::vector<BranchPoint> points;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double dl = y[i] - y[i - 1];
        const double dr = y[i + 1] - y[i];
        if (!(dl * dr < 0.0)) continue;
        // parabola through the three samples; vertex in log theta
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double d0 = (y1 - y0) / (x1 - x0);
        const double d1 = (y2 - y1) / (x2 - x1);
        const double curvature = (d1 - d0) / (x2 - x0);
        double xv = x1, yv = y1;
        if (curvature != 0.0) {
            // vertex of y = y0 + d0 (x-x0) + curvature (x-x0)(x-x1)
            xv = 0.5 * (x0 + x1 - d0 / curvature);
            yv = y0 + d0 * (xv - x0) + curvature * (xv - x0) * (xv - x1);
        }
        BranchPoint bp;
        bp.theta = std::exp(xv);
        bp.lambda = yv + lambda_star;
        points.push_back(bp);
    }
    if (points.empty()) {
        throw CurveMonotoneError(
            "extract_branch_points: no extrema (monotone regime or short sweep)");
    }

    // merge consecutive same-sign extrema, keeping the larger amplitude
    std::vector<BranchPoint> merged;
    for (const auto& bp : points) {
        const double sgn = bp.lambda - lambda_star;
        if (!merged.empty() &&
            (merged.back().lambda - lambda_star) * sgn > 0.0) {
            if (std::fabs(sgn) > std::fabs(merged.back().lambda - lambda_star)) {
                merged.back() = bp;
            }
            continue;
        }
        merged.push_back(bp);
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
        merged[i].n = static_cast<int>(i) + 1;
    }
    return merged;
}

TheoryReport compare_theory(BifurcationCurve& curve, const DerivedConstants& derived,
                            const CompareTolerances& tols)
{
    const auto& bps = curve.branch_points;
    if (bps.size() < 4) {
        throw ValidationError("compare_theory: need >= 4 branch points");
    }
    const double lambda_star = curve.lambda_star_ref;

    TheoryReport rep;
    rep.lambda_star = lambda_star;
    rep.frequency_theory = derived.alpha * derived.omega;
    rep.frequency_theory_half = 0.5 * rep.frequency_theory;
    rep.envelope_exponent_theory = (1.0 - derived.sigma) / derived.alpha;
    rep.slope_candidate = M_PI / (derived.alpha * derived.omega);
    rep.slope_candidate_half = 2.0 * M_PI / (derived.alpha * derived.omega);

    // envelope fit over branch-point amplitudes, noise floor excluded
    double max_tol = 0.0;
    for (const auto& s : curve.samples) {
        if (s.converged) max_tol = std::max(max_tol, s.achieved_tol);
    }
    const double floor = 1e3 * max_tol;
    std::vector<double> th, amp;
    for (const auto& bp : bps) {
        const double a = std::fabs(bp.lambda - lambda_star);
        if (a <= floor) continue;
        th.push_back(bp.theta);
        amp.push_back(a);
    }
    if (th.size() < 3) throw ValidationError("compare_theory: envelope noise floor ate the points");
    curve.envelope_fit = fit_power(th, amp);
    rep.envelope_exponent_fit = curve.envelope_fit.exponent;

    // frequency fit on the envelope-normalized oscillation
    std::vector<double> rs, ys;
    for (const auto& s : curve.samples) {
        if (!s.converged) continue;
        const double env = curve.envelope_fit.coefficient *
                           std::pow(s.theta, curve.envelope_fit.exponent);
        rs.push_back(s.theta);
        ys.push_back((s.lambda - lambda_star) / env);
    }
    curve.period_fit = fit_log_sinusoid(rs, ys, rep.frequency_theory);
    rep.frequency_fit = curve.period_fit.frequency;
    rep.frequency_matches_half =
        std::fabs(rep.frequency_fit - rep.frequency_theory_half) <
        std::fabs(rep.frequency_fit - rep.frequency_theory);

    // curve center: linear LS on lambda ~ c + A env sin(f x) + B env cos(f x)
    {
        const double f = rep.frequency_fit;
        double m[3][3] = {}, v[3] = {};
        for (const auto& s : curve.samples) {
            if (!s.converged) continue;
            const double x = std::log(s.theta);
            const double env = curve.envelope_fit.coefficient *
                               std::pow(s.theta, curve.envelope_fit.exponent);
            const double basis[3] = {1.0, env * std::sin(f * x), env * std::cos(f * x)};
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
                v[a] += basis[a] * s.lambda;
            }
        }
        // 3x3 solve
        double aug[3][4];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
            aug[i][3] = v[i];
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row)
                if (std::fabs(aug[row][col]) > std::fabs(aug[piv][col])) piv = row;
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
        rep.center = coef[0];
    }

    // alternation of extremum signs
    rep.alternating = true;
    for (std::size_t i = 1; i < bps.size(); ++i) {
        if ((bps[i].lambda - lambda_star) * (bps[i - 1].lambda - lambda_star) >= 0.0) {
            rep.alternating = false;
        }
    }

    // affine law log theta_n = a n + b over the extrema
    {
        double sn = 0, sx = 0, snn = 0, snx = 0;
        const auto n = static_cast<double>(bps.size());
        for (const auto& bp : bps) {
            sn += bp.n;
            sx += std::log(bp.theta);
            snn += static_cast<double>(bp.n) * bp.n;
            snx += bp.n * std::log(bp.theta);
        }
        rep.slope_n_fit = (n * snx - sn * sx) / (n * snn - sn * sn);
        const double intercept = (sx - rep.slope_n_fit * sn) / n;
        double max_res = 0.0;
        for (const auto& bp : bps) {
            max_res = std::max(max_res, std::fabs(std::log(bp.theta) - intercept -
                                                  rep.slope_n_fit * bp.n));
        }
        rep.slope_residual_rel = max_res / std::fabs(rep.slope_n_fit);
        rep.slope_matches_half =
            std::fabs(rep.slope_n_fit - rep.slope_candidate_half) <
            std::fabs(rep.slope_n_fit - rep.slope_candidate);
    }

    rep.pass_frequency = std::fabs(rep.frequency_fit - rep.frequency_theory) /
                             rep.frequency_theory <
                         tols.frequency_tol;
    rep.pass_envelope = std::fabs(rep.envelope_exponent_fit -
                                  rep.envelope_exponent_theory) < tols.envelope_tol;
    rep.pass_center = std::fabs(rep.center - lambda_star) < tols.center_tol;
    rep.pass_alternation = rep.alternating;
    rep.pass_affine = rep.slope_residual_rel < tols.slope_residual_tol;
    return rep;
}

std::vector<double> matching_residual(const BifurcationCurve& curve,
                                      const Profile& phi, double r_star,
                                      const ProblemParams& params, const Tol& tol)
{
    if (!phi.covers(3.0) || !phi.covers(r_star)) {
        throw ValidationError("matching_residual: Phi must cover [r_star, 3]");
    }
    std::vector<double> dn;
    for (const auto& bp : curve.branch_points) {
        GpRhs f(params, bp.lambda);
        IntegrateOptions io;
        io.tol = tol;
        const double r0 = smooth_start_radius(bp.theta, params);
        Profile u = integrate(f, origin_init_smooth(bp.theta, r0, params, bp.lambda),
                              3.2, io);
        double worst = 0.0;
        for (int i = 0; i < 400; ++i) {
            const double r = r_star * std::pow(3.0 / r_star, i / 399.0);
            worst = std::max(worst, std::fabs(u.eval(r) - phi.eval(r)));
        }
        dn.push_back(worst);
    }
    return dn;
}

} // namespace gpss
