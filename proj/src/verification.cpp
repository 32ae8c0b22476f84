#include "gpss/verification.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "gpss/analysis.hpp"
#include "gpss/bifurcation.hpp"
#include "gpss/profiles.hpp"

namespace gpss {

namespace {

struct Reporter {
    RunSummary& summary;
    std::ostream* out;

    void add(CriterionResult c)
    {
        summary.criteria.push_back(c);
        if (out) *out << criterion_line(c) << std::endl;
    }

    void check_rel(const std::string& name, double measured, double target,
                   double rel_tol, const std::string& detail = "")
    {
        CriterionResult c{name, false, measured, target, rel_tol, detail};
        c.pass = std::fabs(measured - target) <=
                 rel_tol * std::max(std::fabs(target), 1e-300);
        add(c);
    }

    void check_abs(const std::string& name, double measured, double target,
                   double abs_tol, const std::string& detail = "")
    {
        CriterionResult c{name, false, measured, target, abs_tol, detail};
        c.pass = std::fabs(measured - target) <= abs_tol;
        add(c);
    }

    void check_flag(const std::string& name, bool pass, double measured,
                    double target, const std::string& detail = "")
    {
        add({name, pass, measured, target, 0.0, detail});
    }
};

ProblemParams canonical_params(bool with_q)
{
    ProblemParams p;
    p.d = 5;
    p.p = 3.0;
    if (with_q) p.q = 1.5;
    return p;
}

void verify_family(const RunConfig& cfg, const ProblemParams& params,
                   const std::string& sfx, Reporter& rep)
{
    const auto derived = derive_constants(params);
    const double d = params.d;

    ShootOptions sopt;
    sopt.tol = {std::min(cfg.rtol, 1e-12), cfg.atol};
    sopt.r_end_pad = cfg.r_end_pad;

    // --- Emden-Fowler tail frequency vs omega (1%)
    const Tol qtol{1e-13, 0.0};
    const auto Q = solve_emden_fowler(std::max(cfg.r_max, 1.2e4), qtol, params);
    {
        std::vector<double> r, y;
        for (int i = 0; i < 3000; ++i) {
            const double rr = 1e2 * std::pow(1e2, i / 2999.0);
            r.push_back(rr);
            y.push_back(std::pow(rr, (d - 2.0) / 2.0) *
                        (Q.eval(rr) - derived.A * std::pow(rr, -derived.alpha)));
        }
        const auto fit = fit_log_sinusoid(r, y, derived.omega);
        rep.check_rel("emden_tail_frequency" + sfx, fit.frequency, derived.omega,
                      0.01, "fit over r in [1e2,1e4]");
    }

    // --- singular solution
    auto lsr = find_lambda_star({0.05, d - 0.05}, cfg.lambda_tol, cfg.r0, params, sopt);
    const double ls = lsr.lambda_star;
    rep.check_flag("singular_lambda_range" + sfx, ls > 0.0 && ls < d, ls, 0.0,
                   "lambda* in (0, d)");
    {
        std::vector<double> rr, dev;
        for (double r = 2.0 * cfg.r0; r < 0.05; r *= 1.25) {
            rr.push_back(r);
            dev.push_back(std::fabs(lsr.phi.eval(r) * std::pow(r, derived.alpha) /
                                        derived.A - 1.0));
        }
        const auto pf = fit_power(rr, dev);
        rep.check_abs("singular_origin_exponent" + sfx, pf.exponent,
                      derived.origin_correction_exponent, 0.25);
    }
    {
        const auto ff = far_field_diagnostics(lsr.phi, ls, params, cfg.r_far);
        rep.check_abs("singular_plateau1" + sfx, ff.plateau1, (ls - d) / 2.0, 1e-3);
        rep.check_abs("singular_plateau2" + sfx, ff.plateau2,
                      (ls - d) * (ls + d - 4.0) / 8.0, 1e-2);
    }

    // --- kernel identities
    {
        const auto lq = lambda_Q_residual(Q, params);
        rep.check_flag("kernel_HLambdaQ" + sfx, lq.max_rel_residual < 1e-6,
                       lq.max_rel_residual, 1e-6,
                       "relative residual on tau in [0.1,10]");
    }
    {
        // deep-origin Phi for the near-origin frequency window
        ProblemParams with_lambda = params;
        with_lambda.lambda = ls;
        GpRhs f(params, ls);
        IntegrateOptions io;
        io.tol = {1e-13, 0.0};
        Profile phi_deep = integrate(f, origin_init_singular(1e-5, with_lambda),
                                     std::sqrt(ls) + cfg.r_end_pad, io);
        phi_deep.params = params;
        phi_deep.lambda = ls;
        phi_deep.kind = ProfileKind::Singular;

        const double r_start = std::sqrt(ls) + 2.0;
        const auto psi1 = kernel_psi1(ls, phi_deep, r_start, params);
        std::vector<double> r, y;
        for (int i = 0; i < 4000; ++i) {
            const double rr = 1e-5 * std::pow(0.3 / 1e-5, i / 3999.0);
            r.push_back(rr);
            y.push_back(std::pow(rr, (d - 2.0) / 2.0) * psi1.eval(rr));
        }
        const auto fit = fit_log_sinusoid(r, y, derived.omega);
        rep.check_rel("kernel_psi1_frequency" + sfx, fit.frequency, derived.omega,
                      0.02, "fit over r in [1e-5,0.3]");

        const auto psi2 = kernel_second(ls, phi_deep, 0.01, 1.0, params, {1e-13, 0.0});
        const auto wn = wronskian(psi2, psi1);
        rep.check_flag("kernel_wronskian_numeric" + sfx, wn.max_rel_dev < 1e-4,
                       wn.max_rel_dev, 1e-4, "W r^{d-1} constancy on [0.01,1]");
    }
    {
        Profile f, g;
        f.params = g.params = params;
        for (int i = 0; i < 16000; ++i) {
            const double r = 0.01 * std::pow(1e3, i / 15999.0);
            const auto em = euler_modes(r, params);
            f.grid.push_back(r);
            f.values.push_back(em.phi1);
            f.derivs.push_back(em.dphi1);
            g.grid.push_back(r);
            g.values.push_back(em.phi2);
            g.derivs.push_back(em.dphi2);
        }
        const auto we = wronskian(f, g);
        rep.check_flag("kernel_wronskian_euler" + sfx, we.max_rel_dev < 1e-10,
                       we.max_rel_dev, 1e-10, "analytic modes");
    }

    // --- the oscillation law over the sweep
    SweepOptions swo;
    swo.shoot = sopt;
    swo.threads = cfg.threads;
    swo.lambda_star_ref = ls;
    auto curve = sweep(log_grid(cfg.theta_min, cfg.theta_max, cfg.points),
                       {0.05, d - 0.05}, cfg.lambda_tol, params, swo);
    curve.lambda_star_ref = ls;
    curve.branch_points = extract_branch_points(curve, ls);
    CompareTolerances ct{cfg.frequency_tol, cfg.envelope_tol, cfg.center_tol, 0.02};
    const auto law = compare_theory(curve, derived, ct);

    rep.check_rel("law_frequency" + sfx, law.frequency_fit, law.frequency_theory,
                  cfg.frequency_tol,
                  law.frequency_matches_half ? "fit matches alpha*omega/2" : "");
    rep.check_abs("law_envelope_exponent" + sfx, law.envelope_exponent_fit,
                  law.envelope_exponent_theory, cfg.envelope_tol);
    rep.check_abs("law_center" + sfx, law.center, ls, cfg.center_tol,
                  "curve center vs independent lambda*");
    rep.check_flag("law_alternation" + sfx, law.pass_alternation,
                   static_cast<double>(curve.branch_points.size()), 0.0,
                   "extrema alternate in sign");
    rep.check_flag("law_affine_n" + sfx, law.pass_affine, law.slope_residual_rel,
                   0.02, law.slope_matches_half
                             ? "slope matches 2pi/(alpha*omega)"
                             : "slope matches pi/(alpha*omega)");

    // --- convergence to Phi at the branch points
    {
        const auto dn = matching_residual(curve, lsr.phi, cfg.r_star, params, sopt.tol);
        bool decreasing = dn.size() >= 3;
        double worst_ratio = 0.0;
        for (std::size_t i = 2; i < dn.size(); ++i) {
            worst_ratio = std::max(worst_ratio, dn[i] / dn[i - 1]);
            if (dn[i] >= dn[i - 1]) decreasing = false;
        }
        rep.check_flag("phi_convergence" + sfx, decreasing, worst_ratio, 1.0,
                       "D_n decreasing for n >= 3");
    }

    // --- exterior transform algebra
    {
        ShootOptions so2 = sopt;
        so2.lambda_ref = ls;
        const auto sr = shoot_lambda(40.0, {0.5, d - 0.05},
                                     std::min(cfg.lambda_tol, 1e-11), params, so2);
        const double eps = sr.lambda - ls;
        const auto straight = exterior_transform_residual(sr.profile, eps, params);
        rep.check_flag("transform_residual" + sfx, straight.max_rel < 1e-8,
                       straight.max_rel, 1e-8,
                       "epsilon = " + std::to_string(eps));
        const auto flipped = exterior_transform_residual(sr.profile, eps, params, true);
        rep.check_flag("transform_negative_control" + sfx,
                       flipped.max_rel > 1e-6 &&
                           flipped.max_rel > 100.0 * straight.max_rel,
                       flipped.max_rel, 1e-6, "sign-flipped transform must fail");
    }

    if (sfx.empty()) rep.summary.lambda_star = ls;
}

} // namespace

std::string criterion_line(const CriterionResult& c)
{
    std::ostringstream ss;
    ss << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": measured "
       << c.measured << " vs target " << c.target;
    if (c.tolerance > 0.0) ss << " (tol " << c.tolerance << ")";
    if (!c.detail.empty()) ss << " -- " << c.detail;
    return ss.str();
}

RunSummary run_verification(const RunConfig& cfg, std::ostream* progress)
{
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    RunSummary summary;
    Reporter rep{summary, progress};

    // closed-form constants of the canonical case
    const auto params = canonical_params(true);
    const auto c = derive_constants(params);
    summary.derived = c;
    rep.check_rel("constants_A", c.A, std::sqrt(2.0), 1e-12);
    rep.check_rel("constants_omega", c.omega, std::sqrt(15.0), 1e-12);
    rep.check_rel("constants_sigma", c.sigma, 1.5, 1e-12);
    rep.check_rel("constants_beta", c.beta, 2.0, 1e-12);
    rep.check_rel("constants_m", c.m, 1.0 / std::sqrt(2.0), 1e-12);
    rep.check_rel("constants_lambda1", c.lambda1, 5.0, 1e-12);
    rep.check_abs("constants_p_jl_11", joseph_lundgren(11), 6.92203, 1e-4);

    // linear oracle
    {
        ProblemParams lin = canonical_params(false);
        lin.linear_mode = true;
        ShootOptions sopt;
        sopt.tol = {std::min(cfg.rtol, 1e-12), cfg.atol};
        const auto sr = shoot_lambda(1.0, {4.0, 6.0}, 1e-10, lin, sopt);
        rep.check_abs("linear_lambda", sr.lambda, 5.0, 1e-9);
        const auto kk = extract_K(sr.profile, sr.lambda, lin, cfg.r_far);
        rep.check_abs("linear_K", kk.K, 1.0, 1e-6);
    }

    verify_family(cfg, canonical_params(true), "", rep);
    verify_family(cfg, canonical_params(false), "_pure", rep);

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

} // namespace gpss
