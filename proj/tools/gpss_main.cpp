// gpss: shooting, profiles and bifurcation diagnostics for the radial
// equation u'' + (d-1)/r u' - (r^2 - lambda) u + |u|^{q-1}u + |u|^{p-1}u = 0.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpss/analysis.hpp"
#include "gpss/bifurcation.hpp"
#include "gpss/config.hpp"
#include "gpss/constants.hpp"
#include "gpss/io.hpp"
#include "gpss/profiles.hpp"
#include "gpss/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Cli {
    gpss::RunConfig cfg;
    fs::path out_dir;
    std::vector<std::string> artifacts;

    fs::path cache_dir() const
    {
        if (const char* env = std::getenv("GPSS_CACHE_DIR"); env && *env) {
            return fs::path(env);
        }
        return out_dir / "cache";
    }

    void write(const fs::path& rel, const std::string& content)
    {
        const fs::path path = out_dir / rel;
        gpss::atomic_write(path, content);
        artifacts.push_back(path.string());
    }
};

json params_json(const gpss::ProblemParams& p)
{
    json j;
    j["d"] = p.d;
    j["p"] = p.p;
    if (p.q) j["q"] = *p.q;
    if (p.lambda) j["lambda"] = *p.lambda;
    j["linear_mode"] = p.linear_mode;
    return j;
}

json profile_sidecar(const gpss::Profile& prof)
{
    json j;
    j["params"] = params_json(prof.params);
    j["lambda"] = prof.lambda;
    j["kind"] = gpss::to_string(prof.kind);
    if (prof.event) {
        j["event"] = {{"type", gpss::to_string(prof.event->type)},
                      {"location", prof.event->r}};
    } else {
        j["event"] = nullptr;
    }
    return j;
}

std::string profile_csv(const gpss::Profile& prof)
{
    return gpss::csv_table({"r", "u", "du"}, {prof.grid, prof.values, prof.derivs});
}

gpss::ShootOptions shoot_options(const gpss::RunConfig& cfg)
{
    gpss::ShootOptions so;
    so.tol = {cfg.rtol, cfg.atol};
    so.r_end_pad = cfg.r_end_pad;
    so.r0_singular = cfg.r0;
    return so;
}

json sinfit_json(const gpss::SinFit& f)
{
    return {{"amplitude", f.amplitude}, {"frequency", f.frequency},
            {"phase", f.phase},         {"offset", f.offset},
            {"residual_rms", f.residual_rms},
            {"window", {f.window_lo, f.window_hi}}};
}

int cmd_constants(Cli& cli)
{
    const auto c = gpss::derive_constants(cli.cfg.params);
    json j;
    j["A"] = c.A;
    j["alpha"] = c.alpha;
    j["sigma"] = c.sigma;
    j["beta"] = c.beta;
    j["omega"] = c.omega;
    j["mode_frequency"] = c.mode_frequency;
    j["p_jl"] = std::isinf(c.p_jl) ? json("inf") : json(c.p_jl);
    j["lambda1"] = c.lambda1;
    j["m"] = c.m;
    j["mu"] = c.mu;
    j["origin_correction_exponent"] = c.origin_correction_exponent;
    j["oscillatory"] = c.oscillatory;
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    cli.write("constants.json", text);
    return 0;
}

int cmd_emden(Cli& cli)
{
    const auto& cfg = cli.cfg;
    const auto c = gpss::derive_constants(cfg.params);
    const auto Q = gpss::solve_emden_fowler(cfg.r_max, {std::min(cfg.rtol, 1e-13), cfg.atol},
                                            cfg.params);
    cli.write("emden.csv", profile_csv(Q));
    json side = profile_sidecar(Q);

    // tail fit of r^{(d-2)/2} (Q - A r^{-alpha}) over the outer two decades
    const double hi = Q.r_max();
    const double lo = std::max(hi / 1e2, 10.0);
    std::vector<double> r, y;
    for (int i = 0; i < 3000; ++i) {
        const double rr = lo * std::pow(hi / lo, i / 2999.0);
        r.push_back(rr);
        y.push_back(std::pow(rr, (cfg.params.d - 2.0) / 2.0) *
                    (Q.eval(rr) - c.A * std::pow(rr, -c.alpha)));
    }
    const auto fit = gpss::fit_log_sinusoid(r, y, c.omega);
    side["tail_fit"] = sinfit_json(fit);
    side["tail_fit"]["frequency_over_omega"] = fit.frequency / c.omega;
    side["tail_fit"]["frequency_over_half_omega"] = fit.frequency / c.mode_frequency;
    cli.write("emden.json", side.dump(2) + "\n");
    std::cout << "Q solved to r = " << hi << "; tail frequency " << fit.frequency
              << " (omega = " << c.omega << ", omega/2 = " << c.mode_frequency
              << ")\n";
    return 0;
}

int cmd_singular(Cli& cli)
{
    const auto& cfg = cli.cfg;
    const auto lsr = gpss::find_lambda_star({0.05, cfg.params.d - 0.05}, cfg.lambda_tol,
                                            cfg.r0, cfg.params, shoot_options(cfg),
                                            cli.cache_dir());
    const double ls = lsr.lambda_star;
    cli.write("phi.csv", profile_csv(lsr.phi));
    cli.write("phi.json", profile_sidecar(lsr.phi).dump(2) + "\n");

    const auto ff = gpss::far_field_diagnostics(lsr.phi, ls, cfg.params, cfg.r_far);
    const auto kk = gpss::extract_K(lsr.phi, ls, cfg.params, cfg.r_far);
    cli.write("farfield.csv",
              gpss::csv_table({"r", "e_over_psi", "plateau2_series"},
                              {ff.r, ff.e_over_psi, ff.plateau2_series}));

    json j;
    j["lambda_star"] = ls;
    j["cache_hit"] = lsr.cache_hit;
    j["achieved_tol"] = lsr.shoot.achieved_tol;
    j["iterations"] = lsr.shoot.iterations;
    j["K"] = kk.K;
    j["K_drift"] = kk.drift;
    j["plateau1"] = ff.plateau1;
    j["plateau1_target"] = (ls - cfg.params.d) / 2.0;
    j["plateau2"] = ff.plateau2;
    j["plateau2_target"] = (ls - cfg.params.d) * (ls + cfg.params.d - 4.0) / 8.0;
    j["no_plateau_warning"] = ff.no_plateau;
    json sc = json::array();
    for (const auto& [lo, hi] : lsr.sign_changes) sc.push_back({lo, hi});
    j["prescan_sign_changes"] = sc;
    cli.write("singular.json", j.dump(2) + "\n");
    std::cout << "lambda* = " << gpss::format_g17(ls)
              << (lsr.cache_hit ? " (cache hit)" : "") << ", K = " << kk.K << "\n";
    return 0;
}

int cmd_shoot(Cli& cli, double theta)
{
    const auto& cfg = cli.cfg;
    auto so = shoot_options(cfg);
    std::pair<double, double> bracket{0.05, cfg.params.d - 0.05};
    if (cfg.params.linear_mode) bracket = {cfg.params.d - 1.0, cfg.params.d + 1.0};
    const auto res = gpss::shoot_lambda(theta, bracket, cfg.lambda_tol, cfg.params, so);
    cli.write("shoot_profile.csv", profile_csv(res.profile));

    json j;
    j["theta"] = theta;
    j["lambda"] = res.lambda;
    j["iterations"] = res.iterations;
    j["achieved_tol"] = res.achieved_tol;
    json hist = json::array();
    for (const auto& b : res.bracket_history) {
        hist.push_back({{"lo", b.lo},
                        {"hi", b.hi},
                        {"class_lo", gpss::to_string(b.class_lo)},
                        {"class_hi", gpss::to_string(b.class_hi)}});
    }
    j["bracket_history"] = hist;
    cli.write("shoot.json", j.dump(2) + "\n");
    std::cout << "lambda(" << theta << ") = " << gpss::format_g17(res.lambda) << "\n";
    return 0;
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plot the bifurcation curve and branch points produced by `gpss sweep`."""
import csv
import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def read(name):
    with open(os.path.join(here, name)) as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}

curve = read("curve.csv")
bps = read("branch_points.csv")
with open(os.path.join(here, "theory_report.json")) as f:
    rep = json.load(f)

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 8), sharex=True)
ax1.semilogx(curve["theta"], curve["lambda"], "-", lw=0.8, label="lambda(theta)")
ax1.axhline(rep["lambda_star"], color="k", ls="--", lw=0.8, label="lambda*")
if bps:
    ax1.plot(bps["theta_n"], bps["lambda_n"], "o", ms=4, label="branch points")
ax1.set_ylabel("lambda")
ax1.legend()

ls = rep["lambda_star"]
resid = [l - ls for l in curve["lambda"]]
ax2.semilogx(curve["theta"], resid, "-", lw=0.8)
ax2.axhline(0.0, color="k", lw=0.5)
ax2.set_xlabel("theta")
ax2.set_ylabel("lambda - lambda*")
fig.suptitle("fit freq %.5f (alpha*omega = %.5f, half = %.5f)" % (
    rep["frequency_fit"], rep["frequency_theory"], rep["frequency_theory_half"]))
out = os.path.join(here, "sweep.png")
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
)PY";

int cmd_sweep(Cli& cli)
{
    const auto& cfg = cli.cfg;
    const auto lsr = gpss::find_lambda_star({0.05, cfg.params.d - 0.05}, cfg.lambda_tol,
                                            cfg.r0, cfg.params, shoot_options(cfg),
                                            cli.cache_dir());

    gpss::SweepOptions swo;
    swo.shoot = shoot_options(cfg);
    swo.threads = cfg.threads;
    swo.lambda_star_ref = lsr.lambda_star;
    auto curve = gpss::sweep(gpss::log_grid(cfg.theta_min, cfg.theta_max, cfg.points),
                             {0.05, cfg.params.d - 0.05}, cfg.lambda_tol, cfg.params,
                             swo);
    curve.lambda_star_ref = lsr.lambda_star;
    curve.branch_points = gpss::extract_branch_points(curve, lsr.lambda_star);

    // curve artifacts land before the theory comparison, which needs
    // enough branch points and may refuse short sweeps
    std::vector<double> th, la, it, at;
    for (const auto& s : curve.samples) {
        if (!s.converged) continue;
        th.push_back(s.theta);
        la.push_back(s.lambda);
        it.push_back(s.iterations);
        at.push_back(s.achieved_tol);
    }
    cli.write("curve.csv", gpss::csv_table({"theta", "lambda", "iterations",
                                            "achieved_tol"},
                                           {th, la, it, at}));
    std::vector<double> ns, ths, las;
    for (const auto& bp : curve.branch_points) {
        ns.push_back(bp.n);
        ths.push_back(bp.theta);
        las.push_back(bp.lambda);
    }
    cli.write("branch_points.csv",
              gpss::csv_table({"n", "theta_n", "lambda_n"}, {ns, ths, las}));

    gpss::CompareTolerances ct{cfg.frequency_tol, cfg.envelope_tol, cfg.center_tol, 0.02};
    const auto rep = gpss::compare_theory(curve, gpss::derive_constants(cfg.params), ct);
    const auto dn = gpss::matching_residual(curve, lsr.phi, cfg.r_star, cfg.params,
                                            swo.shoot.tol);
    cli.write("matching.csv", gpss::csv_table({"n", "theta_n", "D_n"}, {ns, ths, dn}));

    json j;
    j["frequency_fit"] = rep.frequency_fit;
    j["frequency_theory"] = rep.frequency_theory;
    j["frequency_theory_half"] = rep.frequency_theory_half;
    j["frequency_matches_half"] = rep.frequency_matches_half;
    j["envelope_exponent_fit"] = rep.envelope_exponent_fit;
    j["envelope_exponent_theory"] = rep.envelope_exponent_theory;
    j["center"] = rep.center;
    j["lambda_star"] = rep.lambda_star;
    j["slope_n_fit"] = rep.slope_n_fit;
    j["slope_candidate"] = rep.slope_candidate;
    j["slope_candidate_half"] = rep.slope_candidate_half;
    j["slope_matches_half"] = rep.slope_matches_half;
    j["slope_residual_rel"] = rep.slope_residual_rel;
    j["pass"] = {{"frequency", rep.pass_frequency},
                 {"envelope", rep.pass_envelope},
                 {"center", rep.pass_center},
                 {"alternation", rep.pass_alternation},
                 {"affine_n", rep.pass_affine}};
    j["parallel_mode"] = curve.parallel_mode;
    j["period_fit"] = sinfit_json(curve.period_fit);
    cli.write("theory_report.json", j.dump(2) + "\n");
    cli.write("plot_sweep.py", kPlotScript);

    std::cout << curve.samples.size() << " points, "
              << curve.branch_points.size() << " branch points; fit frequency "
              << rep.frequency_fit << " vs alpha*omega " << rep.frequency_theory
              << " (half " << rep.frequency_theory_half << ")\n";
    return 0;
}

int cmd_kernel(Cli& cli)
{
    const auto& cfg = cli.cfg;
    const auto c = gpss::derive_constants(cfg.params);
    const auto lsr = gpss::find_lambda_star({0.05, cfg.params.d - 0.05}, cfg.lambda_tol,
                                            cfg.r0, cfg.params, shoot_options(cfg),
                                            cli.cache_dir());
    const double ls = lsr.lambda_star;

    gpss::ProblemParams with_lambda = cfg.params;
    with_lambda.lambda = ls;
    gpss::GpRhs f(cfg.params, ls);
    gpss::IntegrateOptions io;
    io.tol = {1e-13, 0.0};
    auto phi = gpss::integrate(f, gpss::origin_init_singular(1e-5, with_lambda),
                               std::sqrt(ls) + cfg.r_end_pad, io);
    phi.params = cfg.params;
    phi.lambda = ls;
    phi.kind = gpss::ProfileKind::Singular;

    const auto psi1 = gpss::kernel_psi1(ls, phi, std::sqrt(ls) + 2.0, cfg.params);
    cli.write("psi1.csv", profile_csv(psi1));

    std::vector<double> r, y;
    for (int i = 0; i < 4000; ++i) {
        const double rr = 1e-5 * std::pow(0.3 / 1e-5, i / 3999.0);
        r.push_back(rr);
        y.push_back(std::pow(rr, (cfg.params.d - 2.0) / 2.0) * psi1.eval(rr));
    }
    const auto fit = gpss::fit_log_sinusoid(r, y, c.omega);
    const auto psi2 = gpss::kernel_second(ls, phi, 0.01, 1.0, cfg.params, {1e-13, 0.0});
    const auto wn = gpss::wronskian(psi2, psi1);

    json j;
    j["lambda_star"] = ls;
    j["origin_fit"] = sinfit_json(fit);
    j["origin_fit"]["frequency_over_omega"] = fit.frequency / c.omega;
    j["origin_fit"]["frequency_over_half_omega"] = fit.frequency / c.mode_frequency;
    j["wronskian_median"] = wn.median_w_rd;
    j["wronskian_max_rel_dev"] = wn.max_rel_dev;
    j["rescale"] = psi1.rescale;
    cli.write("kernel.json", j.dump(2) + "\n");
    std::cout << "psi1 near-origin frequency " << fit.frequency << " (omega/2 = "
              << c.mode_frequency << "); wronskian dev " << wn.max_rel_dev << "\n";
    return 0;
}

int cmd_verify(Cli& cli)
{
    auto summary = gpss::run_verification(cli.cfg, &std::cout);
    summary.artifacts = cli.artifacts;
    cli.write("run_summary.json", gpss::summary_to_json(summary));
    int failed = 0;
    for (const auto& c : summary.criteria) {
        if (!c.pass) ++failed;
    }
    std::cout << summary.criteria.size() << " criteria, " << failed
              << " failed, wall " << summary.wall_seconds << " s\n";
    if (failed > 0) {
        std::cerr << "verify: " << failed << " criteria failed\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"shooting and matched-asymptotics diagnostics for the radial "
                 "Gross-Pitaevskii equation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int parallel = 0;
    bool seed_free = false;
    double theta = 10.0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--parallel", parallel, "worker threads for the sweep");
    app.add_flag("--seed-free", seed_free,
                 "confirm deterministic mode (always on; accepted for compatibility)");

    auto* sc_constants = app.add_subcommand("constants", "print derived constants");
    auto* sc_emden = app.add_subcommand("emden", "solve the profile equation and fit its tail");
    auto* sc_singular = app.add_subcommand("singular", "find lambda* and run far-field diagnostics");
    auto* sc_shoot = app.add_subcommand("shoot", "bisect one eigenvalue lambda(theta)");
    sc_shoot->add_option("--theta", theta, "initial height u(0)");
    auto* sc_sweep = app.add_subcommand("sweep", "bifurcation curve, branch points, law report");
    auto* sc_kernel = app.add_subcommand("kernel", "kernel solution psi1 and its fits");
    auto* sc_verify = app.add_subcommand("verify", "run the full verification suite");
    for (auto* sc : {sc_constants, sc_emden, sc_singular, sc_shoot, sc_sweep,
                     sc_kernel, sc_verify}) {
        sc->fallthrough(); // global options may follow the subcommand
    }

    CLI11_PARSE(app, argc, argv);

    Cli cli;
    try {
        if (!config_path.empty()) {
            cli.cfg = gpss::config_from_json(gpss::read_file(config_path));
        }
        if (!out_override.empty()) cli.cfg.output_dir = out_override;
        if (parallel > 0) cli.cfg.threads = parallel;
        gpss::validate_config(cli.cfg);
        cli.out_dir = cli.cfg.output_dir;

        if (sc_constants->parsed()) return cmd_constants(cli);
        if (sc_emden->parsed()) return cmd_emden(cli);
        if (sc_singular->parsed()) return cmd_singular(cli);
        if (sc_shoot->parsed()) return cmd_shoot(cli, theta);
        if (sc_sweep->parsed()) return cmd_sweep(cli);
        if (sc_kernel->parsed()) return cmd_kernel(cli);
        if (sc_verify->parsed()) return cmd_verify(cli);
    } catch (const gpss::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const gpss::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const gpss::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
