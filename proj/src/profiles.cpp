#include "gpss/profiles.hpp"

#include "gpss/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace gpss {

namespace {

EventConfig shoot_events(const ProblemParams& params, double lambda,
                         double scale, const ShootOptions& opt)
{
    EventConfig ev;
    ev.detect_zero_cross = true;
    ev.cap_abs = 1e3 * std::max(scale, 1.0);
    ev.turn_r = std::sqrt(std::max(lambda, 0.0));
    ev.decay_floor_rel = opt.decay_floor_rel;
    if (!params.linear_mode) {
        ev.ceiling_factor = opt.ceiling_factor;
        ev.ceiling_pow = 1.0 / (params.p - 1.0);
    }
    return ev;
}

double shoot_r_end(double lambda, const ShootOptions& opt)
{
    return std::min(std::sqrt(std::max(lambda, 0.0)) + opt.r_end_pad, opt.r_end_cap);
}

using ClassifyFn = std::function<Classification(double)>;

struct BisectOutcome {
    double lambda;
    std::vector<BracketRecord> history;
    int iterations = 0;
    double achieved_tol = 0.0;
};

std::vector<std::pair<double, double>>
prescan_sign_changes(const ClassifyFn& cls, double lo, double hi, int n,
                     std::vector<ClassKind>* kinds_out = nullptr)
{
    std::vector<std::pair<double, double>> flips;
    std::vector<double> xs(n);
    std::vector<ClassKind> ks(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = lo + (hi - lo) * i / (n - 1.0);
        ks[i] = cls(xs[i]).kind;
    }
    int prev = -1;
    for (int i = 0; i < n; ++i) {
        if (ks[i] == ClassKind::Undetermined || ks[i] == ClassKind::Decaying) continue;
        if (prev >= 0 && ks[i] != ks[prev]) flips.emplace_back(xs[prev], xs[i]);
        prev = i;
    }
    if (kinds_out) *kinds_out = std::move(ks);
    return flips;
}

BisectOutcome bisect_lambda(const ClassifyFn& cls, double lo, double hi,
                            double tol, const ShootOptions& opt)
{
    if (!(lo < hi)) throw ValidationError("shoot: bracket lo < hi required");
    if (!(tol > 0.0)) throw ValidationError("shoot: tol > 0 required");

    BisectOutcome out{};
    ClassKind clo = cls(lo).kind;
    ClassKind chi = cls(hi).kind;

    auto decisive = [](ClassKind k) {
        return k == ClassKind::CrossesZero || k == ClassKind::BlowsUpPositive;
    };

    if (clo == ClassKind::Decaying) {
        out.lambda = lo;
        out.achieved_tol = 0.0;
        return out;
    }
    if (chi == ClassKind::Decaying) {
        out.lambda = hi;
        out.achieved_tol = 0.0;
        return out;
    }

    if (!decisive(clo) || !decisive(chi) || clo == chi) {
        const auto flips = prescan_sign_changes(cls, lo, hi, opt.prescan_points);
        if (flips.empty()) {
            std::ostringstream ss;
            ss << "shoot: no sign change in [" << lo << ", " << hi
               << "] (endpoints " << to_string(clo) << "/" << to_string(chi) << ")";
            throw NoSignChangeError(ss.str());
        }
        const double ref = opt.lambda_ref ? *opt.lambda_ref : 0.5 * (lo + hi);
        auto best = std::min_element(
            flips.begin(), flips.end(), [&](const auto& a, const auto& b) {
                return std::fabs(0.5 * (a.first + a.second) - ref) <
                       std::fabs(0.5 * (b.first + b.second) - ref);
            });
        lo = best->first;
        hi = best->second;
        clo = cls(lo).kind;
        chi = cls(hi).kind;
        if (!decisive(clo) || !decisive(chi) || clo == chi) {
            throw ConvergenceError("shoot: pre-scan bracket did not classify");
        }
    }

    out.history.push_back({lo, hi, clo, chi});
    int stagnation = 0;
    while (hi - lo > tol) {
        const double width = hi - lo;
        double mid = 0.5 * (lo + hi);
        ClassKind c = cls(mid).kind;
        if (c == ClassKind::Undetermined) {
            // nudge off the separatrix before declaring stagnation
            bool resolved = false;
            for (double frac : {0.55, 0.45, 0.65, 0.35}) {
                mid = lo + frac * width;
                c = cls(mid).kind;
                if (c != ClassKind::Undetermined) {
                    resolved = true;
                    break;
                }
            }
            if (!resolved) {
                if (++stagnation > 3) {
                    std::ostringstream ss;
                    ss << "shoot: bracket stagnation, repeated Undetermined near ["
                       << lo << ", " << hi << "], width " << width;
                    throw ConvergenceError(ss.str());
                }
                continue;
            }
        }
        if (c == ClassKind::Decaying) {
            out.lambda = mid;
            out.achieved_tol = std::min(width, tol);
            ++out.iterations;
            return out;
        }
        if (c == clo) lo = mid;
        else hi = mid;
        ++out.iterations;
        out.history.push_back({lo, hi, clo, chi});
    }
    out.lambda = 0.5 * (lo + hi);
    out.achieved_tol = hi - lo;
    return out;
}

} // namespace

double smooth_start_radius(double theta, const ProblemParams& params)
{
    if (params.linear_mode) return 3e-4;
    const double interior = 1e-2 * std::pow(std::max(theta, 1.0), -(params.p - 1.0) / 2.0);
    return std::clamp(interior, 1e-6, 1e-2);
}

Classification classify_shot(const RadialState& init, const ProblemParams& params,
                             double lambda, const ShootOptions& opt)
{
    GpRhs f(params, lambda);
    IntegrateOptions io;
    io.tol = opt.tol;
    io.events = shoot_events(params, lambda, std::fabs(init.u), opt);
    io.events.decay_floor_rel = opt.classify_floor_rel;
    io.keep_profile = false;

    // Near-separatrix trajectories are still falling and eventless at the
    // nominal r_end; extend in segments until an event decides or the hard
    // cap is reached, then let the terminal rules speak.
    const double r_end = shoot_r_end(lambda, opt);
    const double r_cap = r_end + opt.r_extend;
    Profile prof = integrate(f, init, r_end, io);
    while (!prof.event && prof.grid.back() < r_cap - 1e-9) {
        RadialState last{prof.grid.back(), prof.values.back(), prof.derivs.back()};
        if (!(last.u > 0.0) || !(last.du < 0.0)) break; // terminal rules decide
        const double next = std::min(prof.grid.back() + 2.0, r_cap);
        io.events.u_turn_seed = prof.u_turn;
        Profile seg = integrate(f, last, next, io);
        if (seg.u_turn == 0.0) seg.u_turn = prof.u_turn;
        prof = std::move(seg);
    }
    return classify_tail(prof, params, lambda);
}

ShootResult shoot_lambda(double theta, std::pair<double, double> bracket,
                         double tol, const ProblemParams& params,
                         const ShootOptions& opt)
{
    validate(params, ValidationMode::basic);
    if (!(theta > 0.0)) throw ValidationError("shoot_lambda: theta > 0 required");
    // region R2 restricts to 0 < lambda < d; the linear oracle's eigenvalue
    // sits exactly at d, so its bracket may straddle it
    const double hi_cap = params.linear_mode ? params.d + 2.0 : params.d;
    if (!(bracket.first > 0.0) || !(bracket.second < hi_cap)) {
        throw ValidationError("shoot_lambda: bracket must lie in (0, d)");
    }

    auto cls = [&](double lam) {
        const double r0 = smooth_start_radius(theta, params);
        return classify_shot(origin_init_smooth(theta, r0, params, lam), params,
                             lam, opt);
    };
    auto out = bisect_lambda(cls, bracket.first, bracket.second, tol, opt);

    ShootResult res;
    res.theta = theta;
    res.lambda = out.lambda;
    res.bracket_history = std::move(out.history);
    res.iterations = out.iterations;
    res.achieved_tol = out.achieved_tol;

    GpRhs f(params, res.lambda);
    IntegrateOptions io;
    io.tol = opt.tol;
    io.events = shoot_events(params, res.lambda, theta, opt);
    const double r0 = smooth_start_radius(theta, params);
    res.profile = integrate(f, origin_init_smooth(theta, r0, params, res.lambda),
                            shoot_r_end(res.lambda, opt), io);
    res.profile.params = params;
    res.profile.lambda = res.lambda;
    res.profile.kind = ProfileKind::Smooth;
    return res;
}

namespace {

std::filesystem::path cache_path(const std::filesystem::path& dir,
                                 const std::string& key)
{
    return dir / ("lambda_star_" + fnv1a_hex(key) + ".json");
}

std::string cache_key(const ProblemParams& params, double r0, double tol,
                      double rtol)
{
    std::ostringstream ss;
    ss << "d=" << params.d << ";p=" << format_g17(params.p) << ";q="
       << (params.q ? format_g17(*params.q) : "none")
       << ";linear=" << params.linear_mode << ";r0=" << format_g17(r0)
       << ";lambda_tol=" << format_g17(tol) << ";rtol=" << format_g17(rtol);
    return ss.str();
}

} // namespace

LambdaStarResult find_lambda_star(std::pair<double, double> bracket, double tol,
                                  double r0, const ProblemParams& params,
                                  const ShootOptions& opt,
                                  const std::optional<std::filesystem::path>& cache_dir)
{
    validate(params, ValidationMode::basic);
    if (!(r0 >= 1e-6) || !(r0 <= 1e-3)) {
        throw ValidationError("find_lambda_star: r0 in [1e-6, 1e-3] required");
    }

    LambdaStarResult res;
    const std::string key = cache_key(params, r0, tol, opt.tol.rtol);

    std::optional<std::filesystem::path> cdir = cache_dir;
    if (const char* env = std::getenv("GPSS_CACHE_DIR"); env && *env) {
        cdir = std::filesystem::path(env);
    }

    ProblemParams trial_params = params;
    auto cls = [&](double lam) {
        trial_params.lambda = lam;
        return classify_shot(origin_init_singular(r0, trial_params, opt.singular_order),
                             params, lam, opt);
    };

    bool have_lambda = false;
    if (cdir) {
        const auto path = cache_path(*cdir, key);
        if (std::filesystem::exists(path)) {
            try {
                auto j = nlohmann::json::parse(read_file(path));
                if (j.value("key", "") == key) {
                    res.lambda_star = j.at("lambda_star").get<double>();
                    res.shoot.achieved_tol = j.value("achieved_tol", tol);
                    res.shoot.iterations = j.value("iterations", 0);
                    res.cache_hit = true;
                    have_lambda = true;
                }
            } catch (const std::exception&) {
                // unreadable cache entry: recompute
            }
        }
    }

    if (!have_lambda) {
        res.sign_changes = prescan_sign_changes(cls, bracket.first, bracket.second,
                                                opt.prescan_points);
        auto out = bisect_lambda(cls, bracket.first, bracket.second, tol, opt);
        res.lambda_star = out.lambda;
        res.shoot.bracket_history = std::move(out.history);
        res.shoot.iterations = out.iterations;
        res.shoot.achieved_tol = out.achieved_tol;
        if (cdir) {
            nlohmann::json j;
            j["key"] = key;
            j["lambda_star"] = res.lambda_star;
            j["achieved_tol"] = res.shoot.achieved_tol;
            j["iterations"] = res.shoot.iterations;
            atomic_write(cache_path(*cdir, key), j.dump(2) + "\n");
        }
    }

    res.shoot.lambda = res.lambda_star;
    trial_params.lambda = res.lambda_star;
    GpRhs f(params, res.lambda_star);
    IntegrateOptions io;
    io.tol = opt.tol;
    io.events = shoot_events(params, res.lambda_star,
                             derive_constants(params).A * std::pow(r0, -2.0 / (params.p - 1.0)),
                             opt);
    res.phi = integrate(f, origin_init_singular(r0, trial_params, opt.singular_order),
                        shoot_r_end(res.lambda_star, opt), io);
    res.phi.params = params;
    res.phi.lambda = res.lambda_star;
    res.phi.kind = ProfileKind::Singular;
    res.shoot.profile = res.phi;
    return res;
}

Profile solve_emden_fowler(double r_max, const Tol& tol, const ProblemParams& params)
{
    validate(params, ValidationMode::basic);
    const double d = params.d;
    const double p = params.p;
    if (!(p > (d + 2.0) / (d - 2.0))) {
        throw ValidationError("solve_emden_fowler: supercritical p > (d+2)/(d-2) required");
    }

    // Q = 1 - r^2/(2d) + c4 r^4 + O(r^6), c4 = p / (8 d (d+2))
    const double r0 = 1e-2;
    const double c4 = p / (8.0 * d * (d + 2.0));
    RadialState init{r0, 1.0 - r0 * r0 / (2.0 * d) + c4 * std::pow(r0, 4),
                     -r0 / d + 4.0 * c4 * std::pow(r0, 3)};

    EmdenRhs f(params.d, p);
    IntegrateOptions io;
    io.tol = tol;
    io.events.detect_zero_cross = true;
    Profile prof = integrate(f, init, r_max, io);
    if (prof.event && prof.event->type == EventType::ZeroCross) {
        throw ValidationError("solve_emden_fowler: subcritical-like oscillation (zero at r = " +
                              std::to_string(prof.event->r) + ")");
    }
    prof.params = params;
    prof.lambda = 0.0;
    prof.kind = ProfileKind::EmdenFowler;
    return prof;
}

ScaledEmden::ScaledEmden(double theta, const Profile& q_profile, double p)
    : theta_(theta), scale_(std::pow(theta, (p - 1.0) / 2.0)), q_(&q_profile)
{
    if (!(theta > 0.0)) throw ValidationError("ScaledEmden: theta > 0 required");
}

InteriorRemainder interior_remainder(double theta, double r_star, double lambda,
                                     const ProblemParams& params, const Profile& Q,
                                     const Tol& tol)
{
    validate(params, ValidationMode::basic);
    const double p = params.p;
    const double alpha = 2.0 / (p - 1.0);
    if (!(theta > std::pow(r_star, -alpha))) {
        throw ValidationError("interior_remainder: theta > r_star^{-2/(p-1)} required");
    }
    const double s = std::pow(theta, (p - 1.0) / 2.0);
    const double tau1 = s * r_star;
    if (tau1 > Q.r_max()) {
        throw ValidationError("interior_remainder: Q grid does not reach tau1");
    }

    GpRhs f(params, lambda);
    IntegrateOptions io;
    io.tol = tol;
    const double r0 = smooth_start_radius(theta, params);
    Profile u = integrate(f, origin_init_smooth(theta, r0, params, lambda), r_star, io);

    InteriorRemainder out;
    out.tau1 = tau1;
    const double thpm1 = std::pow(theta, p - 1.0);
    out.tau.push_back(0.0); // u(0) = theta forces T(0) = 0
    out.T.push_back(0.0);
    out.dT.push_back(0.0);
    const double w0 = 1.0; // (1+0)^{alpha-2}
    out.y_norm = 0.0 * w0;
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        const double r = u.grid[i];
        const double tau = s * r;
        if (tau < Q.r_min() || tau > Q.r_max()) continue;
        const double T = thpm1 * (u.values[i] / theta - Q.eval(tau));
        const double dT = thpm1 * (u.derivs[i] / (theta * s) - Q.deriv(tau));
        out.tau.push_back(tau);
        out.T.push_back(T);
        out.dT.push_back(dT);
        const double w = std::pow(1.0 + tau, alpha - 2.0);
        out.y_norm = std::max(out.y_norm, w * (std::fabs(T) + tau * std::fabs(dT)));
    }
    return out;
}

} // namespace gpss
