#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gpss/constants.hpp"
#include "gpss/integrate.hpp"

using namespace gpss;

namespace {

ProblemParams canonical()
{
    ProblemParams p;
    p.d = 5;
    p.p = 3.0;
    p.q = 1.5;
    return p;
}

ProblemParams hermite()
{
    ProblemParams p;
    p.d = 5;
    p.p = 3.0;
    p.linear_mode = true;
    return p;
}

Profile hermite_profile(double lambda, double r_end, double rtol = 1e-12)
{
    const auto params = hermite();
    GpRhs f(params, lambda);
    IntegrateOptions opt;
    opt.tol = {rtol, 0.0};
    const double r0 = 3e-4;
    RadialState init = origin_init_smooth(1.0, r0, params, lambda);
    return integrate(f, init, r_end, opt);
}

} // namespace

TEST_CASE("rhs evaluation")
{
    const auto params = canonical();
    SUBCASE("direct substitution")
    {
        // d=5, p=3, q=1.5, lambda=4, u=1, du=0: ddu = (1-4)*1 - 1 - 1 = -5
        auto [du, ddu] = rhs(1.0, {1.0, 1.0, 0.0}, params, 4.0);
        CHECK(du == 0.0);
        CHECK(ddu == doctest::Approx(-5.0).epsilon(1e-14));
    }
    SUBCASE("hermite residual vanishes in linear mode at lambda = d")
    {
        const auto lin = hermite();
        for (double r : {0.3, 1.0, 2.0, 3.5}) {
            const double u = std::exp(-r * r / 2.0);
            const double du = -r * u;
            auto [_, ddu] = rhs(r, {r, u, du}, lin, 5.0);
            // exact: u'' = (r^2-1) e^{-r^2/2}
            CHECK(ddu == doctest::Approx((r * r - 1.0) * u).epsilon(1e-13));
        }
    }
    SUBCASE("nonlinearities vanish at u = 0")
    {
        auto [du, ddu] = rhs(2.0, {2.0, 0.0, 0.7}, params, 4.0);
        CHECK(du == 0.7);
        CHECK(ddu == doctest::Approx(-(4.0 / 2.0) * 0.7).epsilon(1e-14));
    }
    SUBCASE("r = 0 is a domain error")
    {
        CHECK_THROWS_AS(rhs(0.0, {0.0, 1.0, 0.0}, params, 4.0), ValidationError);
    }
}

TEST_CASE("origin_init_smooth")
{
    const auto params = canonical();
    SUBCASE("matching the r^0 coefficient")
    {
        // theta=1, lambda=4: g0 = -4 - 1 - 1 = -6
        const auto s = origin_init_smooth(1.0, 0.01, params, 4.0);
        CHECK(s.u == doctest::Approx(1.0 - 6.0 * 1e-4 / 10.0).epsilon(1e-12));
        CHECK(s.u == doctest::Approx(0.99994).epsilon(1e-9));
        CHECK(s.du == doctest::Approx(-0.012).epsilon(1e-12));
    }
    SUBCASE("linear mode matches the hermite taylor series")
    {
        const auto lin = hermite();
        for (double theta : {0.5, 1.0, 7.0}) {
            const double r0 = 0.01;
            const auto s = origin_init_smooth(theta, r0, lin, 5.0);
            CHECK(s.u == doctest::Approx(theta * (1.0 - r0 * r0 / 2.0)).epsilon(1e-10));
        }
    }
    SUBCASE("zero initial height gives the zero state")
    {
        const auto s = origin_init_smooth(0.0, 0.01, params, 4.0);
        CHECK(s.u == 0.0);
        CHECK(s.du == 0.0);
    }
    CHECK_THROWS_AS(origin_init_smooth(1.0, 0.0, params, 4.0), ValidationError);
    CHECK_THROWS_AS(origin_init_smooth(1.0, 0.5, params, 4.0), ValidationError);
}

TEST_CASE("origin_init_singular")
{
    auto params = canonical();
    SUBCASE("leading values d=5 p=3")
    {
        const auto s = origin_init_singular(1e-3, params, SingularOrder::leading);
        CHECK(s.u == doctest::Approx(std::sqrt(2.0) * 1e3).epsilon(1e-12));
        CHECK(s.u == doctest::Approx(1414.2136).epsilon(1e-7));
        CHECK(s.du == doctest::Approx(-1.4142136e6).epsilon(1e-7));
    }
    SUBCASE("corrected deviation scales as r0^1.5")
    {
        // |u(r0) r0^alpha / A - 1| of the corrected initializer is the
        // size of the first correction, proportional to r0^{2(p-q)/(p-1)};
        // lambda unset isolates the q-term
        const auto c = derive_constants(params);
        double prev = 0.0;
        for (double r0 : {1e-2, 1e-3, 1e-4}) {
            const auto s = origin_init_singular(r0, params, SingularOrder::corrected);
            const double dev = std::fabs(s.u * std::pow(r0, c.alpha) / c.A - 1.0);
            if (prev > 0.0) {
                const double ratio = prev / dev;
                // one decade in r0 = 10^1.5 in the deviation
                CHECK(ratio == doctest::Approx(std::pow(10.0, 1.5)).epsilon(1e-9));
            }
            prev = dev;
        }
        // with lambda set the r^2 term joins at small relative weight
        params.lambda = 3.3;
        const auto s1 = origin_init_singular(1e-3, params, SingularOrder::corrected);
        const auto s2 = origin_init_singular(1e-4, params, SingularOrder::corrected);
        const double d1 = std::fabs(s1.u * 1e-3 / c.A - 1.0);
        const double d2 = std::fabs(s2.u * 1e-4 / c.A - 1.0);
        CHECK(d1 / d2 == doctest::Approx(std::pow(10.0, 1.5)).epsilon(0.08));
    }
    SUBCASE("pure-p correction exponent becomes 2")
    {
        params.q.reset();
        params.lambda = 3.3;
        const auto c = derive_constants(params);
        double prev = 0.0;
        for (double r0 : {1e-2, 1e-3}) {
            const auto s = origin_init_singular(r0, params, SingularOrder::corrected);
            const double dev = std::fabs(s.u * std::pow(r0, c.alpha) / c.A - 1.0);
            if (prev > 0.0) CHECK(prev / dev == doctest::Approx(100.0).epsilon(0.02));
            prev = dev;
        }
        // leading values unchanged by dropping q
        const auto lead = origin_init_singular(1e-3, params, SingularOrder::leading);
        CHECK(lead.u == doctest::Approx(std::sqrt(2.0) * 1e3).epsilon(1e-12));
    }
    CHECK_THROWS_AS(origin_init_singular(1.0, params), ValidationError);
}

TEST_CASE("hermite oracle integration")
{
    // linear_mode, lambda = d: u = e^{-r^2/2} exactly
    auto prof = hermite_profile(5.0, 4.0);
    CHECK(prof.eval(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
    CHECK(prof.eval(1.0) == doctest::Approx(0.60653066).epsilon(1e-8));

    // Gaussian-tail tracking floor: roundoff at the turning region excites
    // the growing mode e^{+r^2/2}, so absolute errors of ~1e3*eps*theta are
    // unavoidable however small rtol is. The 10*rtol relative bound applies
    // on top of that floor.
    const double floor_abs = 1e3 * std::numeric_limits<double>::epsilon();

    SUBCASE("grid nodes match e^{-r^2/2} within 10x rtol for r <= 4")
    {
        for (std::size_t i = 0; i < prof.grid.size(); ++i) {
            const double expect = std::exp(-prof.grid[i] * prof.grid[i] / 2.0);
            CHECK(std::fabs(prof.values[i] - expect) <= 10.0 * 1e-12 * expect + floor_abs);
        }
    }
    SUBCASE("dense output between nodes")
    {
        std::mt19937 rng(11u);
        std::uniform_real_distribution<double> rr(1e-3, 4.0);
        for (int it = 0; it < 200; ++it) {
            const double r = rr(rng);
            const double expect = std::exp(-r * r / 2.0);
            CHECK(std::fabs(prof.eval(r) - expect) <= 1e-10 * expect + floor_abs);
            CHECK(std::fabs(prof.deriv(r) - (-r * expect)) <= 1e-9 * std::max(r * expect, 1e-4));
        }
    }
    SUBCASE("second derivative from the dense interpolant")
    {
        for (double r : {0.5, 1.0, 2.0, 3.0}) {
            const double expect = (r * r - 1.0) * std::exp(-r * r / 2.0);
            CHECK(prof.deriv2(r) == doctest::Approx(expect).epsilon(1e-7));
        }
    }
}

TEST_CASE("grid monotonicity and event exclusivity")
{
    const auto params = canonical();
    GpRhs f(params, 3.0);
    IntegrateOptions opt;
    opt.tol = {1e-12, 0.0};
    opt.events.detect_zero_cross = true;
    opt.events.turn_r = std::sqrt(3.0);
    opt.events.ceiling_factor = 1.5;
    opt.events.ceiling_pow = 0.5;
    opt.events.decay_floor_rel = 1e-6;
    opt.events.cap_abs = 1e4;

    RadialState init = origin_init_singular(1e-4, params, SingularOrder::leading);
    Profile prof = integrate(f, init, std::sqrt(3.0) + 4.0, opt);
    for (std::size_t i = 1; i < prof.grid.size(); ++i) {
        CHECK(prof.grid[i] > prof.grid[i - 1]);
    }
    CHECK(prof.values.size() == prof.grid.size());
    CHECK(prof.derivs.size() == prof.grid.size());
    CHECK(prof.grid.size() >= 2);
    // at most one terminal event, and the profile stops there
    if (prof.event) {
        CHECK(prof.grid.back() == doctest::Approx(prof.event->r).epsilon(1e-12));
    }
}

TEST_CASE("residual of dense output in the ODE")
{
    // plug dense values back into the equation at random interior points
    const auto params = canonical();
    const double lambda = 3.0;
    GpRhs f(params, lambda);
    IntegrateOptions opt;
    opt.tol = {1e-12, 0.0};
    RadialState init = origin_init_smooth(2.0, 1e-2, params, lambda);
    Profile prof = integrate(f, init, 2.5, opt);

    std::mt19937 rng(5u);
    std::uniform_real_distribution<double> rr(2e-2, 2.4);
    for (int it = 0; it < 100; ++it) {
        const double r = rr(rng);
        const double u = prof.eval(r);
        const double du = prof.deriv(r);
        const double ddu = prof.deriv2(r);
        double y[2] = {u, du}, dy[2];
        f(r, y, dy);
        const double scale = std::fabs(dy[1]) + std::fabs(ddu) + 1.0;
        CHECK(std::fabs(ddu - dy[1]) <= 100.0 * 1e-12 * scale * 1e3);
    }
}

TEST_CASE("identically zero initial state stays zero")
{
    const auto params = canonical();
    GpRhs f(params, 3.0);
    IntegrateOptions opt;
    opt.tol = {1e-12, 1e-30};
    Profile prof = integrate(f, {1e-3, 0.0, 0.0}, 5.0, opt);
    CHECK(std::fabs(prof.values.back()) == 0.0);
    CHECK(classify_tail(prof, params, 3.0).kind != ClassKind::BlowsUpPositive);
}

TEST_CASE("classification flips once at lambda = 5 in linear mode")
{
    const auto params = hermite();
    auto classify_at = [&](double lam) {
        GpRhs f(params, lam);
        IntegrateOptions opt;
        opt.tol = {1e-12, 0.0};
        opt.events.detect_zero_cross = true;
        opt.events.cap_abs = 1e3;
        opt.events.turn_r = std::sqrt(lam);
        opt.events.decay_floor_rel = 1e-6;
        RadialState init = origin_init_smooth(1.0, 1e-3, params, lam);
        Profile prof = integrate(f, init, std::sqrt(lam) + 4.0, opt);
        return classify_tail(prof, params, lam).kind;
    };

    // dense scan: exactly one flip on [4.5, 5.5] among decisive outcomes
    // (the grid point lambda = 5 itself classifies Decaying)
    const int n = 41;
    int flips = 0;
    ClassKind prev_decisive = ClassKind::Undetermined;
    for (int i = 0; i < n; ++i) {
        const auto k = classify_at(4.5 + i * (5.5 - 4.5) / (n - 1));
        if (k != ClassKind::CrossesZero && k != ClassKind::BlowsUpPositive) continue;
        if (prev_decisive != ClassKind::Undetermined && k != prev_decisive) ++flips;
        prev_decisive = k;
    }
    CHECK(flips == 1);

    // bisect the flip point: must equal 5 within 1e-9
    double lo = 4.5, hi = 5.5;
    ClassKind klo = classify_at(lo);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto km = classify_at(mid);
        if (km == ClassKind::Decaying) {
            lo = hi = mid;
            break;
        }
        if (km == klo) lo = mid;
        else hi = mid;
    }
    CHECK(0.5 * (lo + hi) == doctest::Approx(5.0).epsilon(1e-9 / 5.0));

    // below the eigenvalue the trajectory cannot decay before r = 8
    const auto low = classify_at(4.9);
    CHECK(low != ClassKind::Decaying);
}

TEST_CASE("overflow and NaN handling")
{
    // a state pushed into overflow classifies BlowsUpPositive, not a crash
    const auto params = hermite();
    GpRhs f(params, 1.0);
    IntegrateOptions opt;
    opt.tol = {1e-10, 0.0};
    Profile prof = integrate(f, {3.0, 1.0, 10.0}, 30.0, opt); // e^{+r^2/2} growth
    const auto c = classify_tail(prof, params, 1.0);
    CHECK(c.kind == ClassKind::BlowsUpPositive);
}
