#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gpss/constants.hpp"

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

} // namespace

TEST_CASE("joseph_lundgren threshold")
{
    CHECK(std::isinf(joseph_lundgren(5)));
    CHECK(std::isinf(joseph_lundgren(3)));
    CHECK(std::isinf(joseph_lundgren(10)));
    // d = 11: 1 + 4/(7 - 2 sqrt(10))
    CHECK(std::fabs(joseph_lundgren(11) - 6.92203) < 1e-4);
    CHECK(joseph_lundgren(11) ==
          doctest::Approx(1.0 + 4.0 / (7.0 - 2.0 * std::sqrt(10.0))).epsilon(1e-15));
    CHECK_THROWS_AS(joseph_lundgren(2), ValidationError);
}

TEST_CASE("derive_constants canonical values")
{
    const auto c = derive_constants(canonical());
    CHECK(c.A == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(c.alpha == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.sigma == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c.beta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(c.omega == doctest::Approx(std::sqrt(15.0)).epsilon(1e-14));
    CHECK(c.omega == doctest::Approx(3.87298335).epsilon(1e-8));
    CHECK(c.m == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(c.mu == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(c.lambda1 == 5.0);
    CHECK(c.origin_correction_exponent == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c.oscillatory);
    CHECK(c.mode_frequency == doctest::Approx(0.5 * std::sqrt(15.0)).epsilon(1e-14));
    // cross-check: 4 p A^{p-1} = 24, (d-2)^2 = 9, omega = sqrt(15)
    CHECK(4.0 * 3.0 * c.A * c.A == doctest::Approx(24.0).epsilon(1e-14));
}

TEST_CASE("derive_constants d=3 p=7")
{
    ProblemParams p;
    p.d = 3;
    p.p = 7.0;
    const auto c = derive_constants(p);
    CHECK(c.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // A = (2/9)^{1/6}
    CHECK(c.A == doctest::Approx(std::pow(2.0 / 9.0, 1.0 / 6.0)).epsilon(1e-14));
}

TEST_CASE("A identity holds over random parameters")
{
    std::mt19937 rng(20240817u);
    std::uniform_int_distribution<int> dd(3, 12);
    std::uniform_real_distribution<double> pp(1.05, 9.0);
    int checked = 0;
    for (int it = 0; it < 500; ++it) {
        ProblemParams params;
        params.d = dd(rng);
        params.p = pp(rng);
        const double alpha = 2.0 / (params.p - 1.0);
        if (params.d - 2.0 - alpha <= 1e-3) continue;
        const auto c = derive_constants(params);
        const double lhs = std::pow(c.A, params.p - 1.0);
        const double rhs = c.alpha * (params.d - 2.0 - c.alpha);
        CHECK(std::fabs(lhs - rhs) <= 1e-13 * std::fabs(rhs));
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("oscillatory flag below p_JL")
{
    // d <= 10: p_JL = inf, every supercritical p is oscillatory
    std::mt19937 rng(7u);
    for (int d = 3; d <= 10; ++d) {
        std::uniform_real_distribution<double> pp((d + 2.0) / (d - 2.0) + 1e-6, 12.0);
        for (int it = 0; it < 40; ++it) {
            ProblemParams params;
            params.d = d;
            params.p = pp(rng);
            CHECK(derive_constants(params).oscillatory);
        }
    }
    // d = 11: monotone above p_JL
    ProblemParams high;
    high.d = 11;
    high.p = 8.0;
    CHECK_FALSE(derive_constants(high).oscillatory);
}

TEST_CASE("validate strict mode")
{
    auto params = canonical();
    CHECK_NOTHROW(validate(params, ValidationMode::strict));

    SUBCASE("q too large")
    {
        params.q = 2.5;
        CHECK_THROWS_WITH_AS(validate(params, ValidationMode::strict),
                             doctest::Contains("q >= (p+1)/2"), ValidationError);
    }
    SUBCASE("p subcritical")
    {
        params.p = 2.0; // (d+2)/(d-2) = 7/3
        CHECK_THROWS_WITH_AS(validate(params, ValidationMode::strict),
                             doctest::Contains("p subcritical"), ValidationError);
    }
    SUBCASE("lambda out of range")
    {
        params.lambda = 5.0;
        CHECK_THROWS_WITH_AS(validate(params, ValidationMode::strict),
                             doctest::Contains("lambda >= d"), ValidationError);
        params.lambda = -0.5;
        CHECK_THROWS_AS(validate(params, ValidationMode::strict), ValidationError);
    }
    SUBCASE("p at or above p_JL rejected")
    {
        params.d = 11;
        params.p = 7.0;
        params.q = 1.2;
        CHECK_THROWS_WITH_AS(validate(params, ValidationMode::strict),
                             doctest::Contains("p_JL"), ValidationError);
    }
}

TEST_CASE("validate basic mode and idempotence")
{
    ProblemParams params;
    params.d = 3;
    params.p = 1.5;
    CHECK_NOTHROW(validate(params, ValidationMode::basic));

    params.d = 2;
    CHECK_THROWS_AS(validate(params, ValidationMode::basic), ValidationError);

    auto good = canonical();
    const auto once = validate(good, ValidationMode::strict);
    const auto twice = validate(once, ValidationMode::strict);
    CHECK(once == good);
    CHECK(twice == once);
}

TEST_CASE("params JSON round trip")
{
    std::mt19937 rng(99u);
    std::uniform_int_distribution<int> dd(3, 11);
    std::uniform_real_distribution<double> uu(1.01, 8.0);
    std::bernoulli_distribution coin;
    for (int it = 0; it < 200; ++it) {
        ProblemParams params;
        params.d = dd(rng);
        params.p = uu(rng);
        if (coin(rng)) params.q = uu(rng);
        if (coin(rng)) params.lambda = uu(rng) / 2.0;
        params.linear_mode = coin(rng);
        const auto back = params_from_json(params_to_json(params));
        CHECK(back == params);
    }
    // missing key means absent field
    const auto sparse = params_from_json(R"({"d": 5, "p": 3.0})");
    CHECK_FALSE(sparse.q.has_value());
    CHECK_FALSE(sparse.lambda.has_value());
    CHECK_FALSE(sparse.linear_mode);
    CHECK_THROWS_AS(params_from_json("{broken"), IoError);
}
