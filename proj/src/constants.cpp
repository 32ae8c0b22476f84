#include "gpss/constants.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace gpss {

double joseph_lundgren(int d)
{
    if (d < 3) {
        throw ValidationError("joseph_lundgren: d >= 3 required, got d = " + std::to_string(d));
    }
    if (d <= 10) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 + 4.0 / (d - 4.0 - 2.0 * std::sqrt(d - 1.0));
}

DerivedConstants derive_constants(const ProblemParams& params)
{
    validate(params, ValidationMode::basic);
    const double d = params.d;
    const double p = params.p;

    DerivedConstants c{};
    c.alpha = 2.0 / (p - 1.0);
    if (d - 2.0 - c.alpha <= 0.0) {
        throw ValidationError("derive_constants: d-2-alpha <= 0, A undefined");
    }
    const double a_pm1 = c.alpha * (d - 2.0 - c.alpha); // A^{p-1}
    c.A = std::pow(a_pm1, 1.0 / (p - 1.0));
    c.sigma = d / 2.0 - c.alpha;
    c.beta = (p + 1.0) / 2.0;
    const double disc = (d - 2.0) * (d - 2.0) - 4.0 * p * a_pm1;
    c.omega = std::sqrt(std::fabs(disc));
    c.oscillatory = disc < 0.0;
    c.mode_frequency = 0.5 * c.omega;
    c.p_jl = joseph_lundgren(params.d);
    c.lambda1 = d;
    c.m = 1.0 / std::sqrt(a_pm1);
    c.mu = c.m * (d - 2.0 - 2.0 * c.alpha);
    c.origin_correction_exponent =
        params.q ? 2.0 * (p - *params.q) / (p - 1.0) : 2.0;
    return c;
}

namespace {

[[noreturn]] void fail(const std::string& what)
{
    throw ValidationError("validate: " + what);
}

} // namespace

ProblemParams validate(const ProblemParams& params, ValidationMode mode)
{
    if (params.d < 3) fail("d < 3");
    if (!(params.p > 1.0)) fail("p <= 1");
    if (params.q && !(*params.q > 1.0)) fail("q <= 1");

    if (mode == ValidationMode::strict) {
        const double d = params.d;
        const double sobolev = (d + 2.0) / (d - 2.0);
        if (!(params.p > sobolev)) fail("p subcritical: p <= (d+2)/(d-2)");
        if (!(params.p < joseph_lundgren(params.d))) fail("p >= p_JL(d)");
        if (params.q) {
            const double cap = std::min((params.p + 1.0) / 2.0, params.p);
            if (!(*params.q < cap)) fail("q >= (p+1)/2");
        }
        if (params.lambda) {
            if (!(*params.lambda > 0.0)) fail("lambda <= 0");
            if (!(*params.lambda < d)) fail("lambda >= d");
        }
    }
    return params;
}

std::string params_to_json(const ProblemParams& params)
{
    nlohmann::json j;
    j["d"] = params.d;
    j["p"] = params.p;
    if (params.q) j["q"] = *params.q;
    if (params.lambda) j["lambda"] = *params.lambda;
    j["linear_mode"] = params.linear_mode;
    return j.dump();
}

ProblemParams params_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("params_from_json: ") + e.what());
    }
    ProblemParams p;
    p.d = j.at("d").get<int>();
    p.p = j.at("p").get<double>();
    if (j.contains("q") && !j["q"].is_null()) p.q = j["q"].get<double>();
    if (j.contains("lambda") && !j["lambda"].is_null()) p.lambda = j["lambda"].get<double>();
    p.linear_mode = j.value("linear_mode", false);
    return p;
}

} // namespace gpss
