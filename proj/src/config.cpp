#include "gpss/config.hpp"

#include <json.hpp>

namespace gpss {

namespace {

nlohmann::json params_json(const ProblemParams& p)
{
    nlohmann::json j;
    j["d"] = p.d;
    j["p"] = p.p;
    if (p.q) j["q"] = *p.q;
    if (p.lambda) j["lambda"] = *p.lambda;
    j["linear_mode"] = p.linear_mode;
    return j;
}

} // namespace

std::string config_to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["params"] = params_json(c.params);
    j["theta_min"] = c.theta_min;
    j["theta_max"] = c.theta_max;
    j["points"] = c.points;
    j["rtol"] = c.rtol;
    j["atol"] = c.atol;
    j["lambda_tol"] = c.lambda_tol;
    j["r_star"] = c.r_star;
    j["r0"] = c.r0;
    j["r_max"] = c.r_max;
    j["r_end_pad"] = c.r_end_pad;
    j["r_far"] = c.r_far;
    j["output_dir"] = c.output_dir;
    j["frequency_tol"] = c.frequency_tol;
    j["envelope_tol"] = c.envelope_tol;
    j["center_tol"] = c.center_tol;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("config_from_json: ") + e.what());
    }
    RunConfig c;
    if (j.contains("params")) {
        c.params = params_from_json(j["params"].dump());
    }
    c.theta_min = j.value("theta_min", c.theta_min);
    c.theta_max = j.value("theta_max", c.theta_max);
    c.points = j.value("points", c.points);
    c.rtol = j.value("rtol", c.rtol);
    c.atol = j.value("atol", c.atol);
    c.lambda_tol = j.value("lambda_tol", c.lambda_tol);
    c.r_star = j.value("r_star", c.r_star);
    c.r0 = j.value("r0", c.r0);
    c.r_max = j.value("r_max", c.r_max);
    c.r_end_pad = j.value("r_end_pad", c.r_end_pad);
    c.r_far = j.value("r_far", c.r_far);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.frequency_tol = j.value("frequency_tol", c.frequency_tol);
    c.envelope_tol = j.value("envelope_tol", c.envelope_tol);
    c.center_tol = j.value("center_tol", c.center_tol);
    c.threads = j.value("threads", c.threads);
    return c;
}

void validate_config(const RunConfig& c)
{
    validate(c.params, ValidationMode::basic);
    if (!(c.theta_min < c.theta_max)) throw ValidationError("config: theta_min >= theta_max");
    if (c.points < 2) throw ValidationError("config: points < 2");
    if (!(c.rtol > 0.0) || c.atol < 0.0 || !(c.lambda_tol > 0.0)) {
        throw ValidationError("config: tolerances must be positive");
    }
    if (!(c.r0 < c.r_star)) throw ValidationError("config: r0 >= r_star");
    if (!(c.r_star < 1.0)) throw ValidationError("config: r_star >= 1");
    if (!(c.r_max > 1.0)) throw ValidationError("config: r_max <= 1");
    if (!(c.frequency_tol > 0.0) || !(c.envelope_tol > 0.0) || !(c.center_tol > 0.0)) {
        throw ValidationError("config: acceptance tolerances must be positive");
    }
    if (c.threads < 1) throw ValidationError("config: threads < 1");
}

std::string summary_to_json(const RunSummary& s)
{
    nlohmann::json j;
    j["derived"] = {
        {"A", s.derived.A},
        {"alpha", s.derived.alpha},
        {"sigma", s.derived.sigma},
        {"beta", s.derived.beta},
        {"omega", s.derived.omega},
        {"mode_frequency", s.derived.mode_frequency},
        {"p_jl", s.derived.p_jl},
        {"lambda1", s.derived.lambda1},
        {"m", s.derived.m},
        {"mu", s.derived.mu},
        {"origin_correction_exponent", s.derived.origin_correction_exponent},
        {"oscillatory", s.derived.oscillatory},
    };
    if (std::isinf(s.derived.p_jl)) j["derived"]["p_jl"] = "inf";
    j["lambda_star"] = s.lambda_star;
    j["wall_seconds"] = s.wall_seconds;
    j["all_pass"] = s.all_pass();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : s.criteria) {
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"target", c.target},
                       {"tolerance", c.tolerance},
                       {"detail", c.detail}});
    }
    j["criteria"] = arr;
    nlohmann::json man = nlohmann::json::array();
    for (const auto& a : s.artifacts) man.push_back(a);
    j["artifacts"] = man;
    return j.dump(2) + "\n";
}

} // namespace gpss
