#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpss/constants.hpp"

namespace gpss {

/// Run-wide configuration shared by every CLI command. JSON round-trips
/// losslessly; missing keys keep the defaults shown here.
struct RunConfig {
    ProblemParams params{.d = 5, .p = 3.0, .q = 1.5};

    double theta_min = 10.0;
    double theta_max = 1e4;
    int points = 400;

    double rtol = 1e-12;
    double atol = 0.0;
    double lambda_tol = 1e-10;

    double r_star = 0.3;
    double r0 = 1e-4;    ///< singular-shoot inner start
    double r_max = 1e4;  ///< Emden-Fowler outer radius
    double r_end_pad = 4.0; ///< integration stops at sqrt(lambda) + pad
    double r_far = 10.0;    ///< far-field relaxation seed radius

    std::string output_dir = "out";

    double frequency_tol = 0.05;
    double envelope_tol = 0.1;
    double center_tol = 1e-3;

    int threads = 1;

    bool operator==(const RunConfig&) const = default;
};

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& config);

/// Throws ValidationError on the first violated invariant.
void validate_config(const RunConfig& config);

struct CriterionResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct RunSummary {
    DerivedConstants derived{};
    double lambda_star = 0.0;
    std::vector<CriterionResult> criteria;
    double wall_seconds = 0.0;
    std::vector<std::string> artifacts;

    bool all_pass() const
    {
        for (const auto& c : criteria) {
            if (!c.pass) return false;
        }
        return !criteria.empty();
    }
};

std::string summary_to_json(const RunSummary& summary);

} // namespace gpss
