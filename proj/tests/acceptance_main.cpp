// Acceptance suite: runs every verification criterion at its pinned
// tolerance and prints one pass/fail line per criterion. Exits nonzero when
// any criterion fails.

#include <cstdio>
#include <iostream>

#include "gpss/verification.hpp"

int main()
{
    gpss::RunConfig cfg;
    cfg.points = 400;
    cfg.theta_min = 10.0;
    cfg.theta_max = 1e4;

    gpss::RunSummary summary;
    try {
        summary = gpss::run_verification(cfg, &std::cout);
    } catch (const std::exception& e) {
        std::cerr << "acceptance: aborted: " << e.what() << "\n";
        return 2;
    }

    int failed = 0;
    for (const auto& c : summary.criteria) {
        if (!c.pass) ++failed;
    }
    std::printf("\n%zu criteria, %d failed, wall %.1f s, lambda* = %.12f\n",
                summary.criteria.size(), failed, summary.wall_seconds,
                summary.lambda_star);
    return failed == 0 ? 0 : 1;
}
