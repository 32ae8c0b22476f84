#pragma once

#include <iosfwd>

#include "gpss/config.hpp"

namespace gpss {

/// The built-in verification suite: every acceptance check at its pinned
/// tolerance, one CriterionResult per clause, run for the canonical case
/// (d=5, p=3, q=1.5) and re-run with q absent. The config supplies grid
/// sizes, radii, integration tolerances and the law tolerances; parameters
/// other than the canonical pair are not consulted.
///
/// When `progress` is given, one pass/fail line per criterion is streamed
/// as it completes.
RunSummary run_verification(const RunConfig& config, std::ostream* progress = nullptr);

/// Render one criterion as the canonical single-line report.
std::string criterion_line(const CriterionResult& c);

} // namespace gpss
