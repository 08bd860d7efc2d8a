#pragma once

#include <iosfwd>
#include <string>

#include "dpskrate/config.hpp"
#include "dpskrate/engine.hpp"

namespace dpsk {

// Runs the config's optimize set at one parameter point: nothing, an index
// search, or the modulation simplex with the index search nested (fields the
// set leaves out are pinned by collapsing their search range).
KeyRateResult evaluate_configured_point(const ProtocolParams& params,
                                        const SweepConfig& cfg);

// CSV pieces shared by the point and sweep runners. Numbers are written in
// shortest round-trip form, independent of locale; the leading column is the
// sweep variable.
std::string csv_header(const SweepConfig& cfg);
std::string csv_row(const SweepConfig& cfg, double grid_value,
                    const KeyRateResult& r);

// Evaluates the base point, prints a readable breakdown followed by the
// machine header/row pair to out, and returns the result.
KeyRateResult run_point(const SweepConfig& cfg, std::ostream& out);

struct SweepSummary {
  int total = 0;
  int failed = 0;
};

// Evaluates every grid value (cfg.workers threads when more than one point)
// and writes the CSV to cfg.output_path, rows in grid order regardless of
// scheduling. Per-point failures become status=failed rows with rate zero;
// only an empty grid or an unwritable output throws.
SweepSummary run_sweep(const SweepConfig& cfg);

}  // namespace dpsk
