#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpskrate/params.hpp"

namespace dpsk {

// Parse or consistency failure in a run configuration. The message carries
// the line number and field name when they are known.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SweepVariable { chi_db, alpha, p_d, gamma_mod, n };

std::string_view to_string(SweepVariable v);

// One runnable job: a base parameter point, what to sweep, what to optimize
// per grid value, and where the CSV goes. The search budget knobs exist so
// presets can trade a little optimality for a lot of runtime; they never
// affect soundness, only how hard the maximizers try.
struct SweepConfig {
  ProtocolParams base;
  SweepVariable sweep_variable = SweepVariable::chi_db;
  std::vector<double> grid;
  bool optimize_alpha = false;
  bool optimize_beta = false;
  bool optimize_p_k = false;
  std::string output_path = "sweep.csv";
  int workers = 1;
  std::uint64_t seed = 0;  // carried for reproducibility bookkeeping

  // Maximizer budgets: simplex evaluations, the index search used inside the
  // simplex, and the full-quality index search (also used for plain
  // optimize-alpha points).
  int nm_evaluations = 48;
  int nested_coarse = 5;
  int nested_golden = 7;
  int alpha_coarse = 7;
  int alpha_golden = 12;
};

// Flat key-value text: one `key = value` per line, `#` starts a comment.
// Numbers accept scientific notation; `grid` takes comma-separated values
// where each entry is either a number or an inclusive `start:stop:count`
// ramp; `optimize` takes a comma-separated subset of {alpha, beta, p_k} or
// `none`. `eta` may be given instead of `chi_db`. Unknown keys, duplicate
// keys, malformed numbers and out-of-range values all raise ConfigError
// with the offending line and field.
SweepConfig parse_config(const std::string& text);
SweepConfig load_config(const std::string& path);

// Copy of `base` with the swept field replaced by `value`. Rejects values
// the field cannot hold (for `n`, non-integral ones).
ProtocolParams apply_sweep_value(ProtocolParams base, SweepVariable v,
                                 double value);

// Range and consistency checks beyond per-line parsing: parameter ranges,
// nonempty strictly monotone grid, and every grid value valid for the swept
// field. parse_config runs this; runners call it again on programmatic
// configs.
void validate_config(const SweepConfig& cfg);

// Round-trip rendering in canonical key order; parse_config(render_config(c))
// reproduces c. Used by --dry-run, the presets listing and the manifest test.
std::string render_config(const SweepConfig& cfg);

// Built-in figure-reproduction jobs. A preset may expand to several configs
// (one output file each). Unknown names raise ConfigError listing the valid
// ones.
std::vector<SweepConfig> preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace dpsk
