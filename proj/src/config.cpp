#include "dpskrate/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace dpsk {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view v, int line, std::string_view field) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out))
    fail(line, "field '" + std::string(field) + "': '" + std::string(v) +
                   "' is not a number");
  return out;
}

long long parse_integer(std::string_view v, int line, std::string_view field) {
  const double d = parse_double(v, line, field);
  if (d != std::nearbyint(d) || std::abs(d) > 9.0e18)
    fail(line, "field '" + std::string(field) + "': '" + std::string(v) +
                   "' is not an integer");
  return static_cast<long long>(d);
}

std::vector<std::string_view> split(std::string_view v, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = v.find(sep);
    out.push_back(trim(v.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    v.remove_prefix(pos + 1);
  }
  return out;
}

std::vector<double> parse_grid(std::string_view v, int line) {
  std::vector<double> out;
  for (const std::string_view tok : split(v, ',')) {
    if (tok.empty()) fail(line, "field 'grid': empty entry");
    const auto c1 = tok.find(':');
    if (c1 == std::string_view::npos) {
      out.push_back(parse_double(tok, line, "grid"));
      continue;
    }
    // start:stop:count ramp, endpoints included.
    const auto c2 = tok.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
      fail(line, "field 'grid': ramp needs start:stop:count");
    const double start = parse_double(trim(tok.substr(0, c1)), line, "grid");
    const double stop =
        parse_double(trim(tok.substr(c1 + 1, c2 - c1 - 1)), line, "grid");
    const long long count =
        parse_integer(trim(tok.substr(c2 + 1)), line, "grid");
    if (count < 2) fail(line, "field 'grid': ramp count must be at least 2");
    for (long long k = 0; k < count; ++k)
      out.push_back(start + (stop - start) * static_cast<double>(k) /
                                static_cast<double>(count - 1));
  }
  return out;
}

const SweepVariable kSweepVariables[] = {SweepVariable::chi_db,
                                         SweepVariable::alpha,
                                         SweepVariable::p_d,
                                         SweepVariable::gamma_mod,
                                         SweepVariable::n};

std::string number(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::chi_db: return "chi_db";
    case SweepVariable::alpha: return "alpha";
    case SweepVariable::p_d: return "p_d";
    case SweepVariable::gamma_mod: return "gamma_mod";
    case SweepVariable::n: return "n";
  }
  return "?";
}

ProtocolParams apply_sweep_value(ProtocolParams base, SweepVariable v,
                                 double value) {
  switch (v) {
    case SweepVariable::chi_db: base.chi_db = value; break;
    case SweepVariable::alpha: base.alpha = value; break;
    case SweepVariable::p_d: base.p_d = value; break;
    case SweepVariable::gamma_mod: base.gamma_mod = value; break;
    case SweepVariable::n:
      if (value != std::nearbyint(value) || std::abs(value) > 9.0e18)
        throw ConfigError("config: grid value " + number(value) +
                          " for 'n' is not an integer");
      base.n = static_cast<std::int64_t>(value);
      break;
  }
  return base;
}

SweepConfig parse_config(const std::string& text) {
  SweepConfig cfg;
  std::set<std::string, std::less<>> seen;
  bool saw_eta = false;
  bool saw_chi = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos)
      s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(line, "expected 'key = value'");
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "missing key before '='");
    if (value.empty()) fail(line, "field '" + key + "': empty value");
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");

    if (key == "beta") {
      cfg.base.beta = parse_double(value, line, key);
    } else if (key == "gamma_mod") {
      cfg.base.gamma_mod = parse_double(value, line, key);
    } else if (key == "p_k") {
      cfg.base.p_k = parse_double(value, line, key);
    } else if (key == "p_d") {
      cfg.base.p_d = parse_double(value, line, key);
    } else if (key == "chi_db") {
      cfg.base.chi_db = parse_double(value, line, key);
      saw_chi = true;
    } else if (key == "eta") {
      const double eta = parse_double(value, line, key);
      if (!(eta > 0.0 && eta <= 1.0))
        fail(line, "field 'eta': must lie in (0, 1]");
      cfg.base.chi_db = -10.0 * std::log10(eta);
      saw_eta = true;
    } else if (key == "xi") {
      cfg.base.xi = parse_double(value, line, key);
    } else if (key == "f_ec") {
      cfg.base.f_ec = parse_double(value, line, key);
    } else if (key == "n") {
      cfg.base.n = parse_integer(value, line, key);
    } else if (key == "eps_ec") {
      cfg.base.eps_ec = parse_double(value, line, key);
    } else if (key == "eps_pa") {
      cfg.base.eps_pa = parse_double(value, line, key);
    } else if (key == "alpha") {
      cfg.base.alpha = parse_double(value, line, key);
    } else if (key == "n_max") {
      cfg.base.n_max = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "sweep_variable") {
      bool found = false;
      for (const SweepVariable v : kSweepVariables)
        if (value == to_string(v)) {
          cfg.sweep_variable = v;
          found = true;
        }
      if (!found)
        fail(line, "field 'sweep_variable': '" + std::string(value) +
                       "' is not one of chi_db, alpha, p_d, gamma_mod, n");
    } else if (key == "grid") {
      cfg.grid = parse_grid(value, line);
    } else if (key == "optimize") {
      for (const std::string_view tok : split(value, ',')) {
        if (tok == "alpha") {
          cfg.optimize_alpha = true;
        } else if (tok == "beta") {
          cfg.optimize_beta = true;
        } else if (tok == "p_k") {
          cfg.optimize_p_k = true;
        } else if (tok == "none" || tok.empty()) {
          // explicit no-op
        } else {
          fail(line, "field 'optimize': '" + std::string(tok) +
                         "' is not one of alpha, beta, p_k, none");
        }
      }
    } else if (key == "output_path") {
      cfg.output_path = std::string(value);
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const char* end = value.data() + value.size();
      const auto res = std::from_chars(value.data(), end, s);
      if (res.ec != std::errc{} || res.ptr != end)
        fail(line, "field 'seed': '" + std::string(value) +
                       "' is not an unsigned integer");
      cfg.seed = s;
    } else if (key == "nm_evaluations") {
      cfg.nm_evaluations = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "nested_coarse") {
      cfg.nested_coarse = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "nested_golden") {
      cfg.nested_golden = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "alpha_coarse") {
      cfg.alpha_coarse = static_cast<int>(parse_integer(value, line, key));
    } else if (key == "alpha_golden") {
      cfg.alpha_golden = static_cast<int>(parse_integer(value, line, key));
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (saw_eta && saw_chi)
    throw ConfigError("config: give chi_db or eta, not both");

  validate_config(cfg);
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate_config(const SweepConfig& cfg) {
  try {
    validate(cfg.base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.output_path.empty()) throw ConfigError("config: empty output_path");
  if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (cfg.nm_evaluations < 1 || cfg.nested_coarse < 1 || cfg.alpha_coarse < 1 ||
      cfg.nested_golden < 0 || cfg.alpha_golden < 0)
    throw ConfigError("config: search budgets out of range");

  for (std::size_t i = 1; i < cfg.grid.size(); ++i) {
    const bool up = cfg.grid[1] > cfg.grid[0];
    if ((up && cfg.grid[i] <= cfg.grid[i - 1]) ||
        (!up && cfg.grid[i] >= cfg.grid[i - 1]))
      throw ConfigError("config: grid must be strictly monotone");
  }
  for (const double g : cfg.grid) {
    try {
      validate(apply_sweep_value(cfg.base, cfg.sweep_variable, g));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: grid value " + number(g) + " for '" +
                        std::string(to_string(cfg.sweep_variable)) +
                        "': " + e.what());
    }
  }
}

std::string render_config(const SweepConfig& cfg) {
  std::ostringstream out;
  out << "beta = " << number(cfg.base.beta) << '\n'
      << "gamma_mod = " << number(cfg.base.gamma_mod) << '\n'
      << "p_k = " << number(cfg.base.p_k) << '\n'
      << "p_d = " << number(cfg.base.p_d) << '\n'
      << "chi_db = " << number(cfg.base.chi_db) << '\n'
      << "xi = " << number(cfg.base.xi) << '\n'
      << "f_ec = " << number(cfg.base.f_ec) << '\n'
      << "n = " << cfg.base.n << '\n'
      << "eps_ec = " << number(cfg.base.eps_ec) << '\n'
      << "eps_pa = " << number(cfg.base.eps_pa) << '\n'
      << "alpha = " << number(cfg.base.alpha) << '\n'
      << "n_max = " << cfg.base.n_max << '\n'
      << "sweep_variable = " << to_string(cfg.sweep_variable) << '\n';
  if (!cfg.grid.empty()) {
    out << "grid = ";
    for (std::size_t i = 0; i < cfg.grid.size(); ++i)
      out << (i ? "," : "") << number(cfg.grid[i]);
    out << '\n';
  }
  out << "optimize = ";
  if (!cfg.optimize_alpha && !cfg.optimize_beta && !cfg.optimize_p_k) {
    out << "none";
  } else {
    const char* sep = "";
    if (cfg.optimize_alpha) out << sep << "alpha", sep = ",";
    if (cfg.optimize_beta) out << sep << "beta", sep = ",";
    if (cfg.optimize_p_k) out << sep << "p_k", sep = ",";
  }
  out << '\n'
      << "output_path = " << cfg.output_path << '\n'
      << "workers = " << cfg.workers << '\n'
      << "seed = " << cfg.seed << '\n'
      << "nm_evaluations = " << cfg.nm_evaluations << '\n'
      << "nested_coarse = " << cfg.nested_coarse << '\n'
      << "nested_golden = " << cfg.nested_golden << '\n'
      << "alpha_coarse = " << cfg.alpha_coarse << '\n'
      << "alpha_golden = " << cfg.alpha_golden << '\n';
  return out.str();
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4"}; }

std::vector<SweepConfig> preset(std::string_view name) {
  // All presets keep the protocol epsilons, f_ec = 1.1 and xi = 0.005 from
  // the ProtocolParams defaults. The lighter search budgets on the optimized
  // sweeps are a runtime choice; every emitted rate stays certified.
  std::vector<SweepConfig> out;
  if (name == "fig1") {
    const std::pair<std::int64_t, const char*> blocks[] = {
        {100000, "1e5"}, {1000000, "1e6"}, {10000000, "1e7"}, {100000000, "1e8"}};
    for (const auto& [n, tag] : blocks) {
      SweepConfig c;
      c.base.n = n;
      c.sweep_variable = SweepVariable::chi_db;
      c.grid = {0, 5, 10, 15, 20, 25, 30, 35};
      c.optimize_alpha = c.optimize_beta = c.optimize_p_k = true;
      c.nm_evaluations = 10;
      c.nested_coarse = 4;
      c.nested_golden = 4;
      c.alpha_coarse = 5;
      c.alpha_golden = 8;
      c.output_path = std::string("fig1_n") + tag + ".csv";
      out.push_back(std::move(c));
    }
  } else if (name == "fig2") {
    SweepConfig c;
    c.base.n = 100000000;
    c.sweep_variable = SweepVariable::p_d;
    c.grid = {0, 1e-6, 1e-5, 1e-4};
    c.optimize_alpha = c.optimize_beta = c.optimize_p_k = true;
    c.nm_evaluations = 10;
    c.nested_coarse = 4;
    c.nested_golden = 4;
    c.alpha_coarse = 5;
    c.alpha_golden = 8;
    c.output_path = "fig2_pd.csv";
    out.push_back(std::move(c));
  } else if (name == "fig3") {
    const std::pair<std::int64_t, const char*> blocks[] = {{1000000, "1e6"},
                                                           {10000000, "1e7"},
                                                           {100000000, "1e8"},
                                                           {1000000000, "1e9"}};
    for (const auto& [n, tag] : blocks) {
      SweepConfig c;
      c.base.n = n;
      c.sweep_variable = SweepVariable::alpha;
      c.grid = {1.0001, 1.0003, 1.001, 1.003, 1.01, 1.03, 1.1, 1.3, 1.5};
      c.output_path = std::string("fig3_n") + tag + ".csv";
      out.push_back(std::move(c));
    }
  } else if (name == "fig4") {
    SweepConfig c;
    c.base.n = 10000000;
    c.base.p_d = 1e-5;
    c.base.chi_db = 15.0;
    c.sweep_variable = SweepVariable::gamma_mod;
    c.grid = {1.0, 1.1, 1.15, 1.2};
    c.optimize_alpha = c.optimize_p_k = true;
    c.nm_evaluations = 10;
    c.nested_coarse = 4;
    c.nested_golden = 4;
    c.alpha_coarse = 5;
    c.alpha_golden = 8;
    c.output_path = "fig4_gamma.csv";
    out.push_back(std::move(c));
  } else {
    std::string names;
    for (const std::string& p : preset_names())
      names += (names.empty() ? "" : ", ") + p;
    throw ConfigError("unknown preset '" + std::string(name) +
                      "'; available: " + names);
  }
  for (const SweepConfig& c : out) validate_config(c);
  return out;
}

}  // namespace dpsk
