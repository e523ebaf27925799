// Experiment runner commands behind the oppbandit binary: run, bounds, compare.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oppbandit/bounds.hpp"
#include "oppbandit/config.hpp"
#include "oppbandit/simulator.hpp"

#ifndef OPPBANDIT_VERSION
#define OPPBANDIT_VERSION "0.0.0"
#endif

namespace oppbandit::cli {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = OPPBANDIT_VERSION;
inline constexpr const char* kStreamScheme =
    "philox4x32-10; key = seed; counter = (draw index, stream id); "
    "stream id = replication << 24 | slot << 4 | role; slot 0 = environment, 1 + i = policy i; "
    "roles load = 1, reward = 2, policy = 3";

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::uint64_t> horizon;
};

/// Raised by compare when the two inputs do not describe the same schedule.
class CompareError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw CompareError("not a number: '" + s + "'");
  return v;
}

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const Overrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.replications) cfg.replications = *ov.replications;
  if (ov.horizon) cfg.horizon = *ov.horizon;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
    throw ConfigError("<root>", msg);
  }
  return cfg;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// run

inline std::string results_csv(const std::vector<RegretTrace>& traces) {
  std::ostringstream out;
  const std::size_t arms = traces.empty() ? 0 : traces.front().mean_pulls.front().size();
  out << "policy,t,mean_regret,std_regret";
  for (std::size_t k = 0; k < arms; ++k) out << ",mean_pulls_arm_" << k + 1;
  out << '\n';
  for (const auto& tr : traces) {
    for (std::size_t c = 0; c < tr.checkpoints.size(); ++c) {
      out << tr.label << ',' << tr.checkpoints[c] << ',' << format_real(tr.mean_regret[c]) << ','
          << format_real(tr.std_regret[c]);
      for (double p : tr.mean_pulls[c]) out << ',' << format_real(p);
      out << '\n';
    }
  }
  return out.str();
}

/// Line chart of mean regret against t (log axis) for every policy.
inline std::string regret_svg(const std::vector<RegretTrace>& traces, const std::string& title) {
  const double w = 800, h = 500, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  double t_min = std::numeric_limits<double>::infinity(), t_max = 1.0, y_max = 0.0;
  for (const auto& tr : traces) {
    for (std::size_t c = 0; c < tr.checkpoints.size(); ++c) {
      t_min = std::min(t_min, static_cast<double>(tr.checkpoints[c]));
      t_max = std::max(t_max, static_cast<double>(tr.checkpoints[c]));
      y_max = std::max(y_max, tr.mean_regret[c]);
    }
  }
  if (!std::isfinite(t_min)) t_min = 1.0;
  if (t_max <= t_min) t_max = t_min * 10.0;
  if (!(y_max > 0.0)) y_max = 1.0;
  y_max *= 1.05;
  const double lx0 = std::log10(t_min), lx1 = std::log10(t_max);
  auto px = [&](double t) { return left + pw * (std::log10(t) - lx0) / (lx1 - lx0); };
  auto py = [&](double y) { return top + ph * (1.0 - y / y_max); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(lx0 - 1e-9)); e <= static_cast<int>(std::floor(lx1 + 1e-9)); ++e) {
    const double x = px(std::pow(10.0, e));
    s << "<line x1=\"" << num(x) << "\" y1=\"" << top << "\" x2=\"" << num(x) << "\" y2=\"" << top + ph
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double y = py(v);
    s << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\"" << num(y)
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << label(v) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">t</text>\n";
  s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
    << ")\">mean regret</text>\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const char* colour = colours[i % 10];
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t c = 0; c < traces[i].checkpoints.size(); ++c) {
      s << (c ? " " : "") << num(px(static_cast<double>(traces[i].checkpoints[c]))) << ','
        << num(py(traces[i].mean_regret[c]));
    }
    s << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(traces[i].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

namespace detail {

inline void add_trace_info(json& meta, const ExperimentConfig& cfg) {
  json traces = json::array();
  if (const auto* m = std::get_if<TraceLoad>(&cfg.load_model); m && m->trace) {
    traces.push_back({{"role", "load"},
                      {"path", m->path},
                      {"rows", m->trace->rows()},
                      {"normalization", "divided by maximum raw load"},
                      {"scale", m->trace->scale},
                      {"wraps", trace_wraps(cfg.load_model, cfg.horizon)}});
  }
  if (const auto* m = std::get_if<TraceReward>(&cfg.reward_model); m && m->trace) {
    traces.push_back({{"role", "reward"},
                      {"path", m->path},
                      {"rows", m->trace->rows()},
                      {"wraps", (cfg.horizon - 1) / m->trace->rows()}});
  }
  meta["traces"] = traces;
}

}  // namespace detail

struct RunOutput {
  ExperimentConfig config;
  std::vector<RegretTrace> traces;
  fs::path results;
  fs::path metadata;
  std::optional<fs::path> plot;
};

inline json run_metadata(const ExperimentConfig& cfg) {
  json meta;
  meta["version"] = kVersion;
  meta["command"] = "run";
  meta["config"] = serialize(cfg);
  meta["seed"] = cfg.seed;
  meta["streams"] = kStreamScheme;
  meta["checkpoints"] = resolved_checkpoints(cfg);
  meta["means"] = make_instance(cfg).means();
  meta["regret"] = cfg.regret == RegretKind::kPseudo ? "pseudo" : "realized";
  detail::add_trace_info(meta, cfg);
  return meta;
}

/// Runs every policy and writes results.csv, metadata.json and (if enabled)
/// regret.svg into out_dir.
inline RunOutput cmd_run(const ExperimentConfig& config, const fs::path& out_dir) {
  RunOutput out;
  out.config = config;
  out.traces = run_experiment(config);
  ensure_dir(out_dir);
  out.results = out_dir / "results.csv";
  out.metadata = out_dir / "metadata.json";
  write_text(out.results, results_csv(out.traces));
  write_text(out.metadata, run_metadata(config).dump(2) + "\n");
  if (config.plot) {
    out.plot = out_dir / "regret.svg";
    write_text(*out.plot, regret_svg(out.traces, config.name));
  }
  return out;
}

inline RunOutput cmd_run(const fs::path& config_path, const fs::path& out_dir, const Overrides& ov = {}) {
  return cmd_run(apply_overrides(load_config(config_path), ov), out_dir);
}

// ---------------------------------------------------------------------------
// bounds

struct BoundReport {
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // per column, per checkpoint
  json metadata;

  const std::vector<double>& column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no bound column " + name);
    return values[static_cast<std::size_t>(it - columns.begin())];
  }
  bool has(const std::string& name) const { return std::find(columns.begin(), columns.end(), name) != columns.end(); }
};

namespace detail {

inline bool ada_family(const std::string& kind) { return kind == "adaucb" || kind == "eadaucb"; }

inline const PolicySpec* first_ada(const ExperimentConfig& cfg) {
  for (const auto& p : cfg.policies) {
    if (ada_family(p.kind)) return &p;
  }
  return nullptr;
}

inline double bound_alpha(const ExperimentConfig& cfg) {
  if (cfg.bounds.alpha) return *cfg.bounds.alpha;
  if (const auto* p = first_ada(cfg)) return p->alpha;
  return cfg.policies.front().alpha;
}

inline std::optional<double> bound_l_minus(const ExperimentConfig& cfg) {
  if (cfg.bounds.l_minus) return cfg.bounds.l_minus;
  const auto* p = first_ada(cfg);
  if (!p) return std::nullopt;
  if (p->kind == "adaucb") return p->thresholds.lower();
  try {
    return load_quantile(cfg.load_model, p->lower_quantile);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Bound values at the run's checkpoints. Which columns appear depends on the
/// scenario: lemma1_* and theorem1_* for two-arm square-wave load, theorem2_*
/// for binary random load, theorem3_* for continuous loads, lemma3_* always.
inline BoundReport compute_bounds(const ExperimentConfig& cfg) {
  BoundReport r;
  r.checkpoints = resolved_checkpoints(cfg);
  const auto instance = make_instance(cfg);
  const double alpha = detail::bound_alpha(cfg);
  const double step = cfg.bounds.quadrature_step;
  json warnings = json::array();
  json& meta = r.metadata;
  meta["version"] = kVersion;
  meta["command"] = "bounds";
  meta["config"] = serialize(cfg);
  meta["alpha"] = alpha;
  meta["quadrature_step"] = step;
  meta["checkpoints"] = r.checkpoints;
  meta["note"] = "log terms only; additive O(1) constants are not included";

  auto add = [&](const std::string& name, auto&& fn) {
    r.columns.push_back(name);
    std::vector<double> col;
    for (auto t : r.checkpoints) col.push_back(fn(static_cast<double>(t)));
    r.values.push_back(std::move(col));
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  const auto* square = std::get_if<PeriodicSquareWave>(&cfg.load_model);
  if (square && instance.arms() == 2) {
    const std::size_t arm = 1 - instance.best_arm();
    const double gap = instance.gap(arm);
    meta["lemma1_arm"] = arm + 1;
    if (std::holds_alternative<DiracReward>(cfg.reward_model)) {
      add("lemma1_upper", [&](double t) { return bounds::lemma1_upper(t, alpha, gap); });
      const auto curve = bounds::lemma1_lower_curve(r.checkpoints.back() / 2, alpha, gap, step);
      add("lemma1_lower", [&](double t) { return curve[static_cast<std::uint64_t>(t) / 2]; });
    }
    meta["theorem1_coefficient"] = square->eps0 * alpha / gap;
    add("theorem1_log_term", [&](double t) { return bounds::theorem1_log_term(t, alpha, square->eps0, gap); });
  }

  const auto gaps = instance.suboptimal_gaps();
  if (const auto* bin = std::get_if<BinaryRandom>(&cfg.load_model); bin && !gaps.empty()) {
    const auto c = bounds::theorem2_coeff(alpha, bin->eps0, bin->eps1, gaps);
    for (const auto& w : c.warnings) warnings.push_back("theorem2: " + w);
    meta["theorem2_coefficient"] = c.value;
    add("theorem2_log_term", [&](double t) { return c.value * std::log(t); });
  }

  const bool continuous = std::holds_alternative<BetaLoad>(cfg.load_model) ||
                          std::holds_alternative<UniformLoad>(cfg.load_model) ||
                          std::holds_alternative<TraceLoad>(cfg.load_model);
  if (continuous && !gaps.empty()) {
    if (const auto l_minus = detail::bound_l_minus(cfg)) {
      try {
        const auto c = bounds::theorem3_coeff(alpha, cfg.load_model, *l_minus, gaps);
        meta["l_minus"] = *l_minus;
        meta["conditional_load_mean"] = c.conditional_mean;
        meta["theorem3_coefficient"] = c.value;
        add("theorem3_log_term", [&](double t) { return c.value * std::log(t); });
      } catch (const std::invalid_argument& e) {
        warnings.push_back(std::string("theorem3: ") + e.what());
      }
    } else {
      warnings.push_back("theorem3: no lower threshold available; set bounds.l_minus");
    }
  }

  for (std::size_t k = 0; k < instance.arms(); ++k) {
    const double gap = instance.gap(k);
    if (!(gap > 0.0)) continue;
    add("lemma3_pulls_arm_" + std::to_string(k + 1),
        [&](double t) { return t >= 2.0 ? bounds::lemma3_pull_bound(t, alpha, gap) : nan; });
  }
  meta["warnings"] = warnings;
  return r;
}

inline std::string bounds_csv(const BoundReport& r) {
  std::ostringstream out;
  out << 't';
  for (const auto& c : r.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    out << r.checkpoints[i];
    for (const auto& col : r.values) out << ',' << format_real(col[i]);
    out << '\n';
  }
  return out.str();
}

/// Writes bounds.csv and metadata.json into out_dir.
inline BoundReport cmd_bounds(const ExperimentConfig& config, const fs::path& out_dir) {
  auto report = compute_bounds(config);
  ensure_dir(out_dir);
  write_text(out_dir / "bounds.csv", bounds_csv(report));
  write_text(out_dir / "metadata.json", report.metadata.dump(2) + "\n");
  return report;
}

inline BoundReport cmd_bounds(const fs::path& config_path, const fs::path& out_dir, const Overrides& ov = {}) {
  return cmd_bounds(apply_overrides(load_config(config_path), ov), out_dir);
}

// ---------------------------------------------------------------------------
// compare

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CompareError("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
  bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
};

inline CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) return out;
      start = comma + 1;
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw CompareError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw CompareError(path.string() + ": empty file");
  return table;
}

struct CompareRow {
  std::string policy;
  std::uint64_t t = 0;
  double regret = 0.0;
  double log_term = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool lemma1_checked = false;
  bool lemma1_ok = true;
  double pulls = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
};

struct Verdict {
  std::string log_term_column;
  std::vector<CompareRow> rows;
  std::size_t lemma1_checks = 0;
  std::size_t violations = 0;

  bool ok() const { return violations == 0; }
  std::size_t exit_code() const { return ok() ? 0 : 2; }
};

/// Checks a run directory against a bounds directory. Lemma 1 is a hard check
/// for AdaUCB runs whose alpha matches the bound's; the others are reported as
/// regret / log-term ratios.
inline Verdict cmd_compare(const fs::path& run_dir, const fs::path& bounds_dir) {
  const auto results = read_csv(run_dir / "results.csv");
  const auto table = read_csv(bounds_dir / "bounds.csv");
  json run_meta, bound_meta;
  try {
    run_meta = json::parse(read_text(run_dir / "metadata.json"));
    bound_meta = json::parse(read_text(bounds_dir / "metadata.json"));
  } catch (const json::exception& e) {
    throw CompareError(std::string("malformed metadata: ") + e.what());
  }

  std::vector<std::uint64_t> cps;
  const std::size_t t_col = table.index("t");
  for (const auto& row : table.rows) cps.push_back(static_cast<std::uint64_t>(parse_real_field(row[t_col])));

  std::map<std::string, std::pair<std::string, double>> policies;  // label -> (kind, alpha)
  for (const auto& p : run_meta.at("config").at("policies")) {
    policies[p.at("label").get<std::string>()] = {p.at("kind").get<std::string>(), p.at("alpha").get<double>()};
  }
  const double bound_alpha = bound_meta.at("alpha").get<double>();

  Verdict v;
  for (const char* name : {"theorem1_log_term", "theorem2_log_term", "theorem3_log_term"}) {
    if (table.has(name)) {
      v.log_term_column = name;
      break;
    }
  }
  const bool have_lemma1 = table.has("lemma1_upper") && table.has("lemma1_lower");
  std::string pulls_col;
  if (have_lemma1) pulls_col = "mean_pulls_arm_" + std::to_string(bound_meta.at("lemma1_arm").get<std::size_t>());

  const std::size_t pc = results.index("policy"), tc = results.index("t"), rc = results.index("mean_regret");
  std::map<std::string, std::vector<std::uint64_t>> seen;
  for (const auto& row : results.rows) {
    CompareRow out;
    out.policy = row[pc];
    out.t = static_cast<std::uint64_t>(parse_real_field(row[tc]));
    out.regret = parse_real_field(row[rc]);
    auto& idx = seen[out.policy];
    const std::size_t i = idx.size();
    if (i >= cps.size() || cps[i] != out.t) {
      throw CompareError("checkpoint mismatch: policy " + out.policy + " row " + std::to_string(i + 1) + " has t = " +
                         std::to_string(out.t) +
                         (i < cps.size() ? ", bounds have t = " + std::to_string(cps[i]) : ", bounds have no such row"));
    }
    idx.push_back(out.t);
    if (!v.log_term_column.empty()) {
      out.log_term = parse_real_field(table.rows[i][table.index(v.log_term_column)]);
      out.ratio = out.regret == 0.0 ? 0.0 : out.regret / out.log_term;
    }
    const auto pol = policies.find(out.policy);
    if (pol == policies.end()) throw CompareError("policy " + out.policy + " is not in the run metadata");
    if (have_lemma1 && pol->second.first == "adaucb" && pol->second.second == bound_alpha) {
      out.lemma1_checked = true;
      out.pulls = parse_real_field(row[results.index(pulls_col)]);
      out.upper = parse_real_field(table.rows[i][table.index("lemma1_upper")]);
      out.lower = parse_real_field(table.rows[i][table.index("lemma1_lower")]);
      out.lemma1_ok = out.pulls <= out.upper && (std::isnan(out.lower) || out.pulls >= out.lower);
      ++v.lemma1_checks;
      if (!out.lemma1_ok) ++v.violations;
    }
    v.rows.push_back(out);
  }
  for (const auto& [label, ts] : seen) {
    if (ts.size() != cps.size()) {
      throw CompareError("checkpoint mismatch: policy " + label + " has " + std::to_string(ts.size()) +
                         " checkpoints, bounds have " + std::to_string(cps.size()));
    }
  }
  if (seen.empty()) throw CompareError("run results are empty");
  return v;
}

inline std::string verdict_csv(const Verdict& v) {
  std::ostringstream out;
  out << "policy,t,mean_regret,log_term,ratio,lemma1,pulls,lemma1_lower,lemma1_upper\n";
  for (const auto& r : v.rows) {
    out << r.policy << ',' << r.t << ',' << format_real(r.regret) << ',' << format_real(r.log_term) << ','
        << format_real(r.ratio) << ',' << (r.lemma1_checked ? (r.lemma1_ok ? "PASS" : "FAIL") : "NA") << ','
        << format_real(r.pulls) << ',' << format_real(r.lower) << ',' << format_real(r.upper) << '\n';
  }
  return out.str();
}

}  // namespace oppbandit::cli
