// JSON experiment configs: parsing, threshold resolution and serialization.
//
// One document per experiment. Relative trace paths are resolved against the
// directory of the config file; serialize() writes resolved paths, so a
// serialized config reparses to an equal ExperimentConfig from anywhere.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oppbandit/environments.hpp"
#include "oppbandit/simulator.hpp"

namespace oppbandit {

using json = nlohmann::ordered_json;

/// Invalid config; field() is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_.empty() ? "<root>" : path_, what); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const { throw ConfigError(child(key), what); }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  Node at(const std::string& key) const {
    if (!j_.contains(key)) fail(key, "missing required field");
    return Node(j_.at(key), child(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  // Rejects keys outside `allowed`, so typos do not silently fall back to defaults.
  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) fail(k, "unknown field");
    }
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::uint64_t count() const {
    if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
    if (j_.is_number_integer()) {
      if (j_.get<std::int64_t>() < 0) fail("must be nonnegative");
      return j_.get<std::uint64_t>();
    }
    if (j_.is_number_float()) {
      const double d = j_.get<double>();
      if (d >= 0.0 && d < 1.8e19 && d == std::floor(d)) return static_cast<std::uint64_t>(d);
    }
    fail("expected a nonnegative integer");
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> numbers() const {
    if (!j_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(at(i).number());
    return out;
  }

  double number(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }

 private:
  const json& j_;
  std::string path_;
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

class TraceCache {
 public:
  std::shared_ptr<const Trace> get(const std::string& path, const std::string& field) {
    if (auto it = cache_.find(path); it != cache_.end()) return it->second;
    try {
      auto t = std::make_shared<const Trace>(load_trace(path));
      cache_[path] = t;
      return t;
    } catch (const std::exception& e) {
      throw ConfigError(field, e.what());
    }
  }

 private:
  std::map<std::string, std::shared_ptr<const Trace>> cache_;
};

inline LoadModel parse_load_model(const Node& n, const std::filesystem::path& base, TraceCache& traces) {
  n.require_object();
  const std::string type = n.at("type").string();
  LoadModel model;
  if (type == "square_wave") {
    n.only({"type", "eps0", "eps1"});
    model = PeriodicSquareWave{n.number("eps0", 0.0), n.number("eps1", 0.0)};
  } else if (type == "binary_random") {
    n.only({"type", "eps0", "eps1", "rho"});
    model = BinaryRandom{n.number("eps0", 0.0), n.number("eps1", 0.0), n.number("rho", 0.5)};
  } else if (type == "beta") {
    n.only({"type", "a", "b"});
    model = BetaLoad{n.at("a").number(), n.at("b").number()};
  } else if (type == "uniform") {
    n.only({"type"});
    model = UniformLoad{};
  } else if (type == "constant") {
    n.only({"type", "value"});
    model = ConstantLoad{n.number("value", 1.0)};
  } else if (type == "trace") {
    n.only({"type", "path"});
    const std::string path = resolve_path(n.at("path").string(), base);
    model = TraceLoad{path, traces.get(path, n.child("path"))};
  } else if (type == "semi_periodic") {
    n.only({"type", "period", "base", "amplitude", "noise_a", "noise_b"});
    const SemiPeriodicSynthetic d{};
    model = SemiPeriodicSynthetic{n.number("period", d.period), n.number("base", d.base),
                                  n.number("amplitude", d.amplitude), n.number("noise_a", d.noise_a),
                                  n.number("noise_b", d.noise_b)};
  } else {
    n.fail("type", "unknown load model '" + type + "'");
  }
  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return model;
}

inline RewardModel parse_reward_model(const Node& n, const std::filesystem::path& base, TraceCache& traces) {
  n.require_object();
  const std::string type = n.at("type").string();
  RewardModel model;
  if (type == "dirac" || type == "bernoulli") {
    n.only({"type", "means"});
    auto means = n.at("means").numbers();
    if (type == "dirac") {
      model = DiracReward{std::move(means)};
    } else {
      model = BernoulliReward{std::move(means)};
    }
  } else if (type == "trace") {
    n.only({"type", "path"});
    const std::string path = resolve_path(n.at("path").string(), base);
    auto trace = traces.get(path, n.child("path"));
    if (!trace->has_rewards()) n.fail("path", "trace has no reward columns");
    model = TraceReward{path, trace};
  } else {
    n.fail("type", "unknown reward model '" + type + "'");
  }
  try {
    make_instance(model);
  } catch (const std::invalid_argument& e) {
    n.fail("means", e.what());
  }
  return model;
}

/// Default thresholds: (eps0, 1) for two-level loads, so that normalization
/// reproduces binary_normalize; (0, 1) otherwise.
inline Thresholds default_thresholds(const LoadModel& model) {
  if (const auto* m = std::get_if<BinaryRandom>(&model)) return Thresholds(m->eps0, 1.0);
  if (const auto* m = std::get_if<PeriodicSquareWave>(&model)) return Thresholds(m->eps0, 1.0);
  return Thresholds(0.0, 1.0);
}

inline void parse_thresholds(const Node& n, const LoadModel& load, PolicySpec& spec) {
  const Thresholds d = default_thresholds(load);
  double lower = d.lower();
  double upper = d.upper();
  if (n.has("thresholds")) {
    const Node t = n.at("thresholds");
    t.require_object();
    t.only({"lower", "upper", "lower_prob", "upper_prob", "single_prob"});
    if (t.has("single_prob")) {
      // l- = l+ = l-_rho: the step rule
      if (t.raw().size() != 1) t.fail("single_prob", "cannot be combined with other threshold fields");
      const double rho = t.at("single_prob").number();
      if (!(rho >= 0.0 && rho <= 1.0)) t.fail("single_prob", "probability must lie in [0, 1]");
      double l = 0.0;
      try {
        l = lower_threshold_for(load, rho);
      } catch (const std::invalid_argument& e) {
        t.fail("single_prob", e.what());
      }
      spec.lower_prob = rho;
      spec.thresholds = Thresholds(l, l);
      return;
    }
    if (t.has("lower") && t.has("lower_prob")) t.fail("lower_prob", "give either lower or lower_prob");
    if (t.has("upper") && t.has("upper_prob")) t.fail("upper_prob", "give either upper or upper_prob");
    auto resolve = [&](const std::string& key, bool upper_side) {
      const double rho = t.at(key).number();
      if (!(rho >= 0.0 && rho <= 1.0)) t.fail(key, "probability must lie in [0, 1]");
      try {
        return upper_side ? upper_threshold_for(load, rho) : lower_threshold_for(load, rho);
      } catch (const std::invalid_argument& e) {
        t.fail(key, e.what());
      }
    };
    if (t.has("lower")) lower = t.at("lower").number();
    if (t.has("upper")) upper = t.at("upper").number();
    if (t.has("lower_prob")) {
      spec.lower_prob = t.at("lower_prob").number();
      lower = resolve("lower_prob", false);
    }
    if (t.has("upper_prob")) {
      spec.upper_prob = t.at("upper_prob").number();
      upper = resolve("upper_prob", true);
    }
  }
  try {
    spec.thresholds = Thresholds(lower, upper);
  } catch (const std::invalid_argument& e) {
    n.fail("thresholds", e.what());
  }
}

inline const std::set<std::string>& policy_kinds() {
  static const std::set<std::string> kinds{"ucb", "adaucb", "eadaucb", "ts", "linucb", "rrgreedy", "oracle"};
  return kinds;
}

inline PolicySpec parse_policy(const Node& n, const LoadModel& load) {
  n.require_object();
  n.only({"kind", "label", "alpha", "thresholds", "lower_quantile", "upper_quantile", "window"});
  PolicySpec spec;
  spec.kind = n.at("kind").string();
  if (!policy_kinds().count(spec.kind)) n.fail("kind", "unknown policy '" + spec.kind + "'");
  spec.label = n.has("label") ? n.at("label").string() : spec.kind;
  if (spec.label.empty()) n.fail("label", "must not be empty");
  if (spec.label.find_first_of(",\"\r\n") != std::string::npos) {
    n.fail("label", "must not contain commas, quotes or newlines");
  }
  spec.alpha = n.number("alpha", spec.alpha);
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) n.fail("alpha", "must be positive");
  if (spec.kind == "adaucb" || spec.kind == "rrgreedy") {
    parse_thresholds(n, load, spec);
  } else if (n.has("thresholds")) {
    n.fail("thresholds", "only adaucb and rrgreedy take fixed thresholds");
  }
  if (spec.kind == "eadaucb") {
    spec.lower_quantile = n.number("lower_quantile", spec.lower_quantile);
    spec.upper_quantile = n.number("upper_quantile", spec.upper_quantile);
    if (!(spec.lower_quantile > 0.0 && spec.lower_quantile <= 1.0)) n.fail("lower_quantile", "must lie in (0, 1]");
    if (!(spec.upper_quantile > 0.0 && spec.upper_quantile <= 1.0)) n.fail("upper_quantile", "must lie in (0, 1]");
    if (spec.lower_quantile > spec.upper_quantile) n.fail("upper_quantile", "must be >= lower_quantile");
    if (n.has("window")) {
      const auto w = n.at("window").count();
      if (w < 1) n.fail("window", "must be >= 1");
      spec.window = static_cast<std::size_t>(w);
    }
  } else {
    for (const char* key : {"lower_quantile", "upper_quantile", "window"}) {
      if (n.has(key)) n.fail(key, "only eadaucb takes this field");
    }
  }
  return spec;
}

}  // namespace detail

/// Parses a config document. `base_dir` anchors relative trace paths.
inline ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir = ".") {
  using detail::Node;
  const Node root(doc, "");
  root.require_object();
  root.only({"name", "reward_model", "load_model", "policies", "horizon", "replications", "seed", "checkpoint_count",
             "checkpoints", "regret", "shared_streams", "threads", "plot", "bounds"});
  detail::TraceCache traces;
  ExperimentConfig cfg;
  if (root.has("name")) cfg.name = root.at("name").string();
  cfg.load_model = detail::parse_load_model(root.at("load_model"), base_dir, traces);
  cfg.reward_model = detail::parse_reward_model(root.at("reward_model"), base_dir, traces);

  const Node pols = root.at("policies");
  if (!pols.raw().is_array() || pols.raw().empty()) pols.fail("expected a nonempty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < pols.raw().size(); ++i) {
    auto spec = detail::parse_policy(pols.at(i), cfg.load_model);
    if (!labels.insert(spec.label).second) pols.at(i).fail("label", "duplicate label '" + spec.label + "'");
    cfg.policies.push_back(std::move(spec));
  }

  cfg.horizon = root.at("horizon").count();
  if (root.has("replications")) cfg.replications = root.at("replications").count();
  if (root.has("seed")) cfg.seed = root.at("seed").count();
  if (root.has("checkpoint_count") && root.has("checkpoints")) {
    root.fail("checkpoints", "give either checkpoints or checkpoint_count");
  }
  if (root.has("checkpoint_count")) cfg.checkpoint_count = static_cast<std::size_t>(root.at("checkpoint_count").count());
  if (root.has("checkpoints")) {
    const Node cps = root.at("checkpoints");
    if (!cps.raw().is_array() || cps.raw().empty()) cps.fail("expected a nonempty array of slots");
    for (std::size_t i = 0; i < cps.raw().size(); ++i) cfg.checkpoints.push_back(cps.at(i).count());
  }
  if (root.has("regret")) {
    const std::string r = root.at("regret").string();
    if (r == "pseudo") {
      cfg.regret = RegretKind::kPseudo;
    } else if (r == "realized") {
      cfg.regret = RegretKind::kRealized;
    } else {
      root.fail("regret", "expected 'pseudo' or 'realized'");
    }
  }
  if (root.has("shared_streams")) cfg.shared_streams = root.at("shared_streams").boolean();
  if (root.has("threads")) cfg.threads = static_cast<unsigned>(root.at("threads").count());
  if (root.has("plot")) cfg.plot = root.at("plot").boolean();
  if (root.has("bounds")) {
    const Node b = root.at("bounds");
    b.require_object();
    b.only({"quadrature_step", "alpha", "l_minus"});
    cfg.bounds.quadrature_step = b.number("quadrature_step", cfg.bounds.quadrature_step);
    if (!(cfg.bounds.quadrature_step > 0.0)) b.fail("quadrature_step", "must be positive");
    if (b.has("alpha")) cfg.bounds.alpha = b.at("alpha").number();
    if (b.has("l_minus")) cfg.bounds.l_minus = b.at("l_minus").number();
  }

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos && msg.find(' ') > colon) throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
    throw ConfigError("<root>", msg);
  }
  return cfg;
}

/// Reads and parses a config file. A run's metadata.json is accepted too: its
/// embedded "config" is used.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("version")) doc = doc.at("config");
  return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

namespace detail {

inline json to_json(const LoadModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PeriodicSquareWave>) {
          return {{"type", "square_wave"}, {"eps0", m.eps0}, {"eps1", m.eps1}};
        } else if constexpr (std::is_same_v<M, BinaryRandom>) {
          return {{"type", "binary_random"}, {"eps0", m.eps0}, {"eps1", m.eps1}, {"rho", m.rho}};
        } else if constexpr (std::is_same_v<M, BetaLoad>) {
          return {{"type", "beta"}, {"a", m.a}, {"b", m.b}};
        } else if constexpr (std::is_same_v<M, UniformLoad>) {
          return {{"type", "uniform"}};
        } else if constexpr (std::is_same_v<M, ConstantLoad>) {
          return {{"type", "constant"}, {"value", m.value}};
        } else if constexpr (std::is_same_v<M, TraceLoad>) {
          return {{"type", "trace"}, {"path", m.path}};
        } else {
          return {{"type", "semi_periodic"}, {"period", m.period},     {"base", m.base},
                  {"amplitude", m.amplitude}, {"noise_a", m.noise_a}, {"noise_b", m.noise_b}};
        }
      },
      model);
}

inline json to_json(const RewardModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiracReward>) {
          return {{"type", "dirac"}, {"means", m.means}};
        } else if constexpr (std::is_same_v<M, BernoulliReward>) {
          return {{"type", "bernoulli"}, {"means", m.means}};
        } else {
          return {{"type", "trace"}, {"path", m.path}};
        }
      },
      model);
}

inline json to_json(const PolicySpec& p) {
  json j{{"kind", p.kind}, {"label", p.label}, {"alpha", p.alpha}};
  if (p.kind == "adaucb" || p.kind == "rrgreedy") {
    json t = json::object();
    if (p.lower_prob) {
      t["lower_prob"] = *p.lower_prob;
    } else {
      t["lower"] = p.thresholds.lower();
    }
    if (p.upper_prob) {
      t["upper_prob"] = *p.upper_prob;
    } else {
      t["upper"] = p.thresholds.upper();
    }
    j["thresholds"] = t;
  }
  if (p.kind == "eadaucb") {
    j["lower_quantile"] = p.lower_quantile;
    j["upper_quantile"] = p.upper_quantile;
    if (p.window) j["window"] = *p.window;
  }
  return j;
}

}  // namespace detail

/// Fully explicit document; parse_config(serialize(c)) == c.
inline json serialize(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["reward_model"] = detail::to_json(cfg.reward_model);
  j["load_model"] = detail::to_json(cfg.load_model);
  j["policies"] = json::array();
  for (const auto& p : cfg.policies) j["policies"].push_back(detail::to_json(p));
  j["horizon"] = cfg.horizon;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  if (cfg.checkpoints.empty()) {
    j["checkpoint_count"] = cfg.checkpoint_count;
  } else {
    j["checkpoints"] = cfg.checkpoints;
  }
  j["regret"] = cfg.regret == RegretKind::kPseudo ? "pseudo" : "realized";
  j["shared_streams"] = cfg.shared_streams;
  j["threads"] = cfg.threads;
  j["plot"] = cfg.plot;
  json b{{"quadrature_step", cfg.bounds.quadrature_step}};
  if (cfg.bounds.alpha) b["alpha"] = *cfg.bounds.alpha;
  if (cfg.bounds.l_minus) b["l_minus"] = *cfg.bounds.l_minus;
  j["bounds"] = b;
  return j;
}

}  // namespace oppbandit
