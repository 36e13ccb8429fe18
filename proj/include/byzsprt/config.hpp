#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "byzsprt/adversary.hpp"
#include "byzsprt/common.hpp"
#include "byzsprt/detection.hpp"
#include "byzsprt/models.hpp"
#include "byzsprt/montecarlo.hpp"

namespace byzsprt {

/// Config files use a small TOML subset: `[section]` headers, `key = value`
/// lines, `#` comments, and flat arrays. Values are strings in double
/// quotes, numbers, booleans, or arrays of those. Unknown keys are hard
/// errors so typos cannot silently fall back to defaults.
struct ConfigValue {
  enum class Kind { kString, kNumber, kBool, kArray };
  Kind kind = Kind::kString;
  std::string str;
  double number = 0.0;
  bool boolean = false;
  std::vector<ConfigValue> items;
  int line = 0;
};

namespace confdetail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void fail(const std::string& path, int line, const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

inline ConfigValue parse_scalar(std::string_view tok, int line, const std::string& path) {
  ConfigValue v;
  v.line = line;
  if (tok.size() >= 2 && tok.front() == '"') {
    if (tok.back() != '"') fail(path, line, "unterminated string");
    const auto inner = tok.substr(1, tok.size() - 2);
    if (inner.find('"') != std::string_view::npos)
      fail(path, line, "embedded quotes are not supported");
    v.kind = ConfigValue::Kind::kString;
    v.str = std::string(inner);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = ConfigValue::Kind::kBool;
    v.boolean = tok == "true";
    return v;
  }
  const std::string text(tok);
  char* end = nullptr;
  const double num = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    fail(path, line, "cannot parse value '" + text + "'");
  v.kind = ConfigValue::Kind::kNumber;
  v.number = num;
  return v;
}

inline ConfigValue parse_value(std::string_view tok, int line, const std::string& path) {
  tok = trim(tok);
  if (tok.empty()) fail(path, line, "missing value");
  if (tok.front() != '[') return parse_scalar(tok, line, path);
  if (tok.back() != ']') fail(path, line, "unterminated array");
  ConfigValue v;
  v.kind = ConfigValue::Kind::kArray;
  v.line = line;
  const auto inner = trim(tok.substr(1, tok.size() - 2));
  if (inner.empty()) return v;
  std::size_t start = 0;
  bool in_string = false;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    if (i < inner.size() && inner[i] == '"') in_string = !in_string;
    if (i < inner.size() && inner[i] == '[' && !in_string)
      fail(path, line, "nested arrays are not supported");
    if (i == inner.size() || (inner[i] == ',' && !in_string)) {
      const auto piece = trim(inner.substr(start, i - start));
      if (piece.empty()) fail(path, line, "empty array element");
      v.items.push_back(parse_scalar(piece, line, path));
      start = i + 1;
    }
  }
  if (in_string) fail(path, line, "unterminated string in array");
  return v;
}

}  // namespace confdetail

/// Parsed but untyped config: sections of key/value pairs. The top level is
/// the section with the empty name.
struct RawConfig {
  std::string path;
  std::map<std::string, std::map<std::string, ConfigValue>> sections;

  static RawConfig parse(std::string_view text, std::string path) {
    RawConfig raw;
    raw.path = std::move(path);
    raw.sections[""];
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line =
          text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;

      // comments start at an unquoted '#'
      bool in_string = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) {
          line = line.substr(0, i);
          break;
        }
      }
      line = confdetail::trim(line);
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']') confdetail::fail(raw.path, line_no, "unterminated section header");
        const auto name = confdetail::trim(line.substr(1, line.size() - 2));
        if (name.empty()) confdetail::fail(raw.path, line_no, "empty section name");
        for (char ch : name)
          if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
            confdetail::fail(raw.path, line_no, "invalid section name");
        current = std::string(name);
        if (raw.sections.count(current))
          confdetail::fail(raw.path, line_no, "section [" + current + "] appears twice");
        raw.sections[current];
        continue;
      }

      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        confdetail::fail(raw.path, line_no, "expected 'key = value'");
      const auto key = confdetail::trim(line.substr(0, eq));
      if (key.empty()) confdetail::fail(raw.path, line_no, "empty key");
      for (char ch : key)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
          confdetail::fail(raw.path, line_no, "invalid key '" + std::string(key) + "'");
      auto& section = raw.sections[current];
      if (section.count(std::string(key))) {
        const std::string where = current.empty() ? "top level" : "[" + current + "]";
        confdetail::fail(raw.path, line_no,
                         "key '" + std::string(key) + "' appears twice in " + where);
      }
      section[std::string(key)] =
          confdetail::parse_value(line.substr(eq + 1), line_no, raw.path);
    }
    return raw;
  }
};

/// Typed accessor over one section; tracks which keys were read so finish()
/// can reject leftovers with their line numbers.
class SectionReader {
 public:
  SectionReader(const RawConfig& raw, std::string name)
      : path_(raw.path), name_(std::move(name)) {
    const auto it = raw.sections.find(name_);
    if (it != raw.sections.end()) kv_ = &it->second;
  }

  bool present() const { return kv_ != nullptr; }
  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  std::optional<std::string> string_opt(const std::string& key) {
    const auto* v = fetch(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::kString) fail_key(key, *v, "expected a string");
    return v->str;
  }
  std::string string_or(const std::string& key, std::string fallback) {
    auto v = string_opt(key);
    return v ? *v : std::move(fallback);
  }

  std::optional<double> number_opt(const std::string& key) {
    const auto* v = fetch(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::kNumber) fail_key(key, *v, "expected a number");
    return v->number;
  }
  double number_or(const std::string& key, double fallback) {
    auto v = number_opt(key);
    return v ? *v : fallback;
  }

  std::optional<std::int64_t> int_opt(const std::string& key) {
    const auto* v = fetch(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::kNumber) fail_key(key, *v, "expected an integer");
    return to_int(key, *v);
  }
  std::int64_t int_or(const std::string& key, std::int64_t fallback) {
    auto v = int_opt(key);
    return v ? *v : fallback;
  }

  std::vector<double> number_array(const std::string& key) {
    const auto* v = fetch(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::kArray) fail_key(key, *v, "expected an array");
    std::vector<double> out;
    for (const auto& item : v->items) {
      if (item.kind != ConfigValue::Kind::kNumber) fail_key(key, item, "expected numbers");
      out.push_back(item.number);
    }
    return out;
  }

  std::vector<int> int_array(const std::string& key) {
    const auto* v = fetch(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::kArray) fail_key(key, *v, "expected an array");
    std::vector<int> out;
    for (const auto& item : v->items) {
      if (item.kind != ConfigValue::Kind::kNumber) fail_key(key, item, "expected integers");
      out.push_back(static_cast<int>(to_int(key, item)));
    }
    return out;
  }

  void finish() {
    if (!kv_) return;
    for (const auto& [key, value] : *kv_) {
      if (!used_.count(key)) {
        const std::string where = name_.empty() ? "the top level" : "[" + name_ + "]";
        confdetail::fail(path_, value.line, "unknown key '" + key + "' in " + where);
      }
    }
  }

 private:
  const ConfigValue* fetch(const std::string& key) {
    if (!kv_) return nullptr;
    const auto it = kv_->find(key);
    if (it == kv_->end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::int64_t to_int(const std::string& key, const ConfigValue& v) {
    const double n = v.number;
    if (std::abs(n) > 9.0e15 || n != std::floor(n))
      fail_key(key, v, "expected an integer");
    return static_cast<std::int64_t>(n);
  }

  [[noreturn]] void fail_key(const std::string& key, const ConfigValue& v,
                             const std::string& msg) {
    confdetail::fail(path_, v.line, "key '" + key + "': " + msg);
  }

  const std::map<std::string, ConfigValue>* kv_ = nullptr;
  std::set<std::string> used_;
  std::string path_;
  std::string name_;
};

enum class ExperimentKind { kOperatingPoint, kGammaSweep, kSandwich, kUnknownC, kValidate };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kOperatingPoint: return "operating-point";
    case ExperimentKind::kGammaSweep: return "gamma-sweep";
    case ExperimentKind::kSandwich: return "sandwich";
    case ExperimentKind::kUnknownC: return "unknown-c";
    case ExperimentKind::kValidate: return "validate";
  }
  return "?";
}

/// Fully validated run description. Every field is the effective value after
/// defaults; the canonical text below is what the config hash covers.
struct Config {
  ExperimentKind experiment = ExperimentKind::kOperatingPoint;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  int threads = 1;

  // model
  bool gaussian_model = true;
  GaussianPair gauss;
  FiniteAlphabet finite;

  // detector
  bool voting = true;
  int s = 10;
  int r = 8;
  std::vector<int> sensor_set;  // sum rule only; empty = all
  double a = 100.0, b = 100.0;
  std::int64_t max_horizon = 1'000'000;

  // adversary
  AttackSpec attack;

  // estimation
  std::uint64_t trials = 10'000;
  std::uint64_t weighted_trials = 10'000;
  Estimator estimator = Estimator::kPlain;

  // gamma-sweep
  std::vector<double> thresholds;

  // sandwich
  double sandwich_threshold = 100.0;
  double sandwich_magnitude = 10.0;
  int sandwich_c = 0;

  // unknown-c
  int c_bar = 0;
  std::vector<int> c_list;
  double unknown_c_threshold = 100.0;

  // validate
  std::int64_t validate_horizon = 60;

  HypothesisModel make_model() const {
    return gaussian_model ? HypothesisModel(gauss) : HypothesisModel(finite);
  }

  DetectorRule make_rule() const {
    if (voting) return VotingRule{r};
    return SumRule{sensor_set};
  }

  PanelExperiment make_experiment() const {
    return PanelExperiment{make_model(), make_rule(), attack, s, max_horizon};
  }

  EstimationOptions make_options(int point_index = 0) const {
    EstimationOptions opt;
    opt.trials = trials;
    opt.weighted_trials = weighted_trials;
    opt.estimator = estimator;
    opt.threads = threads;
    opt.seed = seed;
    opt.point_index = point_index;
    return opt;
  }
};

namespace confdetail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace confdetail

/// Deterministic dump of every statistically meaningful field, used for the
/// config hash and echoed into the run summary. Execution details (threads,
/// output paths) are excluded: the same seed and setup give byte-identical
/// results no matter how the work is scheduled.
inline std::string canonical_text(const Config& c) {
  std::ostringstream out;
  out << "experiment = \"" << to_string(c.experiment) << "\"\n";
  out << "seed = " << c.seed << "\n";
  out << "[model]\n";
  if (c.gaussian_model) {
    out << "family = \"gaussian\"\n";
    out << "mean0 = " << confdetail::num(c.gauss.mean0) << "\n";
    out << "mean1 = " << confdetail::num(c.gauss.mean1) << "\n";
    out << "sigma = " << confdetail::num(c.gauss.sigma) << "\n";
  } else {
    out << "family = \"finite\"\n";
    const auto dump = [&](const char* key, const std::vector<double>& xs) {
      out << key << " = [";
      for (std::size_t i = 0; i < xs.size(); ++i)
        out << (i ? ", " : "") << confdetail::num(xs[i]);
      out << "]\n";
    };
    dump("points", c.finite.points);
    dump("mass0", c.finite.mass0);
    dump("mass1", c.finite.mass1);
  }
  out << "[detector]\n";
  out << "rule = \"" << (c.voting ? "voting" : "sum-sprt") << "\"\n";
  out << "s = " << c.s << "\n";
  if (c.voting) out << "r = " << c.r << "\n";
  if (!c.voting) {
    out << "sensor_set = [";
    for (std::size_t i = 0; i < c.sensor_set.size(); ++i)
      out << (i ? ", " : "") << c.sensor_set[i];
    out << "]\n";
  }
  out << "a = " << confdetail::num(c.a) << "\n";
  out << "b = " << confdetail::num(c.b) << "\n";
  out << "max_horizon = " << c.max_horizon << "\n";
  out << "[attack]\n";
  out << "type = \"" << to_string(c.attack.type) << "\"\n";
  out << "c = " << c.attack.c() << "\n";
  out << "placement = \""
      << (c.attack.placement.mode == PlacementSpec::Mode::kFixed ? "fixed" : "random") << "\"\n";
  if (c.attack.placement.mode == PlacementSpec::Mode::kFixed) {
    out << "indices = [";
    for (std::size_t i = 0; i < c.attack.placement.fixed_indices.size(); ++i)
      out << (i ? ", " : "") << c.attack.placement.fixed_indices[i];
    out << "]\n";
  }
  if (c.attack.type == AttackType::kSuppression)
    out << "magnitude = " << confdetail::num(c.attack.magnitude) << "\n";
  out << "[estimation]\n";
  out << "trials = " << c.trials << "\n";
  out << "weighted_trials = " << c.weighted_trials << "\n";
  out << "estimator = \"" << to_string(c.estimator) << "\"\n";
  switch (c.experiment) {
    case ExperimentKind::kGammaSweep:
      out << "[sweep]\n";
      out << "thresholds = [";
      for (std::size_t i = 0; i < c.thresholds.size(); ++i)
        out << (i ? ", " : "") << confdetail::num(c.thresholds[i]);
      out << "]\n";
      break;
    case ExperimentKind::kSandwich:
      out << "[sandwich]\n";
      out << "threshold = " << confdetail::num(c.sandwich_threshold) << "\n";
      out << "magnitude = " << confdetail::num(c.sandwich_magnitude) << "\n";
      out << "c = " << c.sandwich_c << "\n";
      break;
    case ExperimentKind::kUnknownC:
      out << "[unknown_c]\n";
      out << "c_bar = " << c.c_bar << "\n";
      out << "c_list = [";
      for (std::size_t i = 0; i < c.c_list.size(); ++i) out << (i ? ", " : "") << c.c_list[i];
      out << "]\n";
      out << "threshold = " << confdetail::num(c.unknown_c_threshold) << "\n";
      break;
    case ExperimentKind::kValidate:
      out << "[validate]\n";
      out << "horizon = " << c.validate_horizon << "\n";
      break;
    case ExperimentKind::kOperatingPoint:
      break;
  }
  return out.str();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t config_hash(const Config& c) { return fnv1a64(canonical_text(c)); }

namespace confdetail {

inline void cross_validate(Config& cfg, const std::string& path) {
  const auto fail = [&](const std::string& msg) { throw ConfigError(path + ": " + msg); };

  if (cfg.s < 1) fail("[detector] s must be at least 1");
  // checked before the quota rule: r = s - c_bar is forced, so a too-large
  // c_bar would otherwise surface as a confusing voting-quota complaint
  if (cfg.experiment == ExperimentKind::kUnknownC && 2 * cfg.c_bar >= cfg.s)
    fail("[unknown_c] needs c_bar < s/2");
  if (cfg.max_horizon < 1) fail("[detector] max_horizon must be at least 1");
  if (!(cfg.a > 0.0) || !(cfg.b > 0.0) || !std::isfinite(cfg.a) || !std::isfinite(cfg.b))
    fail("[detector] a and b must be positive and finite");
  if (cfg.voting && !(2 * cfg.r > cfg.s && cfg.r <= cfg.s))
    fail("[detector] voting needs s/2 < r <= s");
  if (!cfg.voting)
    for (int i : cfg.sensor_set)
      if (i < 0 || i >= cfg.s) fail("[detector] sensor_set index out of range");
  validate_rule(cfg.make_rule(), cfg.s);
  (void)cfg.make_model();  // degenerate model pairs surface as ModelError here

  cfg.attack.placement.validate(cfg.s);
  if (cfg.attack.type == AttackType::kFlip && cfg.s <= 2 * cfg.attack.placement.c)
    fail("[attack] flip needs s > 2c");
  if (cfg.attack.type == AttackType::kSuppression &&
      (!(cfg.attack.magnitude > 0.0) || !std::isfinite(cfg.attack.magnitude)))
    fail("[attack] magnitude must be positive and finite");

  if (cfg.trials == 0) fail("[estimation] trials must be at least 1");
  if (cfg.estimator == Estimator::kImportance && cfg.weighted_trials == 0)
    fail("[estimation] weighted_trials must be at least 1");

  switch (cfg.experiment) {
    case ExperimentKind::kGammaSweep:
      if (cfg.thresholds.empty()) fail("[sweep] thresholds must not be empty");
      for (double t : cfg.thresholds)
        if (!(t > 0.0) || !std::isfinite(t)) fail("[sweep] thresholds must be positive");
      break;
    case ExperimentKind::kSandwich:
      if (!(cfg.sandwich_threshold > 0.0)) fail("[sandwich] threshold must be positive");
      if (!(cfg.sandwich_magnitude > 0.0)) fail("[sandwich] magnitude must be positive");
      if (cfg.sandwich_c < 1) fail("[sandwich] c must be at least 1");
      if (cfg.s <= 2 * cfg.sandwich_c) fail("[sandwich] needs s > 2c");
      if (cfg.attack.type != AttackType::kNone)
        fail("[attack] the sandwich experiment builds its own attacks; use type = \"none\"");
      break;
    case ExperimentKind::kUnknownC: {
      if (cfg.c_list.empty()) fail("[unknown_c] c_list must not be empty");
      if (!(cfg.unknown_c_threshold > 0.0)) fail("[unknown_c] threshold must be positive");
      for (int cc : cfg.c_list) {
        if (cc < 0 || cc > cfg.c_bar) fail("[unknown_c] every c must satisfy 0 <= c <= c_bar");
      }
      if (!cfg.voting) fail("[unknown_c] requires the voting rule");
      if (cfg.r != cfg.s - cfg.c_bar)
        fail("[unknown_c] the voting quota is forced to r = s - c_bar; omit [detector] r or set it to that");
      if (cfg.attack.type != AttackType::kNone)
        fail("[attack] the unknown-c experiment builds its own attacks; use type = \"none\"");
      break;
    }
    case ExperimentKind::kValidate:
      if (cfg.gaussian_model) fail("[validate] requires a finite-alphabet model");
      if (cfg.validate_horizon < 1) fail("[validate] horizon must be at least 1");
      if (!cfg.voting) fail("[validate] requires the voting rule");
      if (cfg.attack.type == AttackType::kSuppression)
        fail("[validate] supports attack type none or flip only");
      break;
    case ExperimentKind::kOperatingPoint:
      break;
  }
}

}  // namespace confdetail

/// Parses and validates a config. Model construction problems (degenerate
/// pairs) surface here as ModelError; both that and ConfigError mean the
/// input was unusable.
inline Config parse_config(std::string_view text, const std::string& path) {
  const RawConfig raw = RawConfig::parse(text, path);

  for (const auto& [name, kv] : raw.sections) {
    static const std::set<std::string> known = {"",        "model",    "detector",
                                                "attack",  "estimation", "sweep",
                                                "sandwich", "unknown_c", "validate"};
    if (!known.count(name)) {
      const int line = kv.empty() ? 0 : kv.begin()->second.line;
      confdetail::fail(path, line, "unknown section [" + name + "]");
    }
  }

  Config cfg;

  SectionReader top(raw, "");
  const std::string kind = top.string_or("experiment", "operating-point");
  if (kind == "operating-point") cfg.experiment = ExperimentKind::kOperatingPoint;
  else if (kind == "gamma-sweep") cfg.experiment = ExperimentKind::kGammaSweep;
  else if (kind == "sandwich") cfg.experiment = ExperimentKind::kSandwich;
  else if (kind == "unknown-c") cfg.experiment = ExperimentKind::kUnknownC;
  else if (kind == "validate") cfg.experiment = ExperimentKind::kValidate;
  else throw ConfigError(path + ": unknown experiment '" + kind + "'");
  {
    const std::int64_t seed = top.int_or("seed", 1);
    if (seed < 0) throw ConfigError(path + ": seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.output_dir = top.string_or("output_dir", ".");
  {
    const std::int64_t threads = top.int_or("threads", 1);
    if (threads < 0 || threads > 4096) throw ConfigError(path + ": threads must be in [0, 4096]");
    cfg.threads = static_cast<int>(threads);
  }
  top.finish();

  SectionReader model(raw, "model");
  const std::string family = model.string_or("family", "gaussian");
  if (family == "gaussian") {
    cfg.gaussian_model = true;
    cfg.gauss.mean0 = model.number_or("mean0", -1.0);
    cfg.gauss.mean1 = model.number_or("mean1", 1.0);
    cfg.gauss.sigma = model.number_or("sigma", 1.0);
  } else if (family == "finite") {
    cfg.gaussian_model = false;
    cfg.finite.points = model.number_array("points");
    cfg.finite.mass0 = model.number_array("mass0");
    cfg.finite.mass1 = model.number_array("mass1");
    if (cfg.finite.points.empty())
      throw ConfigError(path + ": [model] finite family needs points/mass0/mass1");
  } else {
    throw ConfigError(path + ": [model] unknown family '" + family + "'");
  }
  model.finish();

  SectionReader det(raw, "detector");
  const std::string rule = det.string_or("rule", "voting");
  if (rule == "voting") cfg.voting = true;
  else if (rule == "sum-sprt") cfg.voting = false;
  else throw ConfigError(path + ": [detector] unknown rule '" + rule + "'");
  cfg.s = static_cast<int>(det.int_or("s", 10));
  if (cfg.experiment == ExperimentKind::kUnknownC && !det.has("r")) {
    // quota forced below once c_bar is known
    cfg.r = 0;
  } else {
    cfg.r = static_cast<int>(det.int_or("r", cfg.voting ? (cfg.s + 2) / 2 : 1));
  }
  cfg.sensor_set = det.int_array("sensor_set");
  cfg.a = det.number_or("a", 100.0);
  cfg.b = det.number_or("b", 100.0);
  cfg.max_horizon = det.int_or("max_horizon", 1'000'000);
  det.finish();

  SectionReader atk(raw, "attack");
  const std::string atype = atk.string_or("type", "none");
  if (atype == "none") cfg.attack.type = AttackType::kNone;
  else if (atype == "flip") cfg.attack.type = AttackType::kFlip;
  else if (atype == "suppression") cfg.attack.type = AttackType::kSuppression;
  else throw ConfigError(path + ": [attack] unknown type '" + atype + "'");
  cfg.attack.placement.c = static_cast<int>(atk.int_or("c", 0));
  const std::string pmode = atk.string_or("placement", "random");
  if (pmode == "random") cfg.attack.placement.mode = PlacementSpec::Mode::kRandomPerTrial;
  else if (pmode == "fixed") cfg.attack.placement.mode = PlacementSpec::Mode::kFixed;
  else throw ConfigError(path + ": [attack] unknown placement '" + pmode + "'");
  cfg.attack.placement.fixed_indices = atk.int_array("indices");
  cfg.attack.magnitude = atk.number_or("magnitude", 10.0);
  atk.finish();

  SectionReader est(raw, "estimation");
  cfg.trials = static_cast<std::uint64_t>(est.int_or("trials", 10'000));
  cfg.weighted_trials = static_cast<std::uint64_t>(est.int_or("weighted_trials", 10'000));
  const std::string estim = est.string_or("estimator", "plain");
  if (estim == "plain") cfg.estimator = Estimator::kPlain;
  else if (estim == "importance") cfg.estimator = Estimator::kImportance;
  else throw ConfigError(path + ": [estimation] unknown estimator '" + estim + "'");
  est.finish();

  SectionReader sweep(raw, "sweep");
  cfg.thresholds = sweep.number_array("thresholds");
  sweep.finish();

  SectionReader sandwich(raw, "sandwich");
  cfg.sandwich_threshold = sandwich.number_or("threshold", 100.0);
  cfg.sandwich_magnitude = sandwich.number_or("magnitude", 10.0);
  cfg.sandwich_c = static_cast<int>(sandwich.int_or("c", 0));
  sandwich.finish();

  SectionReader unknown(raw, "unknown_c");
  cfg.c_bar = static_cast<int>(unknown.int_or("c_bar", 0));
  cfg.c_list = unknown.int_array("c_list");
  cfg.unknown_c_threshold = unknown.number_or("threshold", 100.0);
  unknown.finish();

  SectionReader validate(raw, "validate");
  cfg.validate_horizon = validate.int_or("horizon", 60);
  validate.finish();

  if (cfg.experiment == ExperimentKind::kUnknownC && cfg.r == 0) cfg.r = cfg.s - cfg.c_bar;

  confdetail::cross_validate(cfg, path);
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace byzsprt
