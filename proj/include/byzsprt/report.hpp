#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "byzsprt/experiments.hpp"

namespace byzsprt {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Probabilities travel in log space; anything the double range cannot hold
/// is printed as decimal scientific notation synthesized from the log, so a
/// value like exp(-1200) still lands in the CSV as 7.1e-522 instead of 0.
inline std::string format_probability(double log_value) {
  if (log_value == -std::numeric_limits<double>::infinity()) return "0";
  if (log_value > -700.0) return format_g17(std::exp(log_value));
  const double log10v = log_value / M_LN10;
  double e = std::floor(log10v);
  double mant = std::pow(10.0, log10v - e);
  if (mant >= 10.0) {
    mant /= 10.0;
    e += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17ge%lld", mant, static_cast<long long>(e));
  return buf;
}

inline std::string format_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string csv_header(bool with_label) {
  std::string h =
      "threshold,alpha_hat,alpha_stderr,beta_hat,beta_stderr,asn0,asn1,trunc_rate,"
      "gamma_hat,gamma_normalized,config_hash";
  if (with_label) h += ",label";
  return h + "\n";
}

inline std::string csv_row(const OperatingPoint& op, double gamma, double normalized,
                           std::uint64_t hash, const std::string* label) {
  std::ostringstream o;
  o << format_g17(op.thresholds.b) << ',' << format_probability(op.side0.error.log_value) << ','
    << format_probability(op.side0.error.log_se) << ','
    << format_probability(op.side1.error.log_value) << ','
    << format_probability(op.side1.error.log_se) << ',' << format_g17(op.asn0()) << ','
    << format_g17(op.asn1()) << ',' << format_g17(op.trunc_rate()) << ',' << format_g17(gamma)
    << ',' << format_g17(normalized) << ',' << format_hash(hash);
  if (label) o << ',' << *label;
  o << '\n';
  return o.str();
}

inline std::string csv_row(const GammaPoint& p, std::uint64_t hash,
                           const std::string* label = nullptr) {
  return csv_row(p.op, p.gamma, p.normalized, hash, label);
}

inline std::string to_csv(const SweepResult& r, std::uint64_t hash) {
  std::string out = csv_header(false);
  for (const auto& p : r.points) out += csv_row(p, hash);
  return out;
}

inline std::string to_csv(const OperatingPointResult& r, std::uint64_t hash) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string out = csv_header(false);
  if (r.point) out += csv_row(*r.point, hash);
  else out += csv_row(r.op, nan, nan, hash, nullptr);
  return out;
}

inline std::string to_csv(const SandwichResult& r, std::uint64_t hash) {
  std::string out = csv_header(true);
  const std::string l1 = "voting-flip", l2 = "voting-suppression", l3 = "sum-flip";
  out += csv_row(r.voting_flip, hash, &l1);
  out += csv_row(r.voting_suppression, hash, &l2);
  out += csv_row(r.sum_flip, hash, &l3);
  return out;
}

inline std::string to_csv(const UnknownCResult& r, std::uint64_t hash) {
  std::string out = csv_header(true);
  for (const auto& row : r.rows) {
    const std::string label = "c=" + std::to_string(row.c);
    out += csv_row(row.point, hash, &label);
  }
  return out;
}

inline std::string to_csv(const ValidateResult& r, std::uint64_t hash) {
  std::string out = csv_header(true);
  {
    const std::string label = "simulated";
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double normalized = std::numeric_limits<double>::quiet_NaN();
    if (r.mc.side0.error.events > 0 && std::max(r.mc.asn0(), r.mc.asn1()) > 0.0) {
      gamma = std::max(0.0, -r.mc.side0.error.log_value) / std::max(r.mc.asn0(), r.mc.asn1());
      normalized = gamma / r.info.i;
    }
    out += csv_row(r.mc, gamma, normalized, hash, &label);
  }
  {
    // exact row: same columns, zero standard errors, residual as trunc rate
    const std::string label = "exact";
    std::ostringstream o;
    const double alpha = r.exact0.p_accept1, beta = r.exact1.p_accept0;
    const double delay = std::max(r.exact0.e_t_decided, r.exact1.e_t_decided);
    const double gamma = alpha > 0.0 && delay > 0.0 ? -std::log(alpha) / delay
                                                    : std::numeric_limits<double>::quiet_NaN();
    o << format_g17(r.mc.thresholds.b) << ',' << format_g17(alpha) << ",0," << format_g17(beta)
      << ",0," << format_g17(r.exact0.e_t_decided) << ',' << format_g17(r.exact1.e_t_decided)
      << ',' << format_g17(std::max(r.exact0.residual, r.exact1.residual)) << ','
      << format_g17(gamma) << ',' << format_g17(gamma / r.info.i) << ',' << format_hash(hash)
      << ',' << label << '\n';
    out += o.str();
  }
  return out;
}

// ---- JSON summaries ----

inline nlohmann::json to_json(const InfoConstants& c) {
  return {{"i0", c.i0},       {"i1", c.i1},           {"i", c.i},
          {"i_tilde", c.i_tilde}, {"w_star", c.w_star}};
}

inline nlohmann::json to_json(const ErrorRate& e) {
  return {{"value", e.value()},   {"log_value", e.log_value}, {"stderr", e.se()},
          {"log_stderr", e.log_se}, {"events", e.events},     {"ess", e.ess},
          {"low_ess", e.low_ess}};
}

inline nlohmann::json to_json(const SideSummary& s) {
  return {{"plain_trials", s.plain_n},
          {"decided", s.decided},
          {"truncated", s.truncated},
          {"ties", s.ties},
          {"asn", s.asn},
          {"asn_stderr", s.asn_se},
          {"trunc_rate", s.trunc_rate},
          {"error", to_json(s.error)},
          {"plain_error", to_json(s.plain_error)},
          {"weighted_trials", s.weighted_n}};
}

inline nlohmann::json to_json(const OperatingPoint& op) {
  return {{"a", op.thresholds.a},
          {"b", op.thresholds.b},
          {"estimator", to_string(op.estimator)},
          {"side0", to_json(op.side0)},
          {"side1", to_json(op.side1)},
          {"trunc_rate", op.trunc_rate()}};
}

inline nlohmann::json to_json(const GammaPoint& p) {
  return {{"threshold", p.threshold},
          {"gamma", p.gamma},
          {"gamma_stderr", p.gamma_se},
          {"gamma_normalized", p.normalized},
          {"gamma_normalized_stderr", p.normalized_se},
          {"decision_delay", p.delay},
          {"operating_point", to_json(p.op)}};
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) points.push_back(to_json(p));
  return {{"info", to_json(r.info)}, {"points", points}};
}

inline nlohmann::json to_json(const OperatingPointResult& r) {
  nlohmann::json j{{"info", to_json(r.info)}, {"operating_point", to_json(r.op)}};
  if (r.point) j["gamma_point"] = to_json(*r.point);
  return j;
}

inline nlohmann::json to_json(const SandwichResult& r) {
  return {{"info", to_json(r.info)},
          {"c", r.c},
          {"voting_flip", to_json(r.voting_flip)},
          {"voting_suppression", to_json(r.voting_suppression)},
          {"sum_flip", to_json(r.sum_flip)},
          {"suppression_margin", r.suppression_margin},
          {"suppression_ok", r.suppression_ok},
          {"sum_margin", r.sum_margin},
          {"sum_ok", r.sum_ok}};
}

inline nlohmann::json to_json(const UnknownCResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"c", row.c}, {"bound", row.bound}, {"point", to_json(row.point)}});
  return {{"info", to_json(r.info)}, {"c_bar", r.c_bar}, {"rows", rows}};
}

inline nlohmann::json to_json(const oracle::ExactVotingPoint& p) {
  return {{"p_accept0", p.p_accept0}, {"p_accept1", p.p_accept1}, {"p_tie", p.p_tie},
          {"p_decided", p.p_decided}, {"residual", p.residual},
          {"e_t_decided", p.e_t_decided}, {"horizon", p.horizon}};
}

inline nlohmann::json to_json(const ValidateResult& r) {
  return {{"info", to_json(r.info)},
          {"exact_theta0", to_json(r.exact0)},
          {"exact_theta1", to_json(r.exact1)},
          {"simulated", to_json(r.mc)},
          {"z_alpha", r.z_alpha},
          {"z_beta", r.z_beta},
          {"z_asn0", r.z_asn0},
          {"z_asn1", r.z_asn1}};
}

inline std::string iso_utc(std::time_t t) {
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace byzsprt
