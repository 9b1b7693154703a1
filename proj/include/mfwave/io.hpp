#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mfwave/error.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/model.hpp"

namespace mfwave {

using Json = nlohmann::json;

/// Decimal with 12 significant digits.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Writes rows joined by ',' and terminated by '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary);
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
  }

  void header(std::initializer_list<std::string_view> names) {
    bool first = true;
    for (auto n : names) {
      if (!first) out_ << ',';
      out_ << n;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_number(v);
      first = false;
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Error("write to " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Two columns (x, F); the first row is the left atom.
inline void write_cdf_csv(const std::filesystem::path& path, const GridCDF& f, std::string_view column = "F") {
  CsvWriter w(path);
  w.header({"x", column});
  for (std::size_t i = 0; i < f.size(); ++i) w.row({f.x(i), f[i]});
  w.close();
}

/// Reads a two-column (x, F) CSV on a uniform grid. A non-numeric first line
/// is taken as a header.
inline GridCDF read_cdf_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<double> xs, fs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double x = 0.0, f = 0.0;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("one column");
      std::size_t used = 0;
      x = std::stod(line.substr(0, comma), &used);
      f = std::stod(line.substr(comma + 1), &used);
    } catch (const std::exception&) {
      if (xs.empty() && lineno == 1) continue;
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected two numeric columns (x, F)");
    }
    xs.push_back(x);
    fs.push_back(f);
  }
  if (xs.size() < 2) throw Error(path.string() + ": need at least two rows");
  const double step = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  if (!(step > 0.0)) throw Error(path.string() + ": x must increase");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double expect = xs.front() + step * static_cast<double>(i);
    if (std::abs(xs[i] - expect) > 1e-6 * step + 1e-9 * std::abs(expect)) {
      throw Error(path.string() + ": x is not on a uniform grid near row " + std::to_string(i + 1));
    }
  }
  return GridCDF(xs.front(), step, std::move(fs));
}

/// One column named `position`.
inline void write_positions_csv(const std::filesystem::path& path, const std::vector<double>& positions) {
  CsvWriter w(path);
  w.header({"position"});
  for (double x : positions) w.row({x});
  w.close();
}

/// Long format (t, x, F).
inline void write_snapshots_csv(const std::filesystem::path& path,
                                const std::vector<std::pair<double, GridCDF>>& snapshots) {
  CsvWriter w(path);
  w.header({"t", "x", "F"});
  for (const auto& [t, f] : snapshots) {
    for (std::size_t i = 0; i < f.size(); ++i) w.row({t, f.x(i), f[i]});
  }
  w.close();
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + "." + key + ": missing field");
  return *it;
}

inline double number(const Json& j, const std::string& key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline std::vector<double> numbers(const Json& j, const std::string& key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::string kind_of(const Json& j, const std::string& where) {
  const auto& v = require(j, "kind", where);
  if (!v.is_string()) throw ConfigError(where + ".kind: expected a string");
  return v.get<std::string>();
}

inline void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ConfigError(where + "." + k + ": unknown field");
  }
}

// Rethrows construction errors with the block path prepended.
template <typename F>
auto with_path(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw ConfigError(where + ": " + msg);
  }
}

}  // namespace detail

inline Json to_json(const JumpKernel& k) {
  return std::visit(
      [](const auto& v) -> Json {
        using K = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<K, JumpKernel::Exponential>) return {{"kind", "exponential"}, {"rate", v.rate}};
        else if constexpr (std::is_same_v<K, JumpKernel::Deterministic>) return {{"kind", "deterministic"}, {"size", v.size}};
        else if constexpr (std::is_same_v<K, JumpKernel::Uniform>) return {{"kind", "uniform"}, {"a", v.a}, {"b", v.b}};
        else return {{"kind", "table"}, {"quantiles", v.quantiles}};
      },
      k.kind());
}

inline Json to_json(const RateCurve& r) {
  return std::visit(
      [](const auto& v) -> Json {
        using K = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<K, RateCurve::Power>) return {{"kind", "power"}, {"K", v.K}};
        else if constexpr (std::is_same_v<K, RateCurve::Table>) return {{"kind", "table"}, {"nu", v.nu}, {"eta", v.eta}};
        else return {{"kind", "smoothed"}, {"K", v.K}, {"base", to_json(*v.base)}};
      },
      r.kind());
}

inline JumpKernel jump_from_json(const Json& j, const std::string& where) {
  const std::string kind = detail::kind_of(j, where);
  return detail::with_path(where, [&] {
    if (kind == "exponential") {
      detail::only_keys(j, {"kind", "rate"}, where);
      return JumpKernel::exponential(detail::number(j, "rate", where));
    }
    if (kind == "deterministic") {
      detail::only_keys(j, {"kind", "size"}, where);
      return JumpKernel::deterministic(detail::number(j, "size", where));
    }
    if (kind == "uniform") {
      detail::only_keys(j, {"kind", "a", "b"}, where);
      return JumpKernel::uniform(detail::number(j, "a", where), detail::number(j, "b", where));
    }
    if (kind == "table") {
      detail::only_keys(j, {"kind", "quantiles"}, where);
      return JumpKernel::table(detail::numbers(j, "quantiles", where));
    }
    throw ConfigError(where + ".kind: unknown jump kind '" + kind +
                      "' (expected exponential, deterministic, uniform or table)");
  });
}

inline RateCurve rate_from_json(const Json& j, const std::string& where) {
  const std::string kind = detail::kind_of(j, where);
  return detail::with_path(where, [&] {
    if (kind == "power") {
      detail::only_keys(j, {"kind", "K"}, where);
      return RateCurve::power(detail::number(j, "K", where));
    }
    if (kind == "table") {
      detail::only_keys(j, {"kind", "nu", "eta"}, where);
      return RateCurve::table(detail::numbers(j, "nu", where), detail::numbers(j, "eta", where));
    }
    if (kind == "smoothed") {
      detail::only_keys(j, {"kind", "K", "base"}, where);
      const double K = detail::number(j, "K", where);
      if (K != std::floor(K) || K < 1.0) throw ConfigError(where + ".K: expected an integer >= 1");
      return rate_smooth(rate_from_json(detail::require(j, "base", where), where + ".base"), static_cast<int>(K));
    }
    throw ConfigError(where + ".kind: unknown rate kind '" + kind + "' (expected power, table or smoothed)");
  });
}

/// {"mu", "jump", "rate", "mu2", "jump2"}; jump2 is required when mu2 > 0.
inline ModelParams model_from_json(const Json& j, const std::string& where = "model") {
  detail::only_keys(j, {"mu", "jump", "rate", "mu2", "jump2"}, where);
  ModelParams p;
  p.mu = detail::number_or(j, "mu", 1.0, where);
  p.jump = jump_from_json(detail::require(j, "jump", where), where + ".jump");
  p.rate = rate_from_json(detail::require(j, "rate", where), where + ".rate");
  const double mu2 = detail::number_or(j, "mu2", 0.0, where);
  if (mu2 > 0.0 || j.contains("jump2")) {
    p.second = SecondStream{mu2, jump_from_json(detail::require(j, "jump2", where), where + ".jump2")};
  }
  detail::with_path(where, [&] {
    p.validate();
    return 0;
  });
  return p;
}

inline Json to_json(const ModelParams& p) {
  Json j = {{"mu", p.mu}, {"jump", to_json(p.jump)}, {"rate", to_json(p.rate)}, {"mu2", p.mu2()}};
  if (p.second) j["jump2"] = to_json(p.second->jump2);
  return j;
}

struct Numerics {
  double h = 1e-2;
  double dt = 5e-3;
  double tail_tol = 1e-6;
  double median_tol = 1e-4;
  double fp_tol = 1e-8;
  double zeta_min = 1e-10;
  double monotone_tol = 1e-9;
};

struct RunConfig {
  ModelParams model;
  Numerics numerics;
  Json experiment = Json::object();
  std::uint64_t seed = 1;
  std::string output = "out";
};

inline Json to_json(const Numerics& n) {
  return {{"h", n.h},
          {"dt", n.dt},
          {"tail_tol", n.tail_tol},
          {"median_tol", n.median_tol},
          {"fp_tol", n.fp_tol},
          {"zeta_min", n.zeta_min},
          {"monotone_tol", n.monotone_tol}};
}

inline Numerics numerics_from_json(const Json& j, const std::string& where = "numerics") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  detail::only_keys(j, {"h", "dt", "tail_tol", "median_tol", "fp_tol", "zeta_min", "monotone_tol"}, where);
  Numerics n;
  n.h = detail::number_or(j, "h", n.h, where);
  n.dt = detail::number_or(j, "dt", n.dt, where);
  n.tail_tol = detail::number_or(j, "tail_tol", n.tail_tol, where);
  n.median_tol = detail::number_or(j, "median_tol", n.median_tol, where);
  n.fp_tol = detail::number_or(j, "fp_tol", n.fp_tol, where);
  n.zeta_min = detail::number_or(j, "zeta_min", n.zeta_min, where);
  n.monotone_tol = detail::number_or(j, "monotone_tol", n.monotone_tol, where);
  if (!(n.h > 0.0)) throw ConfigError(where + ".h: must be positive");
  if (!(n.dt >= 0.0)) throw ConfigError(where + ".dt: must be >= 0");
  return n;
}

inline Json to_json(const RunConfig& c) {
  return {{"model", to_json(c.model)},
          {"numerics", to_json(c.numerics)},
          {"experiment", c.experiment},
          {"seed", c.seed},
          {"output", c.output}};
}

/// "model" is required; the other blocks fall back to defaults.
inline RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::only_keys(j, {"model", "numerics", "experiment", "seed", "output"}, "config");
  RunConfig c;
  c.model = model_from_json(detail::require(j, "model", "config"));
  if (j.contains("numerics")) c.numerics = numerics_from_json(j.at("numerics"));
  if (j.contains("experiment")) {
    if (!j.at("experiment").is_object()) throw ConfigError("experiment: expected an object");
    c.experiment = j.at("experiment");
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output: expected a string");
    c.output = j.at("output").get<std::string>();
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return run_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// experiment[key] if present, else `fallback`.
template <typename T>
T experiment_value(const RunConfig& c, const std::string& key, T fallback) {
  const auto it = c.experiment.find(key);
  if (it == c.experiment.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("experiment." + key + ": wrong type");
  }
}

}  // namespace mfwave
