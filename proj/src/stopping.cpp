#include "fbmlab/stopping.hpp"

#include <cmath>
#include <string>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

StopResult at_index(const Path& path, std::int64_t i, double terminal) {
  return {i, path.time(i), terminal, true};
}

StopResult not_found(const Path& path) {
  return {path.n_steps(), path.time(path.n_steps()), path.back(), false};
}

double num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("rule field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

void validate_rule(const StoppingRule& rule) {
  std::visit(overloaded{
                 [](const HitLevel&) {},
                 [](const WindowedIncrement& r) {
                   require(r.t_min >= 1.0, "WindowedIncrement: t_min must be >= 1");
                 },
                 [](const ParabolicDriftHit&) {},
                 [](const LocalTimeTarget& r) {
                   require(r.target > 0.0, "LocalTimeTarget: target must be positive");
                 },
                 [](const FixedDuration& r) { require(r.t > 0.0, "FixedDuration: t must be positive"); },
                 [](const RegionTime& r) {
                   require(r.c1 < r.c2, "RegionTime: c1 < c2 required");
                   require(r.tol >= 0.0, "RegionTime: tol must be >= 0");
                 },
                 [](const ExitInterval& r) {
                   require(r.lo < 0.0 && r.hi > 0.0, "ExitInterval: need lo < 0 < hi");
                 },
             },
             rule);
}

std::string rule_kind(const StoppingRule& rule) {
  return std::visit(overloaded{
                        [](const HitLevel&) { return std::string("hit_level"); },
                        [](const WindowedIncrement&) { return std::string("windowed_increment"); },
                        [](const ParabolicDriftHit&) { return std::string("parabolic_drift_hit"); },
                        [](const LocalTimeTarget&) { return std::string("local_time_target"); },
                        [](const FixedDuration&) { return std::string("fixed_duration"); },
                        [](const RegionTime&) { return std::string("region_time"); },
                        [](const ExitInterval&) { return std::string("exit_interval"); },
                    },
                    rule);
}

nlohmann::json rule_to_json(const StoppingRule& rule) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const HitLevel& r) { return nlohmann::json{{"level", r.level}}; },
          [](const WindowedIncrement& r) { return nlohmann::json{{"y", r.y}, {"t_min", r.t_min}}; },
          [](const ParabolicDriftHit& r) { return nlohmann::json{{"c1", r.c1}}; },
          [](const LocalTimeTarget& r) { return nlohmann::json{{"target", r.target}}; },
          [](const FixedDuration& r) { return nlohmann::json{{"t", r.t}}; },
          [](const RegionTime& r) {
            return nlohmann::json{{"c1", r.c1}, {"c2", r.c2}, {"tol", r.tol}, {"t_min", r.t_min}};
          },
          [](const ExitInterval& r) { return nlohmann::json{{"lo", r.lo}, {"hi", r.hi}}; },
      },
      rule);
  j["kind"] = rule_kind(rule);
  return j;
}

StoppingRule rule_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("stopping rule needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  StoppingRule r;
  if (kind == "hit_level")
    r = HitLevel{num(j, "level", -1.0)};
  else if (kind == "windowed_increment")
    r = WindowedIncrement{num(j, "y", 0.0), num(j, "t_min", 1.0)};
  else if (kind == "parabolic_drift_hit")
    r = ParabolicDriftHit{num(j, "c1", 0.0)};
  else if (kind == "local_time_target")
    r = LocalTimeTarget{num(j, "target", 1.0)};
  else if (kind == "fixed_duration")
    r = FixedDuration{num(j, "t", 1.0)};
  else if (kind == "region_time")
    r = RegionTime{num(j, "c1", -1.0), num(j, "c2", 1.0), num(j, "tol", 0.05), num(j, "t_min", 1.0)};
  else if (kind == "exit_interval")
    r = ExitInterval{num(j, "lo", -1.0), num(j, "hi", 1.0)};
  else
    throw ConfigError("unknown stopping rule kind '" + kind + "'");
  try {
    validate_rule(r);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  return r;
}

StopResult eval_hit_level(const Path& path, double level) {
  require(!path.values.empty(), "eval_hit_level: empty path");
  const auto& v = path.values;
  if (v[0] == level) return at_index(path, 0, level);
  const bool above = v[0] > level;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (above ? v[i] <= level : v[i] >= level)
      return at_index(path, static_cast<std::int64_t>(i), level);
  }
  return not_found(path);
}

std::int64_t unit_window_steps(double dt) {
  require(dt > 0.0, "dt must be positive");
  const double w = std::round(1.0 / dt);
  if (w < 1.0 || std::abs(w * dt - 1.0) > 1e-9)
    throw PreconditionError("grid step does not divide the unit window");
  return static_cast<std::int64_t>(w);
}

StopResult eval_windowed_increment(const Path& path, double y, double t_min) {
  require(t_min >= 1.0, "eval_windowed_increment: t_min must be >= 1");
  const std::int64_t w = unit_window_steps(path.grid.dt);
  const auto m0 = static_cast<std::int64_t>(std::ceil(t_min / path.grid.dt - 1e-9));
  require(path.n_steps() > m0, "eval_windowed_increment: path shorter than t_min");
  const auto& v = path.values;
  auto d = [&](std::int64_t i) {
    return v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i - w)];
  };
  double prev = d(m0) - y;
  if (prev == 0.0) return at_index(path, m0, v[static_cast<std::size_t>(m0 - w)] + y);
  for (std::int64_t i = m0 + 1; i <= path.n_steps(); ++i) {
    const double cur = d(i) - y;
    if (cur == 0.0 || (cur > 0.0) != (prev > 0.0))
      return at_index(path, i, v[static_cast<std::size_t>(i - w)] + y);
    prev = cur;
  }
  return not_found(path);
}

StopResult eval_parabolic_drift_hit(const Path& path, double c1) {
  require(!path.values.empty(), "eval_parabolic_drift_hit: empty path");
  for (std::int64_t i = 0; i <= path.n_steps(); ++i) {
    const double b = -1.0 + c1 * std::sqrt(static_cast<double>(i) * path.grid.dt);
    if (path.values[static_cast<std::size_t>(i)] <= b) return at_index(path, i, b);
  }
  return not_found(path);
}

StopResult eval_exit_interval(const Path& path, double lo, double hi) {
  require(lo < hi, "eval_exit_interval: lo < hi required");
  for (std::int64_t i = 0; i <= path.n_steps(); ++i) {
    const double x = path.values[static_cast<std::size_t>(i)];
    if (x <= lo) return at_index(path, i, lo);
    if (x >= hi) return at_index(path, i, hi);
  }
  return not_found(path);
}

bool check_parabolic_region(const Path& path, std::int64_t t_index, double c1, double c2,
                            double tol) {
  require(t_index >= 0 && t_index <= path.n_steps(), "check_parabolic_region: t_index out of range");
  const double* v = path.values.data();
  const double bt = v[t_index];
  const double dt = path.grid.dt;
  for (std::int64_t j = 1; j <= t_index; ++j) {
    const double d = v[t_index - j] - bt;
    const double rs = std::sqrt(static_cast<double>(j) * dt);
    if (d < c1 * rs - tol || d > c2 * rs + tol) return false;
  }
  return true;
}

namespace {

// Cheap lags first (powers of two), then every lag by dyadic level so that
// most candidates are rejected after a handful of comparisons.
bool region_ok(const double* v, std::int64_t t, double dt, double c1, double c2, double tol) {
  if (t == 0) return true;
  const double bt = v[t];
  auto ok = [&](std::int64_t j) {
    const double d = v[t - j] - bt;
    const double rs = std::sqrt(static_cast<double>(j) * dt);
    return d >= c1 * rs - tol && d <= c2 * rs + tol;
  };
  int top = 0;
  while ((std::int64_t{1} << (top + 1)) <= t) ++top;
  for (int m = 0; m <= top; ++m)
    if (!ok(std::int64_t{1} << m)) return false;
  if (!ok(t)) return false;
  for (int m = top; m >= 0; --m) {
    const std::int64_t step = std::int64_t{1} << m;
    for (std::int64_t j = step; j <= t; j += 2 * step) {
      if (j == step) continue;  // checked above
      if (!ok(j)) return false;
    }
  }
  return true;
}

}  // namespace

StopResult search_region_time(const Path& path, double c1, double c2, double tol, double t_min) {
  require(c1 <= c2, "search_region_time: c1 <= c2 required");
  require(tol >= 0.0, "search_region_time: tol must be >= 0");
  const auto m0 = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::ceil(t_min / path.grid.dt - 1e-9)));
  for (std::int64_t t = m0; t <= path.n_steps(); ++t) {
    if (region_ok(path.values.data(), t, path.grid.dt, c1, c2, tol))
      return at_index(path, t, path.values[static_cast<std::size_t>(t)]);
  }
  return not_found(path);
}

}  // namespace fbmlab
