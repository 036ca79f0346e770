#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "json.hpp"

#include "fbmlab/path.hpp"

namespace fbmlab {

struct HitLevel {
  double level = -1.0;
};
struct WindowedIncrement {
  double y = 0.0;
  double t_min = 1.0;
};
struct ParabolicDriftHit {
  double c1 = 0.0;
};
struct LocalTimeTarget {
  double target = 1.0;
};
struct FixedDuration {
  double t = 1.0;
};
struct RegionTime {
  double c1 = -1.0;
  double c2 = 1.0;
  double tol = 0.05;
  double t_min = 1.0;
};
// First exit of the open interval (lo, hi).
struct ExitInterval {
  double lo = -1.0;
  double hi = 1.0;
};

using StoppingRule = std::variant<HitLevel, WindowedIncrement, ParabolicDriftHit, LocalTimeTarget,
                                  FixedDuration, RegionTime, ExitInterval>;

void validate_rule(const StoppingRule& rule);
std::string rule_kind(const StoppingRule& rule);
nlohmann::json rule_to_json(const StoppingRule& rule);
StoppingRule rule_from_json(const nlohmann::json& j);

struct StopResult {
  std::int64_t stop_index = 0;
  double stop_time = 0.0;
  double terminal_value = 0.0;
  bool found = false;
};

StopResult eval_hit_level(const Path& path, double level);
StopResult eval_windowed_increment(const Path& path, double y, double t_min);
StopResult eval_parabolic_drift_hit(const Path& path, double c1);
StopResult eval_exit_interval(const Path& path, double lo, double hi);

bool check_parabolic_region(const Path& path, std::int64_t t_index, double c1, double c2,
                            double tol);
StopResult search_region_time(const Path& path, double c1, double c2, double tol, double t_min);

// Steps per unit time; throws unless dt divides 1.
std::int64_t unit_window_steps(double dt);

}  // namespace fbmlab
