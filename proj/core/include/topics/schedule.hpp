#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace topics {

/// Decaying step-size sequence rho_t = s / (tau + t)^kappa, t = 1, 2, ...
///
/// With s > 0, tau >= 0, kappa in (0, 1] and s <= (tau + 1)^kappa the
/// sequence is strictly decreasing, stays in (0, 1], vanishes in the limit
/// and has a divergent sum -- the conditions the stochastic trainers rely on.
struct StepSchedule {
  double s = 1.0;
  double tau = 0.0;
  double kappa = 1.0;

  double rho(std::int64_t t) const;
};

struct ScheduleViolation {
  std::string code;     // stable identifier, e.g. "rho_exceeds_one"
  std::string message;  // human-readable detail
};

/// Checks the validity conditions above and returns every violation found
/// (empty result means the schedule is usable). Never throws.
std::vector<ScheduleViolation> validate_schedule(const StepSchedule& schedule);

inline bool schedule_ok(const StepSchedule& schedule) {
  return validate_schedule(schedule).empty();
}

/// Throws ConfigError listing all violations; no-op for a valid schedule.
void require_valid_schedule(const StepSchedule& schedule, const std::string& name);

}  // namespace topics
