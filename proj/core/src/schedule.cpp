#include "topics/schedule.hpp"

#include <cmath>
#include <sstream>

#include "topics/errors.hpp"

namespace topics {

double StepSchedule::rho(std::int64_t t) const {
  return s / std::pow(tau + static_cast<double>(t), kappa);
}

std::vector<ScheduleViolation> validate_schedule(const StepSchedule& sched) {
  std::vector<ScheduleViolation> out;
  auto add = [&out](const char* code, const std::string& msg) {
    out.push_back({code, msg});
  };

  if (!(sched.s > 0.0) || !std::isfinite(sched.s)) {
    std::ostringstream os;
    os << "s = " << sched.s << " must be a positive finite real";
    add("nonpositive_s", os.str());
  }
  if (!(sched.tau >= 0.0) || !std::isfinite(sched.tau)) {
    std::ostringstream os;
    os << "tau = " << sched.tau << " must be a nonnegative finite real";
    add("negative_tau", os.str());
  }
  if (!(sched.kappa > 0.0)) {
    std::ostringstream os;
    os << "rho_t does not vanish (kappa = " << sched.kappa << " <= 0)";
    add("rho_not_vanishing", os.str());
  } else if (sched.kappa > 1.0) {
    std::ostringstream os;
    os << "sum of rho_t is finite (kappa = " << sched.kappa << " > 1)";
    add("finite_sum", os.str());
  }
  if (out.empty()) {
    const double rho1 = sched.rho(1);
    if (!(rho1 <= 1.0)) {
      std::ostringstream os;
      os << "rho_1 = " << rho1 << " > 1 (requires s <= (tau + 1)^kappa)";
      add("rho_exceeds_one", os.str());
    }
  }
  return out;
}

void require_valid_schedule(const StepSchedule& sched, const std::string& name) {
  const auto violations = validate_schedule(sched);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid step schedule " << name << " (s=" << sched.s << ", tau=" << sched.tau
     << ", kappa=" << sched.kappa << "):";
  for (const auto& v : violations) os << " [" << v.code << "] " << v.message << ";";
  throw ConfigError(os.str());
}

}  // namespace topics
