#include "mtt/kalman.hpp"

#include <cmath>

#include "mtt/errors.hpp"
#include "mtt/stats.hpp"

namespace mtt {

KalmanResult kalman_log_likelihood(const SingleTargetModel& model, double x0,
                                   std::span<const ObservationFrame> frames) {
  if (model.special()) throw ModelViolationError("Kalman filter needs a linear-Gaussian observation model");
  const double q = model.walk_std() * model.walk_std();
  const double r = model.obs_variance();
  const double shift = model.obs_shift();
  double dq = 0.0, dr = 0.0, dshift = 0.0;
  switch (model.role()) {
    case ParamRole::ObservationVariance: dr = 1.0; break;
    case ParamRole::ObservationShift: dshift = 1.0; break;
    case ParamRole::WalkStd: dq = 2.0 * model.walk_std(); break;
  }

  double mean = x0, var = 0.0, dmean = 0.0, dvar = 0.0;
  KalmanResult out;
  for (const auto& frame : frames) {
    if (frame.points.size() > 1) throw ModelViolationError("Kalman filter takes at most one point per frame");
    var += q;
    dvar += dq;
    if (frame.points.empty()) continue;
    const double s = var + r;
    const double ds = dvar + dr;
    const double e = frame.points[0] - mean - shift;
    const double de = -dmean - dshift;
    out.log_likelihood += -0.5 * (kLogTwoPi + std::log(s) + e * e / s);
    out.score += -0.5 * (ds / s + 2.0 * e * de / s - e * e * ds / (s * s));
    const double gain = var / s;
    const double dgain = (dvar * s - var * ds) / (s * s);
    mean += gain * e;
    dmean += dgain * e + gain * de;
    const double new_var = (1.0 - gain) * var;
    dvar = -dgain * var + (1.0 - gain) * dvar;
    var = new_var;
  }
  return out;
}

}  // namespace mtt
