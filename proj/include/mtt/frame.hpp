#pragma once

#include <vector>

namespace mtt {

/// Observation points received at one time step, in arrival order. The
/// sequence may be empty.
struct ObservationFrame {
  std::vector<double> points;
};

/// One state per target.
using MultiTargetState = std::vector<double>;

}  // namespace mtt
