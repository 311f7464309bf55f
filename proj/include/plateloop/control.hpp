// Copyright 2026 plateloop authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace plateloop::control {

struct PdGains {
  double kp = 0.0;
  double kd = 0.0;
};

/// Per-axis controller memory. The controller runs event-driven: one update
/// per received sensor message, with the output held by the actuator between
/// updates.
struct ControllerState {
  double prev_error_outer = 0.0;
  double prev_error_inner = 0.0;
  double last_update_time = 0.0;  // s, set by the caller, non-decreasing
  double commanded_u = 0.0;       // V, last computed output
  bool primed = false;  // false until the first update; the first update uses
                        // prev_error = current error (no derivative kick)
};

/// kp*error + kd*(error - prev_error)/dt. Backward-difference derivative,
/// unfiltered. dt must be > 0.
double pd_step(const PdGains& gains, double error, double prev_error,
               double dt);

/// One cascade update for one axis: the outer PD maps position error to a
/// desired plate angle, clamped to [-angle_limit, +angle_limit]; the inner PD
/// maps the resulting angle error to motor voltage. Updates all error
/// memories and commanded_u; returns the voltage. The caller stamps
/// cs.last_update_time. dt is the actual elapsed time since the previous
/// update (network-jittered), not the nominal sensor period.
double cascade_step(ControllerState& cs, double ref_pos, double meas_pos,
                    double meas_angle, const PdGains& outer,
                    const PdGains& inner, double dt, double angle_limit);

}  // namespace plateloop::control
