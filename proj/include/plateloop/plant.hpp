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

#include <stdexcept>
#include <string>

namespace plateloop::plant {

// Motor/plate transfer function per axis: angle(s)/u(s) = 1/(16 s (b1 s + b0)).
inline constexpr double kDefaultMotorB1 = 0.01176;
inline constexpr double kDefaultMotorB0 = 0.58823;

// Ball acceleration per radian of plate tilt: pos''(t) = kBallGain * angle(t).
inline constexpr double kBallGain = -7.0;

// Plate tilt range where the linearized model holds: +/-32 degrees.
inline constexpr double kDefaultAngleLimitRad = 0.5585053606381855;

// Any state magnitude beyond this is treated as numerical blow-up.
inline constexpr double kDefaultBlowupBound = 1e6;

struct MotorCoefficients {
  double b1 = kDefaultMotorB1;  // s^2 coefficient, > 0
  double b0 = kDefaultMotorB0;  // s coefficient, > 0

  void validate() const {
    if (!(b1 > 0.0) || !(b0 > 0.0)) {
      throw std::invalid_argument("motor coefficients must be positive");
    }
  }
};

/// One axis of the plant. Positions in meters, angles in radians.
struct AxisState {
  double ball_pos = 0.0;     // m
  double ball_vel = 0.0;     // m/s
  double plate_angle = 0.0;  // rad
  double plate_rate = 0.0;   // rad/s
};

struct PlantState {
  AxisState x;
  AxisState y;
  double time = 0.0;  // s, global across contiguous experiment runs
};

/// Exact solution coefficients for one fixed-step update with the input
/// voltage held constant over the step (zero-order hold) and the ball stage
/// driven by the plate angle at the start of the step.
struct AxisDiscretization {
  double dt = 0.0;

  // Motor/plate stage: state (angle, rate), input u.
  //   rate'  = rate_decay * rate + rate_from_u * u
  //   angle' = angle + angle_from_rate * rate + angle_from_u * u
  double rate_decay = 1.0;
  double rate_from_u = 0.0;
  double angle_from_rate = 0.0;
  double angle_from_u = 0.0;

  // Ball stage: state (pos, vel), input angle at start of step.
  //   vel' = vel + vel_from_angle * angle
  //   pos' = pos + pos_from_vel * vel + pos_from_angle * angle
  double vel_from_angle = 0.0;
  double pos_from_vel = 0.0;
  double pos_from_angle = 0.0;
};

/// Thrown when a state magnitude exceeds the blow-up bound.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time_s, double magnitude)
      : std::runtime_error("plant state diverged at t=" +
                           std::to_string(time_s) +
                           " (|state|=" + std::to_string(magnitude) + ")"),
        time_s_(time_s) {}

  double time_s() const { return time_s_; }

 private:
  double time_s_;
};

AxisDiscretization build_discretization(const MotorCoefficients& motor,
                                        double dt);

double saturate_angle(double angle_rad, double limit_rad);

/// One step with no saturation and no divergence check. The update is linear
/// in (state, u), which the saturating variant is not.
AxisState step_axis_linear(const AxisState& s, double u_volts,
                           const AxisDiscretization& d);

/// One step: linear update, then plate angle clamped to +/-limit (state and
/// downstream ball input both see the clamped value). Throws DivergenceError
/// when any state component leaves [-bound, bound]. `time_s` is only used to
/// label the error.
AxisState step_axis(const AxisState& s, double u_volts,
                    const AxisDiscretization& d,
                    double angle_limit_rad = kDefaultAngleLimitRad,
                    double blowup_bound = kDefaultBlowupBound,
                    double time_s = 0.0);

/// Steps both axes and advances `state.time` by d.dt.
void step_plant(PlantState& state, double u_x_volts, double u_y_volts,
                const AxisDiscretization& d,
                double angle_limit_rad = kDefaultAngleLimitRad,
                double blowup_bound = kDefaultBlowupBound);

}  // namespace plateloop::plant
