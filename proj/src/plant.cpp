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

#include "plateloop/plant.hpp"

#include <algorithm>
#include <cmath>

namespace plateloop::plant {

// The motor/plate stage 1/(16 s (b1 s + b0)) is K/(s (s + a)) with
// a = b0/b1 and K = 1/(16 b1). For u constant over [0, dt]:
//   rate(dt)  = e^{-a dt} rate0 + (K/a)(1 - e^{-a dt}) u
//   angle(dt) = angle0 + (1 - e^{-a dt})/a * rate0
//             + (K/a)(dt - (1 - e^{-a dt})/a) u
// The ball stage integrates pos'' = kBallGain * angle with angle frozen at
// its start-of-step value, which is exact for a piecewise-constant angle
// input and second-order accurate otherwise.
AxisDiscretization build_discretization(const MotorCoefficients& motor,
                                        double dt) {
  motor.validate();
  if (!(dt > 0.0)) {
    throw std::invalid_argument("discretization step must be positive");
  }
  const double a = motor.b0 / motor.b1;
  const double gain = 1.0 / (16.0 * motor.b1);
  const double one_minus_decay = -std::expm1(-a * dt);  // 1 - e^{-a dt}

  AxisDiscretization d;
  d.dt = dt;
  d.rate_decay = 1.0 - one_minus_decay;
  d.rate_from_u = gain / a * one_minus_decay;
  d.angle_from_rate = one_minus_decay / a;
  d.angle_from_u = gain / a * (dt - one_minus_decay / a);
  d.vel_from_angle = kBallGain * dt;
  d.pos_from_vel = dt;
  d.pos_from_angle = 0.5 * kBallGain * dt * dt;
  return d;
}

double saturate_angle(double angle_rad, double limit_rad) {
  if (!(limit_rad > 0.0)) {
    throw std::invalid_argument("angle limit must be positive");
  }
  return std::clamp(angle_rad, -limit_rad, limit_rad);
}

AxisState step_axis_linear(const AxisState& s, double u_volts,
                           const AxisDiscretization& d) {
  AxisState n;
  n.ball_vel = s.ball_vel + d.vel_from_angle * s.plate_angle;
  n.ball_pos =
      s.ball_pos + d.pos_from_vel * s.ball_vel + d.pos_from_angle * s.plate_angle;
  n.plate_rate = d.rate_decay * s.plate_rate + d.rate_from_u * u_volts;
  n.plate_angle =
      s.plate_angle + d.angle_from_rate * s.plate_rate + d.angle_from_u * u_volts;
  return n;
}

AxisState step_axis(const AxisState& s, double u_volts,
                    const AxisDiscretization& d, double angle_limit_rad,
                    double blowup_bound, double time_s) {
  AxisState n = step_axis_linear(s, u_volts, d);
  n.plate_angle = saturate_angle(n.plate_angle, angle_limit_rad);

  const double mag =
      std::max({std::fabs(n.ball_pos), std::fabs(n.ball_vel),
                std::fabs(n.plate_angle), std::fabs(n.plate_rate)});
  if (!(mag <= blowup_bound)) {  // catches NaN too
    throw DivergenceError(time_s, mag);
  }
  return n;
}

void step_plant(PlantState& state, double u_x_volts, double u_y_volts,
                const AxisDiscretization& d, double angle_limit_rad,
                double blowup_bound) {
  const double t_next = state.time + d.dt;
  state.x = step_axis(state.x, u_x_volts, d, angle_limit_rad, blowup_bound,
                      t_next);
  state.y = step_axis(state.y, u_y_volts, d, angle_limit_rad, blowup_bound,
                      t_next);
  state.time = t_next;
}

}  // namespace plateloop::plant
