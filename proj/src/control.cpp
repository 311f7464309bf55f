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

#include "plateloop/control.hpp"

#include <stdexcept>

#include "plateloop/plant.hpp"

namespace plateloop::control {

double pd_step(const PdGains& gains, double error, double prev_error,
               double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("pd_step requires dt > 0");
  }
  return gains.kp * error + gains.kd * (error - prev_error) / dt;
}

double cascade_step(ControllerState& cs, double ref_pos, double meas_pos,
                    double meas_angle, const PdGains& outer,
                    const PdGains& inner, double dt, double angle_limit) {
  const double e_outer = ref_pos - meas_pos;
  const double prev_outer = cs.primed ? cs.prev_error_outer : e_outer;
  const double desired_angle =
      plant::saturate_angle(pd_step(outer, e_outer, prev_outer, dt),
                            angle_limit);

  const double e_inner = desired_angle - meas_angle;
  const double prev_inner = cs.primed ? cs.prev_error_inner : e_inner;
  const double u = pd_step(inner, e_inner, prev_inner, dt);

  cs.prev_error_outer = e_outer;
  cs.prev_error_inner = e_inner;
  cs.commanded_u = u;
  cs.primed = true;
  return u;
}

}  // namespace plateloop::control
