#include "cfharm/wall.hpp"

#include <algorithm>
#include <cmath>

namespace cfharm {

Transition WallEnv::transition(const EnvState& s, const Action& action,
                               const NoiseRecord& noise) const {
  const double x = s.x[0], v = s.x[1];
  const double a = std::clamp(action[0] + cfg_.sigma_accel * noise.draws[0],
                              -cfg_.accel_max, cfg_.accel_max);
  Transition tr;
  tr.next.x = {x + v * cfg_.dt,
               std::clamp(v + a * cfg_.dt, -cfg_.speed_max, cfg_.speed_max)};
  tr.next.step = s.step + 1;
  tr.goal = at_goal(tr.next);
  tr.next.done = tr.next.step >= cfg_.horizon;
  tr.g = constraint(tr.next);
  tr.reward = tr.next.x[0] - x;
  tr.obs = {tr.next.x[0] / cfg_.wall + cfg_.sigma_obs * noise.draws[1],
            tr.next.x[1] + cfg_.sigma_obs * noise.draws[2]};
  return tr;
}

NoiseRecord WallEnv::draw_noise(Rng& rng) const {
  return {{standard_normal(rng), standard_normal(rng), standard_normal(rng)}};
}

Observation WallEnv::observe_initial(const EnvState& s, Rng& rng) const {
  const double nx = standard_normal(rng);
  const double nv = standard_normal(rng);
  return {s.x[0] / cfg_.wall + cfg_.sigma_obs * nx, s.x[1] + cfg_.sigma_obs * nv};
}

double WallEnv::constraint(const EnvState& s) const {
  return s.x[0] + cfg_.body_radius - cfg_.wall;
}

bool WallEnv::at_goal(const EnvState& s) const {
  return s.x[0] >= cfg_.goal_x && constraint(s) <= 0.0;
}

Action WallEnv::default_action(const EnvState& s) const {
  const double v = s.x[1];
  if (std::abs(v) < 1e-9) return {0.0};
  return {-sign_of(v) * std::min(cfg_.accel_max, std::abs(v) / cfg_.dt)};
}

EnvState WallEnv::sample_initial(InitRegime, Rng& rng) const {
  EnvState s;
  s.x = {uniform(rng, 0.0, cfg_.init_x_max), uniform(rng, 0.0, cfg_.init_speed_max)};
  return s;
}

void RecklessPolicy::act(std::span<const EnvState> states, const Matrix&, Rng&,
                         Matrix& actions, Vector& log_probs) {
  const int n = static_cast<int>(states.size());
  actions.setConstant(env_.action_dim(), n, 1.0);
  log_probs.setZero(n);
}

}  // namespace cfharm
