#ifndef CFHARM_WALL_HPP_
#define CFHARM_WALL_HPP_

#include "cfharm/scm.hpp"

namespace cfharm {

// One-dimensional toy: a cart accelerating towards a wall. Full throttle
// eventually collides, braking from the initial distribution never does.
struct WallConfig {
  double dt = 0.5;
  int horizon = 60;
  double wall = 10.0;
  double body_radius = 0.5;
  double accel_max = 1.0;
  double speed_max = 2.0;
  double sigma_accel = 0.05;
  double sigma_obs = 0.01;
  double init_x_max = 4.0;
  double init_speed_max = 1.0;
  double goal_x = 8.0;
};

// State layout: [x, v]. Noise layout: [accel, obs x, obs v], standard normal.
class WallEnv final : public Environment {
 public:
  explicit WallEnv(WallConfig cfg = {}) : cfg_(cfg) {}

  std::string_view name() const override { return "wall"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int obs_dim() const override { return 2; }
  int noise_dim() const override { return 3; }
  int horizon() const override { return cfg_.horizon; }
  double dt() const override { return cfg_.dt; }

  Transition transition(const EnvState& state, const Action& action,
                        const NoiseRecord& noise) const override;
  NoiseRecord draw_noise(Rng& rng) const override;
  Observation observe_initial(const EnvState& state, Rng& rng) const override;
  double constraint(const EnvState& state) const override;
  bool at_goal(const EnvState& state) const override;
  Action default_action(const EnvState& state) const override;
  EnvState sample_initial(InitRegime regime, Rng& rng) const override;

  const WallConfig& config() const { return cfg_; }

 private:
  WallConfig cfg_;
};

// Always commands full throttle.
class RecklessPolicy final : public BatchPolicy {
 public:
  explicit RecklessPolicy(const Environment& env) : env_(env) {}
  void act(std::span<const EnvState> states, const Matrix& obs, Rng& rng,
           Matrix& actions, Vector& log_probs) override;

 private:
  const Environment& env_;
};

}  // namespace cfharm

#endif  // CFHARM_WALL_HPP_
