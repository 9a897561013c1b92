#ifndef CFHARM_TRAILER_HPP_
#define CFHARM_TRAILER_HPP_

#include <memory>
#include <vector>

#include "cfharm/grid.hpp"
#include "cfharm/scm.hpp"

namespace cfharm {

struct TrailerConfig {
  double dt = 0.5;
  int horizon = 300;
  double accel_max = 2.0;
  double wheel_rate_max = 1.0;
  double wheel_max = 0.6;
  double speed_min = -2.0;
  double speed_max = 5.0;
  double joint_max = 1.2;
  double tractor_wheelbase = 3.0;

  // Footprint rectangles (width x length). The tractor body spans
  // [-0.5, 3.5] m along its axis from the hitch (rear axle); the trailer
  // body starts 1 m behind the trailer axle.
  double tractor_width = 2.0;
  double tractor_length = 4.0;
  double tractor_rear_overhang = 0.5;
  double trailer_width = 2.5;
  double trailer_length = 8.0;
  double trailer_rear_overhang = 1.0;
  double footprint_spacing = 0.5;
  double clearance_cap = 2.0;

  // Hidden per-episode trailer wheelbase ~ N(mean, std) clipped to range.
  double wheelbase_mean = 8.0;
  double wheelbase_std = 0.5;
  double wheelbase_min = 6.0;
  double wheelbase_max = 10.0;

  // Speed-proportional process noise on joint angle, yaw rate and lateral
  // velocity (per unit speed).
  double sigma_joint = 0.02;
  double sigma_yaw = 0.02;
  double sigma_lateral = 0.05;
  // Uniform ray noise, relative to the measured distance.
  double ray_noise = 0.05;
  int n_rays = 32;
  double ray_range = 20.0;

  double park_position_tol = 1.0;
  double park_heading_tol = 0.2;
  double park_speed_tol = 0.1;
  double goal_bonus = 10.0;
  double heading_weight = 2.0;
  double reward_scale = 0.5;

  // Initial placement relative to the target bay entrance.
  double init_lateral_range = 8.0;
  double init_depth_min = 6.0;
  double init_depth_max = 16.0;
  double init_joint_range = 0.3;
  double init_wheel_range = 0.3;
  double wide_speed_min = -2.0;
  double wide_speed_max = 5.0;
  double wide_joint_range = 0.8;
  double wide_wheel_range = 0.6;
  int init_attempts = 10000;
};

// State layout: [x, y, yaw, joint, speed, wheel, trailer wheelbase, spot].
// (x, y) is the hitch at the tractor rear axle; trailer yaw = yaw - joint.
// Noise layout: [joint, yaw rate, lateral velocity] standard normal, then
// n_rays uniform draws in [-1, 1] for the ray distances.
class TrailerEnv final : public Environment {
 public:
  enum StateIndex {
    kX = 0, kY, kYaw, kJoint, kSpeed, kWheel, kWheelbase, kSpot, kStateDim
  };
  enum NoiseIndex { kNoiseJoint = 0, kNoiseYaw, kNoiseLateral, kNoiseRays };
  static constexpr int kStateFeatures = 9;

  TrailerEnv(std::shared_ptr<const OccupancyGrid> grid, TrailerConfig cfg = {});

  std::string_view name() const override { return "trailer"; }
  int state_dim() const override { return kStateDim; }
  int action_dim() const override { return 2; }
  int obs_dim() const override { return kStateFeatures + 2 * cfg_.n_rays; }
  int noise_dim() const override { return kNoiseRays + cfg_.n_rays; }
  int horizon() const override { return cfg_.horizon; }
  double dt() const override { return cfg_.dt; }
  int state_feature_dim() const override { return kStateFeatures; }

  Transition transition(const EnvState& state, const Action& action,
                        const NoiseRecord& noise) const override;
  NoiseRecord draw_noise(Rng& rng) const override;
  Observation observe_initial(const EnvState& state, Rng& rng) const override;
  double constraint(const EnvState& state) const override;
  bool at_goal(const EnvState& state) const override;
  Action default_action(const EnvState& state) const override;
  EnvState sample_initial(InitRegime regime, Rng& rng) const override;

  const TrailerConfig& config() const { return cfg_; }
  const OccupancyGrid& grid() const { return *grid_; }

  // Largest signed distance over the footprint boundary samples (positive
  // is penetration depth).
  double penetration(const EnvState& state) const;
  std::vector<Vec2> footprint_samples(const EnvState& state) const;
  Vec2 trailer_center(const EnvState& state) const;

  static EnvState make_state(double x, double y, double yaw, double joint,
                             double speed, double wheel, double wheelbase,
                             int spot);

 private:
  Observation observe(const EnvState& s, const double* ray_draws) const;
  double potential(const EnvState& s) const;

  std::shared_ptr<const OccupancyGrid> grid_;
  TrailerConfig cfg_;
};

// Applies the collision-severity scaling: d if d <= 0, else d * (1 + v^2/2).
double impact_scaled_constraint(double penetration, double speed);

}  // namespace cfharm

#endif  // CFHARM_TRAILER_HPP_
