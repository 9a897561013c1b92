#ifndef CFHARM_ROVER_HPP_
#define CFHARM_ROVER_HPP_

#include <utility>

#include "cfharm/scm.hpp"

namespace cfharm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// U-shaped corridor around a centerline made of two parallel legs joined by a
// semicircle. The goal sits at the open end of the lower leg (the origin).
//
//   upper leg: (0, 2R) -> (leg, 2R)
//   bend:      centre (leg, R), radius R, swept clockwise
//   lower leg: (leg, 0) -> (0, 0)
//
// Arc length is measured from the far end of the upper leg towards the goal.
struct UTrack {
  double leg_length = 10.0;
  double bend_radius = 4.0;
  double half_width = 2.0;

  struct Projection {
    double distance = 0.0;  // to the centerline
    double arc = 0.0;       // arc position of the closest centerline point
    double offset = 0.0;    // signed lateral offset, positive left of travel
    Vec2 point;             // closest centerline point
    double tangent = 0.0;   // heading of the travel direction at `point`
  };

  double total_length() const;
  Projection project(Vec2 p) const;
  Vec2 point_at(double arc) const;
  double tangent_at(double arc) const;
  // Signed distance to the corridor walls, positive inside the corridor.
  double wall_distance(Vec2 p) const { return half_width - project(p).distance; }
  // Geodesic-style distance to the goal along the corridor.
  double distance_to_goal(Vec2 p) const;
};

struct RoverConfig {
  double dt = 0.5;
  int horizon = 100;
  double wheelbase = 0.5;
  double body_radius = 0.5;
  double accel_max = 1.0;
  double lat_accel_max = 1.0;
  double wheel_max = 0.5;
  double speed_max = 1.0;
  double friction_min = 0.3;
  double friction_max = 1.0;

  double sigma_accel = 0.05;
  double sigma_wheel = 0.02;
  double sigma_friction = 0.05;
  double sigma_obs_pos = 0.05;
  double sigma_obs_heading = 0.02;
  double sigma_obs_speed = 0.02;
  double sigma_obs_friction = 0.05;

  double goal_radius = 0.5;
  double goal_speed = 0.1;
  double goal_bonus = 10.0;
  double reward_scale = 1.0;

  // Initial-state samplers. Wide-regime constants were tuned once against
  // the default-kernel membership oracle to put roughly half of the samples
  // outside it.
  double init_goal_clearance = 2.0;
  double wide_speed_max = 1.0;
  double wide_wall_margin = -0.2;
  // Upper bound on the initial wall clearance; wide states sit near a wall.
  double wide_wall_band = 0.5;

  double default_lookahead = 1.5;
  double default_steer_gain = 1.0;

  UTrack track;
};

// State layout: [x, y, heading, speed, nominal friction].
// Noise layout: [accel, wheel, friction, obs x, obs y, obs heading,
//                obs speed, obs friction], all standard normal.
class RoverEnv final : public Environment {
 public:
  enum StateIndex { kX = 0, kY, kHeading, kSpeed, kFriction, kStateDim };
  enum NoiseIndex {
    kNoiseAccel = 0,
    kNoiseWheel,
    kNoiseFriction,
    kNoiseObsX,
    kNoiseObsY,
    kNoiseObsHeading,
    kNoiseObsSpeed,
    kNoiseObsFriction,
    kNoiseDim
  };
  static constexpr int kObsDim = 10;

  explicit RoverEnv(RoverConfig cfg = {}) : cfg_(std::move(cfg)) {}

  std::string_view name() const override { return "rover"; }
  int state_dim() const override { return kStateDim; }
  int action_dim() const override { return 2; }
  int obs_dim() const override { return kObsDim; }
  int noise_dim() const override { return kNoiseDim; }
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

  const RoverConfig& config() const { return cfg_; }

  // Scales (longitudinal, lateral) acceleration radially onto the friction
  // ellipse of radius `friction` when it lies outside.
  std::pair<double, double> friction_clip(double a_long, double a_lat,
                                          double friction) const;

  static EnvState make_state(double x, double y, double heading, double speed,
                             double friction);

 private:
  Observation observe(const EnvState& s, const double* draws) const;
  double potential(const EnvState& s) const;

  RoverConfig cfg_;
};

}  // namespace cfharm

#endif  // CFHARM_ROVER_HPP_
