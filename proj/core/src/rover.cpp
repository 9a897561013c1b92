#include "cfharm/rover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cfharm {

namespace {
constexpr double kPi = std::numbers::pi;
}

double UTrack::total_length() const {
  return 2.0 * leg_length + kPi * bend_radius;
}

UTrack::Projection UTrack::project(Vec2 p) const {
  const double L = leg_length;
  const double R = bend_radius;
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();

  {  // upper leg, travelling +x
    const double cx = std::clamp(p.x, 0.0, L);
    const double d = std::hypot(p.x - cx, p.y - 2.0 * R);
    if (d < best.distance) {
      best = {d, cx, p.y - 2.0 * R, {cx, 2.0 * R}, 0.0};
    }
  }
  if (p.x >= L) {  // bend, travelling clockwise around (L, R)
    const double dx = p.x - L;
    const double dy = p.y - R;
    const double r = std::hypot(dx, dy);
    const double phi = std::atan2(dy, dx);
    const double d = std::abs(r - R);
    if (d < best.distance) {
      best = {d, L + R * (kPi / 2.0 - phi), r - R,
              {L + R * std::cos(phi), R + R * std::sin(phi)}, phi - kPi / 2.0};
    }
  }
  {  // lower leg, travelling -x towards the goal
    const double cx = std::clamp(p.x, 0.0, L);
    const double d = std::hypot(p.x - cx, p.y);
    if (d < best.distance) {
      best = {d, L + kPi * R + (L - cx), -p.y, {cx, 0.0}, kPi};
    }
  }
  return best;
}

Vec2 UTrack::point_at(double arc) const {
  const double L = leg_length;
  const double R = bend_radius;
  arc = std::clamp(arc, 0.0, total_length());
  if (arc <= L) return {arc, 2.0 * R};
  if (arc <= L + kPi * R) {
    const double phi = kPi / 2.0 - (arc - L) / R;
    return {L + R * std::cos(phi), R + R * std::sin(phi)};
  }
  return {L - (arc - L - kPi * R), 0.0};
}

double UTrack::tangent_at(double arc) const {
  const double L = leg_length;
  const double R = bend_radius;
  if (arc <= L) return 0.0;
  if (arc <= L + kPi * R) return -(arc - L) / R;
  return kPi;
}

double UTrack::distance_to_goal(Vec2 p) const {
  const Projection proj = project(p);
  return std::hypot(total_length() - proj.arc, proj.distance);
}

EnvState RoverEnv::make_state(double x, double y, double heading, double speed,
                              double friction) {
  EnvState s;
  s.x = {x, y, heading, speed, friction};
  return s;
}

std::pair<double, double> RoverEnv::friction_clip(double a_long, double a_lat,
                                                  double friction) const {
  const double n2 = (a_long / cfg_.accel_max) * (a_long / cfg_.accel_max) +
                    (a_lat / cfg_.lat_accel_max) * (a_lat / cfg_.lat_accel_max);
  if (n2 > friction * friction) {
    const double scale = friction / std::sqrt(n2);
    return {a_long * scale, a_lat * scale};
  }
  return {a_long, a_lat};
}

Transition RoverEnv::transition(const EnvState& s, const Action& action,
                                const NoiseRecord& noise) const {
  const double* xi = noise.draws.data();
  const double x = s.x[kX], y = s.x[kY], heading = s.x[kHeading];
  const double v = s.x[kSpeed], rho = s.x[kFriction];

  const double accel = std::clamp(action[0] + cfg_.sigma_accel * xi[kNoiseAccel],
                                  -cfg_.accel_max, cfg_.accel_max);
  const double wheel = std::clamp(action[1] + cfg_.sigma_wheel * xi[kNoiseWheel],
                                  -cfg_.wheel_max, cfg_.wheel_max);
  const double friction =
      std::clamp(rho + cfg_.sigma_friction * xi[kNoiseFriction],
                 cfg_.friction_min, cfg_.friction_max);

  const double curvature = std::tan(wheel) / cfg_.wheelbase;
  const auto [a_long, a_lat] = friction_clip(accel, v * v * curvature, friction);
  const double yaw_rate = v != 0.0 ? a_lat / v : 0.0;

  Transition tr;
  tr.next.x = {x + v * std::cos(heading) * cfg_.dt,
               y + v * std::sin(heading) * cfg_.dt,
               wrap_angle(heading + yaw_rate * cfg_.dt),
               std::clamp(v + a_long * cfg_.dt, -cfg_.speed_max, cfg_.speed_max),
               rho};
  tr.next.step = s.step + 1;
  tr.goal = at_goal(tr.next);
  tr.next.done = tr.goal || tr.next.step >= cfg_.horizon;
  tr.g = constraint(tr.next);
  tr.reward = cfg_.reward_scale * (potential(tr.next) - potential(s)) +
              (tr.goal ? cfg_.goal_bonus : 0.0);
  tr.obs = observe(tr.next, xi + kNoiseObsX);
  return tr;
}

NoiseRecord RoverEnv::draw_noise(Rng& rng) const {
  NoiseRecord n;
  n.draws.resize(kNoiseDim);
  for (double& d : n.draws) d = standard_normal(rng);
  return n;
}

Observation RoverEnv::observe_initial(const EnvState& s, Rng& rng) const {
  double draws[kNoiseDim - kNoiseObsX];
  for (double& d : draws) d = standard_normal(rng);
  return observe(s, draws);
}

Observation RoverEnv::observe(const EnvState& s, const double* d) const {
  const double x = s.x[kX] + cfg_.sigma_obs_pos * d[0];
  const double y = s.x[kY] + cfg_.sigma_obs_pos * d[1];
  const double heading = s.x[kHeading] + cfg_.sigma_obs_heading * d[2];
  const double v = s.x[kSpeed] + cfg_.sigma_obs_speed * d[3];
  const double rho = s.x[kFriction] + cfg_.sigma_obs_friction * d[4];
  const UTrack::Projection proj = cfg_.track.project({x, y});
  const double rel = heading - proj.tangent;
  return {x / cfg_.track.leg_length,
          y / cfg_.track.leg_length,
          std::cos(heading),
          std::sin(heading),
          v,
          rho,
          proj.offset / cfg_.track.half_width,
          std::cos(rel),
          std::sin(rel),
          proj.arc / cfg_.track.total_length()};
}

double RoverEnv::constraint(const EnvState& s) const {
  return cfg_.body_radius - cfg_.track.wall_distance({s.x[kX], s.x[kY]});
}

bool RoverEnv::at_goal(const EnvState& s) const {
  return std::hypot(s.x[kX], s.x[kY]) <= cfg_.goal_radius &&
         std::abs(s.x[kSpeed]) <= cfg_.goal_speed;
}

double RoverEnv::potential(const EnvState& s) const {
  return -cfg_.track.distance_to_goal({s.x[kX], s.x[kY]});
}

Action RoverEnv::default_action(const EnvState& s) const {
  const double v = s.x[kSpeed];
  const double heading = s.x[kHeading];
  // Brake as hard as allowed, without commanding past standstill.
  const double accel =
      std::abs(v) < 1e-9 ? 0.0
                         : -sign_of(v) * std::min(cfg_.accel_max, std::abs(v) / cfg_.dt);

  // Pure-pursuit towards a centerline point ahead in the direction of travel.
  const Vec2 p{s.x[kX], s.x[kY]};
  const UTrack::Projection proj = cfg_.track.project(p);
  const double travel = v >= 0.0 ? heading : wrap_angle(heading + kPi);
  const double along =
      std::cos(wrap_angle(travel - proj.tangent)) >= 0.0 ? proj.tangent
                                                         : proj.tangent + kPi;
  const Vec2 target{proj.point.x + cfg_.default_lookahead * std::cos(along),
                    proj.point.y + cfg_.default_lookahead * std::sin(along)};
  const double bearing = std::atan2(target.y - p.y, target.x - p.x);
  const double error = wrap_angle(bearing - travel);
  const double direction = v >= 0.0 ? 1.0 : -1.0;
  const double wheel = std::clamp(direction * cfg_.default_steer_gain * error,
                                  -cfg_.wheel_max, cfg_.wheel_max);
  return {accel, wheel};
}

EnvState RoverEnv::sample_initial(InitRegime regime, Rng& rng) const {
  const UTrack& track = cfg_.track;
  const double rho = uniform(rng, cfg_.friction_min, cfg_.friction_max);
  if (regime == InitRegime::kFeasible) {
    const double arc =
        uniform(rng, 0.0, track.total_length() - cfg_.init_goal_clearance);
    const Vec2 p = track.point_at(arc);
    const double heading =
        wrap_angle(track.tangent_at(arc) + uniform(rng, -kPi / 2.0, kPi / 2.0));
    return make_state(p.x, p.y, heading, 0.0, rho);
  }
  const double L = track.leg_length;
  const double R = track.bend_radius;
  const double w = track.half_width;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vec2 p{uniform(rng, -w, L + R + w), uniform(rng, -w, 2.0 * R + w)};
    const double clearance = track.wall_distance(p) - cfg_.body_radius;
    if (clearance < cfg_.wide_wall_margin || clearance > cfg_.wide_wall_band) continue;
    if (std::hypot(p.x, p.y) < cfg_.init_goal_clearance) continue;
    const double heading = uniform(rng, -kPi, kPi);
    const double speed = uniform(rng, -cfg_.wide_speed_max, cfg_.wide_speed_max);
    return make_state(p.x, p.y, heading, speed, rho);
  }
  throw std::runtime_error("rover: failed to sample a collision-free state");
}

}  // namespace cfharm
