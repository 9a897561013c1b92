#include "cfharm/trailer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfharm {

namespace {

constexpr double kPi = std::numbers::pi;

// Absolute heading difference modulo pi (a parked trailer may face either
// way along the bay axis).
double axis_misalignment(double a, double b) {
  const double d = std::abs(wrap_angle(a - b));
  return std::min(d, kPi - d);
}

// Boundary points of a rectangle whose axis passes through `ref` with
// heading `h`, spanning [back, front] along the axis and +-half_w across.
void rectangle_samples(Vec2 ref, double h, double back, double front,
                       double half_w, double spacing, std::vector<Vec2>& out) {
  const double c = std::cos(h), s = std::sin(h);
  auto emit = [&](double u, double w) {
    out.push_back({ref.x + u * c - w * s, ref.y + u * s + w * c});
  };
  const int n_long = std::max(1, static_cast<int>(std::ceil((front - back) / spacing)));
  const int n_lat = std::max(1, static_cast<int>(std::ceil(2.0 * half_w / spacing)));
  for (int i = 0; i <= n_long; ++i) {
    const double u = back + (front - back) * i / n_long;
    emit(u, -half_w);
    emit(u, half_w);
  }
  for (int j = 1; j < n_lat; ++j) {
    const double w = -half_w + 2.0 * half_w * j / n_lat;
    emit(back, w);
    emit(front, w);
  }
}

}  // namespace

double impact_scaled_constraint(double penetration, double speed) {
  return penetration <= 0.0 ? penetration : penetration * (1.0 + 0.5 * speed * speed);
}

TrailerEnv::TrailerEnv(std::shared_ptr<const OccupancyGrid> grid,
                       TrailerConfig cfg)
    : grid_(std::move(grid)), cfg_(std::move(cfg)) {
  if (!grid_) throw std::invalid_argument("trailer: grid required");
  if (grid_->spots().empty()) {
    throw std::invalid_argument("trailer: grid has no parking spot ('P' cells)");
  }
}

EnvState TrailerEnv::make_state(double x, double y, double yaw, double joint,
                                double speed, double wheel, double wheelbase,
                                int spot) {
  EnvState s;
  s.x = {x, y, yaw, joint, speed, wheel, wheelbase, static_cast<double>(spot)};
  return s;
}

Vec2 TrailerEnv::trailer_center(const EnvState& s) const {
  const double th = s.x[kYaw] - s.x[kJoint];
  const double offset =
      -s.x[kWheelbase] - cfg_.trailer_rear_overhang + 0.5 * cfg_.trailer_length;
  return {s.x[kX] + offset * std::cos(th), s.x[kY] + offset * std::sin(th)};
}

std::vector<Vec2> TrailerEnv::footprint_samples(const EnvState& s) const {
  std::vector<Vec2> pts;
  pts.reserve(96);
  const Vec2 hitch{s.x[kX], s.x[kY]};
  rectangle_samples(hitch, s.x[kYaw], -cfg_.tractor_rear_overhang,
                    cfg_.tractor_length - cfg_.tractor_rear_overhang,
                    0.5 * cfg_.tractor_width, cfg_.footprint_spacing, pts);
  const double back = -s.x[kWheelbase] - cfg_.trailer_rear_overhang;
  rectangle_samples(hitch, s.x[kYaw] - s.x[kJoint], back,
                    back + cfg_.trailer_length, 0.5 * cfg_.trailer_width,
                    cfg_.footprint_spacing, pts);
  return pts;
}

double TrailerEnv::penetration(const EnvState& s) const {
  double worst = -cfg_.clearance_cap;
  for (const Vec2& p : footprint_samples(s)) {
    worst = std::max(worst, grid_->signed_distance(p, cfg_.clearance_cap));
  }
  return worst;
}

double TrailerEnv::constraint(const EnvState& s) const {
  return impact_scaled_constraint(penetration(s), s.x[kSpeed]);
}

Transition TrailerEnv::transition(const EnvState& s, const Action& action,
                                  const NoiseRecord& noise) const {
  const double* xi = noise.draws.data();
  const double v = s.x[kSpeed];
  const double wheel = s.x[kWheel];
  const double yaw = s.x[kYaw];
  const double joint = s.x[kJoint];
  const double wb = s.x[kWheelbase];
  const double dt = cfg_.dt;

  const double accel = std::clamp(action[0], -cfg_.accel_max, cfg_.accel_max);
  const double wheel_rate =
      std::clamp(action[1], -cfg_.wheel_rate_max, cfg_.wheel_rate_max);

  const double speed_noise = std::abs(v);
  const double yaw_rate = v * std::tan(wheel) / cfg_.tractor_wheelbase +
                          cfg_.sigma_yaw * speed_noise * xi[kNoiseYaw];
  const double joint_rate = yaw_rate - v * std::sin(joint) / wb +
                            cfg_.sigma_joint * speed_noise * xi[kNoiseJoint];
  const double v_lat = cfg_.sigma_lateral * speed_noise * xi[kNoiseLateral];

  Transition tr;
  tr.next.x = {
      s.x[kX] + (v * std::cos(yaw) - v_lat * std::sin(yaw)) * dt,
      s.x[kY] + (v * std::sin(yaw) + v_lat * std::cos(yaw)) * dt,
      wrap_angle(yaw + yaw_rate * dt),
      std::clamp(joint + joint_rate * dt, -cfg_.joint_max, cfg_.joint_max),
      std::clamp(v + accel * dt, cfg_.speed_min, cfg_.speed_max),
      std::clamp(wheel + wheel_rate * dt, -cfg_.wheel_max, cfg_.wheel_max),
      wb,
      s.x[kSpot]};
  tr.next.step = s.step + 1;
  tr.goal = at_goal(tr.next);
  tr.next.done = tr.goal || tr.next.step >= cfg_.horizon;
  tr.g = constraint(tr.next);
  tr.reward = cfg_.reward_scale * (potential(tr.next) - potential(s)) +
              (tr.goal ? cfg_.goal_bonus : 0.0);
  tr.obs = observe(tr.next, xi + kNoiseRays);
  return tr;
}

NoiseRecord TrailerEnv::draw_noise(Rng& rng) const {
  NoiseRecord n;
  n.draws.resize(noise_dim());
  for (int k = 0; k < kNoiseRays; ++k) n.draws[k] = standard_normal(rng);
  for (int k = kNoiseRays; k < noise_dim(); ++k) n.draws[k] = uniform(rng, -1.0, 1.0);
  return n;
}

Observation TrailerEnv::observe_initial(const EnvState& s, Rng& rng) const {
  std::vector<double> draws(cfg_.n_rays);
  for (double& d : draws) d = uniform(rng, -1.0, 1.0);
  return observe(s, draws.data());
}

Observation TrailerEnv::observe(const EnvState& s, const double* ray_draws) const {
  const ParkingSpot& spot = grid_->spots()[static_cast<int>(s.x[kSpot])];
  const double hs = spot.heading;
  const double dx = s.x[kX] - spot.center.x;
  const double dy = s.x[kY] - spot.center.y;
  const double rx = std::cos(hs) * dx + std::sin(hs) * dy;
  const double ry = -std::sin(hs) * dx + std::cos(hs) * dy;
  const double trailer_yaw = s.x[kYaw] - s.x[kJoint];
  const double v = s.x[kSpeed];

  Observation o;
  o.reserve(obs_dim());
  o.push_back(rx / 20.0);
  o.push_back(ry / 20.0);
  o.push_back(std::cos(trailer_yaw - hs));
  o.push_back(std::sin(trailer_yaw - hs));
  o.push_back(std::cos(s.x[kYaw] - hs));
  o.push_back(std::sin(s.x[kYaw] - hs));
  o.push_back(s.x[kJoint]);
  o.push_back(v / cfg_.speed_max);
  o.push_back(s.x[kWheel] / cfg_.wheel_max);

  const Vec2 vel{v * std::cos(s.x[kYaw]), v * std::sin(s.x[kYaw])};
  const Vec2 origin{s.x[kX], s.x[kY]};
  if (grid_->inside(origin)) {
    const RayScan scan =
        grid_->raycast(origin, s.x[kYaw], cfg_.n_rays, cfg_.ray_range, vel);
    for (int k = 0; k < cfg_.n_rays; ++k) {
      const double d = scan.distances[k] * (1.0 + cfg_.ray_noise * ray_draws[k]);
      o.push_back(d / cfg_.ray_range);
    }
    for (int k = 0; k < cfg_.n_rays; ++k) {
      o.push_back(scan.relative_speeds[k] / cfg_.speed_max);
    }
  } else {
    // Hitch left the map: every ray is blocked immediately.
    o.insert(o.end(), 2 * cfg_.n_rays, 0.0);
  }
  return o;
}

bool TrailerEnv::at_goal(const EnvState& s) const {
  const ParkingSpot& spot = grid_->spots()[static_cast<int>(s.x[kSpot])];
  const Vec2 c = trailer_center(s);
  return std::hypot(c.x - spot.center.x, c.y - spot.center.y) <= cfg_.park_position_tol &&
         axis_misalignment(s.x[kYaw] - s.x[kJoint], spot.heading) <= cfg_.park_heading_tol &&
         std::abs(s.x[kSpeed]) <= cfg_.park_speed_tol;
}

double TrailerEnv::potential(const EnvState& s) const {
  const ParkingSpot& spot = grid_->spots()[static_cast<int>(s.x[kSpot])];
  const Vec2 c = trailer_center(s);
  return -(std::hypot(c.x - spot.center.x, c.y - spot.center.y) +
           cfg_.heading_weight *
               axis_misalignment(s.x[kYaw] - s.x[kJoint], spot.heading));
}

Action TrailerEnv::default_action(const EnvState& s) const {
  const double v = s.x[kSpeed];
  const double accel =
      std::abs(v) < 1e-9 ? 0.0
                         : -sign_of(v) * std::min(cfg_.accel_max, std::abs(v) / cfg_.dt);
  return {accel, 0.0};
}

EnvState TrailerEnv::sample_initial(InitRegime regime, Rng& rng) const {
  const auto& spots = grid_->spots();
  const int spot_index =
      std::uniform_int_distribution<int>(0, static_cast<int>(spots.size()) - 1)(rng);
  const ParkingSpot& spot = spots[spot_index];
  // The bay opens towards the side with more free space along its axis.
  const double fwd = grid_->cast(spot.center, spot.heading, 1e3);
  const double back = grid_->cast(spot.center, spot.heading + kPi, 1e3);
  const double out = fwd > back ? spot.heading : spot.heading + kPi;
  const double wb = std::clamp(
      cfg_.wheelbase_mean + cfg_.wheelbase_std * standard_normal(rng),
      cfg_.wheelbase_min, cfg_.wheelbase_max);
  const bool wide = regime == InitRegime::kWide;
  for (int attempt = 0; attempt < cfg_.init_attempts; ++attempt) {
    const double depth = uniform(rng, cfg_.init_depth_min, cfg_.init_depth_max);
    const double lateral = uniform(rng, -cfg_.init_lateral_range, cfg_.init_lateral_range);
    const double x = spot.center.x + depth * std::cos(out) - lateral * std::sin(out);
    const double y = spot.center.y + depth * std::sin(out) + lateral * std::cos(out);
    const double yaw = uniform(rng, -kPi, kPi);
    const double joint_range = wide ? cfg_.wide_joint_range : cfg_.init_joint_range;
    const double wheel_range = wide ? cfg_.wide_wheel_range : cfg_.init_wheel_range;
    const double joint = uniform(rng, -joint_range, joint_range);
    const double wheel = uniform(rng, -wheel_range, wheel_range);
    const double speed = wide ? uniform(rng, cfg_.wide_speed_min, cfg_.wide_speed_max) : 0.0;
    EnvState s = make_state(x, y, yaw, joint, speed, wheel, wb, spot_index);
    if (!grid_->inside({x, y})) continue;
    if (penetration(s) > 0.0 || at_goal(s)) continue;
    return s;
  }
  throw std::runtime_error("trailer: no collision-free initial state after " +
                           std::to_string(cfg_.init_attempts) + " attempts");
}

}  // namespace cfharm
