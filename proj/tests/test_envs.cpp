#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"

#include "cfharm/envs.hpp"
#include "cfharm/grid.hpp"
#include "cfharm/rover.hpp"
#include "cfharm/trailer.hpp"
#include "cfharm/wall.hpp"

using namespace cfharm;

namespace {

NoiseRecord zero_noise(const Environment& env) {
  return {std::vector<double>(env.noise_dim(), 0.0)};
}

// Mixes the default controller with random actions so replays cover
// clamping and braking branches.
Action mixed_action(const Environment& env, const EnvState& s, Rng& rng) {
  if (uniform(rng, 0.0, 1.0) < 0.5) return env.default_action(s);
  Action a(env.action_dim());
  for (double& v : a) v = uniform(rng, -3.0, 3.0);
  return a;
}

// Distance from p to the axis-aligned box [x0, x1] x [y0, y1] (0 inside).
double box_distance(Vec2 p, double x0, double y0, double x1, double y1) {
  const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

// Brute-force signed distance over every cell, with everything outside the
// grid occupied.
double brute_signed_distance(const OccupancyGrid& g, Vec2 p, double cap) {
  const double c = g.cell_size();
  const double W = g.width() * c, H = g.height() * c;
  const bool in_grid = p.x >= 0 && p.y >= 0 && p.x < W && p.y < H;
  const int ix = static_cast<int>(std::floor(p.x / c));
  const int iy = static_cast<int>(std::floor(p.y / c));
  const bool occ = !in_grid || g.occupied(ix, iy);
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.occupied(x, y) == occ) continue;
      best = std::min(best, box_distance(p, x * c, y * c, (x + 1) * c, (y + 1) * c));
    }
  }
  if (occ) return best;
  best = std::min({best, p.x, p.y, W - p.x, H - p.y});
  return -std::min(best, cap);
}

const char* kSmallLot =
    "8 6 1.0\n"
    "########\n"
    "#..PP..#\n"
    "#......#\n"
    "#..##..#\n"
    "#......#\n"
    "########\n";

}  // namespace

TEST_CASE("replay reproduces recorded transitions bit for bit") {
  for (const char* name : {"rover", "trailer", "wall"}) {
    CAPTURE(name);
    auto env = make_environment(name);
    Rng rng(7);
    Rng act_rng(8);
    int steps = 0;
    while (steps < 400) {
      EnvState s = env->sample_initial(InitRegime::kWide, rng);
      while (!s.done && steps < 400) {
        const Action a = mixed_action(*env, s, act_rng);
        const RecordedStep rs = step_recorded(*env, s, a, rng);
        const Transition again = replay_step(*env, s, a, rs.noise);
        CHECK(again.next == rs.transition.next);
        CHECK(again.obs == rs.transition.obs);
        CHECK(std::bit_cast<std::uint64_t>(again.reward) ==
              std::bit_cast<std::uint64_t>(rs.transition.reward));
        CHECK(std::bit_cast<std::uint64_t>(again.g) ==
              std::bit_cast<std::uint64_t>(rs.transition.g));
        s = rs.transition.next;
        ++steps;
      }
    }
  }
}

TEST_CASE("stepping a finished episode is a contract error") {
  auto env = make_environment("wall");
  Rng rng(1);
  EnvState s = env->sample_initial(InitRegime::kFeasible, rng);
  s.done = true;
  CHECK_THROWS_AS(step_recorded(*env, s, {0.0}, rng), ContractError);
}

TEST_CASE("replay rejects malformed noise and actions") {
  auto env = make_environment("rover");
  Rng rng(1);
  const EnvState s = env->sample_initial(InitRegime::kFeasible, rng);
  CHECK_THROWS_AS(replay_step(*env, s, {0.0, 0.0}, NoiseRecord{{1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(replay_step(*env, s, {0.0}, zero_noise(*env)), std::invalid_argument);
}

TEST_CASE("unknown environment and regime names") {
  CHECK_THROWS_WITH_AS(make_environment("boat"), "unknown environment: boat",
                       std::invalid_argument);
  CHECK(parse_init_regime("wide") == InitRegime::kWide);
  CHECK(parse_init_regime(to_string(InitRegime::kFeasible)) == InitRegime::kFeasible);
  CHECK_THROWS_AS(parse_init_regime("narrow"), std::invalid_argument);
}

TEST_CASE("u-track projection") {
  const UTrack t;
  const double L = t.leg_length, R = t.bend_radius;
  SUBCASE("centerline points project onto themselves") {
    for (int i = 0; i <= 50; ++i) {
      const double arc = t.total_length() * i / 50.0;
      const Vec2 p = t.point_at(arc);
      const UTrack::Projection pr = t.project(p);
      CHECK(pr.distance == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(pr.arc == doctest::Approx(arc).epsilon(1e-9));
      CHECK(t.wall_distance(p) == doctest::Approx(t.half_width));
    }
  }
  SUBCASE("offsets are positive to the left of travel") {
    CHECK(t.project({5.0, 2 * R + 1.0}).offset == doctest::Approx(1.0));
    CHECK(t.project({L + R + 0.5, R}).offset == doctest::Approx(0.5));
    CHECK(t.project({5.0, -0.3}).offset == doctest::Approx(0.3));
    CHECK(t.project({5.0, -0.3}).tangent == doctest::Approx(std::numbers::pi));
  }
  SUBCASE("goal distance") {
    CHECK(t.distance_to_goal({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(t.distance_to_goal({0.0, 2 * R}) == doctest::Approx(t.total_length()));
  }
}

TEST_CASE("rover friction ellipse clip") {
  const RoverEnv env;
  const auto [a, b] = env.friction_clip(0.3, 0.2, 0.8);
  CHECK(a == 0.3);
  CHECK(b == 0.2);
  const auto [c, d] = env.friction_clip(1.0, 1.0, 0.5);
  CHECK(std::hypot(c, d) == doctest::Approx(0.5));
  CHECK(c == doctest::Approx(d));
}

TEST_CASE("rover step under zero noise") {
  const RoverEnv env;
  const EnvState s = RoverEnv::make_state(2.0, 8.0, 0.0, 0.5, 0.8);
  const Transition tr = env.transition(s, {0.5, 0.0}, zero_noise(env));
  CHECK(tr.next.x[RoverEnv::kX] == doctest::Approx(2.25));
  CHECK(tr.next.x[RoverEnv::kY] == doctest::Approx(8.0));
  CHECK(tr.next.x[RoverEnv::kSpeed] == doctest::Approx(0.75));
  CHECK(tr.next.step == 1);
  CHECK_FALSE(tr.next.done);
  CHECK(tr.g == doctest::Approx(0.5 - 2.0));
  // Potential shaping along the upper leg: progress of 0.25 m.
  CHECK(tr.reward == doctest::Approx(0.25));
}

TEST_CASE("rover default policy brakes to standstill") {
  const RoverEnv env;
  const EnvState s = RoverEnv::make_state(2.0, 8.0, 0.0, 0.3, 0.8);
  const Action a = env.default_action(s);
  CHECK(a[0] == doctest::Approx(-0.6));
  const Transition tr = env.transition(s, a, zero_noise(env));
  CHECK(tr.next.x[RoverEnv::kSpeed] == doctest::Approx(0.0).epsilon(1e-12));
  // Heading already along the centerline: no steering needed.
  CHECK(a[1] == doctest::Approx(0.0));
}

TEST_CASE("rover initial regimes") {
  const RoverEnv env;
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const EnvState f = env.sample_initial(InitRegime::kFeasible, rng);
    CHECK(env.constraint(f) < 0.0);
    CHECK(f.x[RoverEnv::kSpeed] == 0.0);
    const EnvState w = env.sample_initial(InitRegime::kWide, rng);
    const double clearance = -env.constraint(w);
    CHECK(clearance >= env.config().wide_wall_margin);
    CHECK(clearance <= env.config().wide_wall_band);
  }
}

TEST_CASE("grid parsing and spots") {
  const OccupancyGrid g = OccupancyGrid::parse(kSmallLot);
  CHECK(g.width() == 8);
  CHECK(g.height() == 6);
  CHECK(g.occupied(0, 0));
  CHECK(g.occupied(3, 2));
  CHECK_FALSE(g.occupied(3, 4));
  REQUIRE(g.spots().size() == 1);
  CHECK(g.spots()[0].center.x == doctest::Approx(4.0));
  CHECK(g.spots()[0].center.y == doctest::Approx(4.5));
  CHECK(OccupancyGrid::parse(g.to_text()).to_text() == g.to_text());

  CHECK_THROWS_AS(OccupancyGrid::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(OccupancyGrid::parse("3 3 1\n###\n#x#\n###\n"), std::invalid_argument);
  CHECK_THROWS_AS(OccupancyGrid::parse("3 3 1\n###\n#..\n###\n"), std::invalid_argument);
  CHECK_THROWS_AS(OccupancyGrid::parse("3 3 1\n###\n#.#\n"), std::invalid_argument);
  CHECK_THROWS_AS(OccupancyGrid::load("/nonexistent/lot.grid"), std::runtime_error);
}

TEST_CASE("grid signed distance matches brute force") {
  const OccupancyGrid g = OccupancyGrid::parse(kSmallLot);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 p{uniform(rng, -1.0, 9.0), uniform(rng, -1.0, 7.0)};
    CAPTURE(p.x);
    CAPTURE(p.y);
    CHECK(g.signed_distance(p, 2.0) ==
          doctest::Approx(brute_signed_distance(g, p, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("grid ray cast matches a fine march") {
  const OccupancyGrid g = OccupancyGrid::parse(kSmallLot);
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    Vec2 o;
    do {
      o = {uniform(rng, 1.0, 7.0), uniform(rng, 1.0, 5.0)};
    } while (g.signed_distance(o, 1.0) >= 0.0);
    const double ang = uniform(rng, -std::numbers::pi, std::numbers::pi);
    double t = 0.0;
    while (t < 20.0) {
      const Vec2 q{o.x + t * std::cos(ang), o.y + t * std::sin(ang)};
      if (g.occupied(static_cast<int>(std::floor(q.x)), static_cast<int>(std::floor(q.y)))) break;
      t += 1e-4;
    }
    CHECK(g.cast(o, ang, 20.0) == doctest::Approx(std::min(t, 20.0)).epsilon(2e-4));
  }
  CHECK_THROWS_AS(g.cast({-1.0, 2.0}, 0.0, 5.0), std::out_of_range);
}

TEST_CASE("trailer kinematics") {
  auto grid = std::make_shared<const OccupancyGrid>(
      OccupancyGrid::parse(default_parking_lot_text()));
  const TrailerEnv env(grid);
  const int nd = env.noise_dim();

  SUBCASE("straight driving keeps the joint at zero") {
    const EnvState s = TrailerEnv::make_state(20.0, 10.0, 0.0, 0.0, 2.0, 0.0, 8.0, 0);
    const Transition tr = env.transition(s, {0.0, 0.0}, zero_noise(env));
    CHECK(tr.next.x[TrailerEnv::kX] == doctest::Approx(21.0));
    CHECK(tr.next.x[TrailerEnv::kY] == doctest::Approx(10.0));
    CHECK(tr.next.x[TrailerEnv::kJoint] == 0.0);
  }
  SUBCASE("joint rate follows the one-trailer model") {
    const double v = 1.5, wheel = 0.2, joint = 0.3, wb = 7.0;
    const EnvState s = TrailerEnv::make_state(20.0, 10.0, 0.4, joint, v, wheel, wb, 0);
    const Transition tr = env.transition(s, {0.0, 0.0}, zero_noise(env));
    const double yaw_rate = v * std::tan(wheel) / env.config().tractor_wheelbase;
    const double joint_rate = yaw_rate - v * std::sin(joint) / wb;
    CHECK(tr.next.x[TrailerEnv::kJoint] ==
          doctest::Approx(joint + joint_rate * env.dt()));
    CHECK(tr.next.x[TrailerEnv::kYaw] == doctest::Approx(0.4 + yaw_rate * env.dt()));
  }
  SUBCASE("process noise vanishes at standstill") {
    const EnvState s = TrailerEnv::make_state(20.0, 10.0, 0.4, 0.1, 0.0, 0.1, 8.0, 0);
    NoiseRecord a{std::vector<double>(nd, 0.0)};
    NoiseRecord b{std::vector<double>(nd, 0.0)};
    b.draws[TrailerEnv::kNoiseJoint] = 2.0;
    b.draws[TrailerEnv::kNoiseYaw] = -1.0;
    b.draws[TrailerEnv::kNoiseLateral] = 1.5;
    CHECK(env.transition(s, {1.0, 0.5}, a).next == env.transition(s, {1.0, 0.5}, b).next);
  }
  SUBCASE("impact scaling") {
    CHECK(impact_scaled_constraint(-0.4, 3.0) == -0.4);
    CHECK(impact_scaled_constraint(0.2, 2.0) == doctest::Approx(0.2 * 3.0));
  }
  SUBCASE("initial states") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const EnvState s = env.sample_initial(InitRegime::kFeasible, rng);
      CHECK(env.constraint(s) < 0.0);
      CHECK(s.x[TrailerEnv::kWheelbase] >= env.config().wheelbase_min);
      CHECK(s.x[TrailerEnv::kWheelbase] <= env.config().wheelbase_max);
    }
  }
  SUBCASE("observation layout") {
    Rng rng(6);
    const EnvState s = env.sample_initial(InitRegime::kFeasible, rng);
    CHECK(static_cast<int>(env.observe_initial(s, rng).size()) == env.obs_dim());
    CHECK(env.state_feature_dim() < env.obs_dim());
  }
}

TEST_CASE("wall env: throttle collides, default brakes safely") {
  const WallEnv env;
  Rng rng(9);
  RecklessPolicy reckless(env);
  DefaultPolicy mu(env);
  VectorEnv a(env, 50, InitRegime::kFeasible, 3);
  VectorEnv b(env, 50, InitRegime::kFeasible, 3);
  a.rollout(reckless, env.horizon(), rng);
  b.rollout(mu, env.horizon(), rng);
  REQUIRE(a.finished().size() == 50);
  REQUIRE(b.finished().size() == 50);
  for (const EpisodeSummary& ep : a.finished()) CHECK(ep.max_g > 0.0);
  for (const EpisodeSummary& ep : b.finished()) CHECK(ep.max_g <= 0.0);
}

TEST_CASE("vector env rollouts are seeded and replayable") {
  for (const char* name : {"rover", "trailer"}) {
    CAPTURE(name);
    auto env = make_environment(name);
    DefaultPolicy mu(*env);
    Rng r1(1), r2(1), r3(1);
    VectorEnv v1(*env, 4, InitRegime::kWide, 42);
    VectorEnv v2(*env, 4, InitRegime::kWide, 42);
    VectorEnv v3(*env, 4, InitRegime::kWide, 43);
    const TrajectoryBatch b1 = v1.rollout(mu, 40, r1);
    const TrajectoryBatch b2 = v2.rollout(mu, 40, r2);
    const TrajectoryBatch b3 = v3.rollout(mu, 40, r3);
    CHECK(b1 == b2);
    CHECK_FALSE(b1 == b3);
    CHECK(replay_batch(*env, b1) == b1);
  }
}
