#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "cfharm/counterfactual.hpp"
#include "cfharm/envs.hpp"
#include "cfharm/wall.hpp"

using namespace cfharm;

TEST_CASE("formulation table") {
  CHECK(all_formulations().size() == 10);
  const Formulation& dbs = parse_formulation("DBS");
  CHECK(dbs.regime == InitRegime::kFeasible);
  CHECK(dbs.aggregation == Aggregation::kCumulative);
  CHECK_FALSE(dbs.chance());
  CHECK(parse_formulation("CC_0").chance());
  CHECK(parse_formulation("HARM_C").chance());
  CHECK_FALSE(parse_formulation("HARM").chance());
  CHECK(parse_formulation("MC").threshold == ThresholdKind::kDefaultPolicy);
  CHECK(parse_formulation("MC_0").threshold == ThresholdKind::kZero);
  CHECK(parse_formulation("CCATE").needs_counterfactual());
  CHECK_FALSE(parse_formulation("CC").needs_counterfactual());
  for (const Formulation& f : all_formulations()) {
    CHECK(parse_formulation(f.name).id == f.id);
    CHECK(&formulation(f.id) == &f);
    CHECK(f.apply(0.0) == 0.0);
    // Monotone transforms.
    CHECK(f.apply(-0.5) <= f.apply(0.3));
    CHECK(f.apply(0.3) <= f.apply(2.0));
    const bool wide = f.base != BaseQuantity::kConstraint ||
                      f.threshold == ThresholdKind::kDefaultPolicy;
    CHECK((f.regime == InitRegime::kWide) == wide);
  }
  CHECK_THROWS_WITH_AS(parse_formulation("XYZ"), "unknown formulation: XYZ",
                       std::invalid_argument);
}

TEST_CASE("formulation transforms") {
  CHECK(parse_formulation("IC").apply(0.4) == 0.4);
  CHECK(parse_formulation("IC").apply(3.0) == kIcClipCap);
  CHECK(parse_formulation("IC").apply(-3.0) == 0.0);
  CHECK(parse_formulation("DBS").apply(1e-9) == 1.0);
  CHECK(parse_formulation("MC").apply(-2.5) == -2.5);
}

TEST_CASE("episode aggregates") {
  const std::vector<double> v{0.0, 1.0, 0.5, 2.0};
  const double g = 0.9;
  CHECK(aggregate(parse_formulation("DBS"), v, g) ==
        doctest::Approx(0.9 + 0.81 * 0.5 + 0.729 * 2.0));
  CHECK(aggregate(parse_formulation("MC"), v, g) == doctest::Approx(0.729 * 2.0));
  CHECK(aggregate(parse_formulation("MC"), std::vector<double>{-1.0, -3.0}, g) == -1.0);
  CHECK(aggregate(parse_formulation("MC"), std::vector<double>{}, g) == 0.0);
  CHECK_THROWS_AS(aggregate(parse_formulation("MC"), v, 0.0), std::invalid_argument);
}

TEST_CASE("formulation targets pick their base quantity") {
  const std::vector<double> g{-1.0, 0.5};
  const std::vector<double> h{0.0, 0.2};
  const std::vector<double> c{-0.3, 0.1};
  const FormulationInputs in{g, h, c};
  CHECK(formulation_target(parse_formulation("MC_0"), in) == g);
  CHECK(formulation_target(parse_formulation("HARM"), in) == h);
  CHECK(formulation_target(parse_formulation("HARM_C"), in) == std::vector<double>{0.0, 1.0});
  CHECK(formulation_target(parse_formulation("CCATE_C"), in) == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(formulation_target(parse_formulation("HARM"), FormulationInputs{g, {}, c}),
                  std::invalid_argument);
}

TEST_CASE("counterfactual branch replays mu under recorded noise") {
  auto env = make_environment("rover");
  Rng rng(1);
  const EnvState s0 = env->sample_initial(InitRegime::kWide, rng);
  std::vector<NoiseRecord> noises;
  for (int k = 0; k < 6; ++k) noises.push_back(env->draw_noise(rng));

  const CounterfactualPath path = simulate_counterfactual(*env, s0, noises, 6);
  REQUIRE(path.steps() == 6);
  EnvState s = s0;
  CHECK(path.g[0] == env->constraint(s0));
  for (int k = 0; k < 6; ++k) {
    const Transition tr = env->transition(s, env->default_action(s), noises[k]);
    CHECK(path.states[k + 1] == tr.next);
    CHECK(path.obs[k] == tr.obs);
    CHECK(path.g[k + 1] == tr.g);
    s = tr.next;
  }
  CHECK_THROWS_AS(simulate_counterfactual(*env, s0, noises, 7), std::invalid_argument);
}

TEST_CASE("counterfactual branch stops at its own episode end") {
  auto env = make_environment("wall");
  Rng rng(2);
  EnvState s0 = env->sample_initial(InitRegime::kFeasible, rng);
  s0.step = env->horizon() - 2;
  std::vector<NoiseRecord> noises(5, NoiseRecord{{0.0, 0.0, 0.0}});
  CHECK(simulate_counterfactual(*env, s0, noises, 5).steps() == 2);
}

TEST_CASE("counterfactual inference with a known critic") {
  auto env = make_environment("wall");
  Rng rng(3);
  const EnvState s0 = env->sample_initial(InitRegime::kFeasible, rng);
  std::vector<NoiseRecord> noises;
  for (int k = 0; k < 3; ++k) noises.push_back(env->draw_noise(rng));
  const EstimatorConfig cfg;
  const ValueFn critic = [](const Matrix& obs) {
    return Vector::Constant(obs.cols(), 0.25);
  };
  const CounterfactualPath path = simulate_counterfactual(*env, s0, noises, 3);
  // V2 = max(g2, gamma * V(s3)); V1, V0 blend lambda-ahead with the critic.
  const double gm = cfg.gamma, l = cfg.lambda;
  const double v2 = std::max(path.g[2], gm * 0.25);
  const double v1 = std::max(path.g[1], gm * (l * v2 + (1 - l) * 0.25));
  const double v0 = std::max(path.g[0], gm * (l * v1 + (1 - l) * 0.25));
  CHECK(counterfactual_inference(*env, s0, noises, 3, critic, cfg) == doctest::Approx(v0));
}

TEST_CASE("inference windows stop at episode and batch ends") {
  TrajectoryBatch b;
  b.envs = 2;
  b.steps = 7;
  b.dones.assign(14, 0);
  b.dones[b.index(0, 2)] = 1;
  b.dones[b.index(1, 6)] = 1;
  const std::vector<int> len = window_lengths(b, 3);
  CHECK(std::vector<int>(len.begin(), len.begin() + 7) == std::vector<int>{3, 2, 1, 3, 3, 2, 1});
  CHECK(std::vector<int>(len.begin() + 7, len.end()) == std::vector<int>{3, 3, 3, 3, 3, 2, 1});
  CHECK_THROWS_AS(window_lengths(b, 0), std::invalid_argument);
}

TEST_CASE("batched branches equal per-state branches") {
  auto env = make_environment("rover");
  DefaultPolicy mu(*env);
  VectorEnv venv(*env, 3, InitRegime::kWide, 9);
  Rng rng(1);
  const TrajectoryBatch b = venv.rollout(mu, 12, rng);
  const CounterfactualBatch cf = simulate_counterfactual_batch(*env, b, 5);
  const std::vector<int> len = window_lengths(b, 5);
  for (int i = 0; i < b.size(); ++i) {
    const CounterfactualPath p = simulate_counterfactual(
        *env, b.states[i], std::span<const NoiseRecord>(b.noises).subspan(i, len[i]), len[i]);
    REQUIRE(cf.lengths[i] == p.steps());
    for (int k = 0; k < p.steps(); ++k) {
      CHECK(cf.g[cf.offsets[i] + k] == p.g[k + 1]);
      // mu is the behaviour policy, so the branch retraces the batch.
      CHECK(p.states[k + 1] == b.next_states[i + k]);
    }
  }
}

TEST_CASE("learner and counterfactual windows agree when pi is mu") {
  auto env = make_environment("rover");
  DefaultPolicy mu(*env);
  VectorEnv venv(*env, 4, InitRegime::kWide, 10);
  Rng rng(1);
  const TrajectoryBatch b = venv.rollout(mu, 30, rng);
  const CounterfactualBatch cf = simulate_counterfactual_batch(*env, b, 5);
  // A per-column critic, so equality does not depend on batching.
  auto critic = [](const Matrix& obs) {
    Vector v(obs.cols());
    for (Eigen::Index j = 0; j < obs.cols(); ++j) v[j] = std::sin(obs(0, j)) - obs(6, j);
    return v;
  };
  const Vector cfv = critic(cf.obs);
  const Vector nxt = critic(b.next_obs);
  const EstimatorConfig cfg;
  const auto vmu = counterfactual_values(cf, b, {cfv.data(), std::size_t(cfv.size())}, cfg);
  const auto vpi = learner_window_values(b, cf.lengths, {nxt.data(), std::size_t(nxt.size())}, cfg);
  CHECK(vmu == vpi);
  for (double h : harm_targets(vpi, vmu)) CHECK(h == 0.0);
}

TEST_CASE("episode harm") {
  const WallEnv env;
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const EnvState s0 = env.sample_initial(InitRegime::kFeasible, rng);
    std::vector<NoiseRecord> plan;
    for (int k = 0; k < env.horizon(); ++k) plan.push_back(env.draw_noise(rng));
    std::vector<EnvState> mu_states{s0}, fast_states{s0};
    for (int k = 0; k < env.horizon(); ++k) {
      const EnvState& s = mu_states.back();
      mu_states.push_back(env.transition(s, env.default_action(s), plan[k]).next);
      const EnvState& f = fast_states.back();
      fast_states.push_back(env.transition(f, {1.0}, plan[k]).next);
    }
    const EpisodeHarm zero = episode_harm(env, mu_states, plan, 0.99);
    CHECK(zero.episode == 0.0);
    CHECK(zero.per_state.size() == mu_states.size() - 1);
    for (double h : zero.per_state) CHECK(h == 0.0);

    const EpisodeHarm hit = episode_harm(env, fast_states, plan, 0.99);
    CHECK(hit.episode > 0.0);
    // The first state's harm is the learner's discounted worst outcome,
    // since mu stays clear of the wall from there.
    std::vector<double> g;
    for (const EnvState& s : fast_states) g.push_back(env.constraint(s));
    CHECK(hit.per_state[0] == doctest::Approx(discounted_max(g, 0.99)));
  }
}

TEST_CASE("default-policy threshold estimate") {
  const WallEnv env;
  Rng rng(5);
  // mu never reaches the wall, so the expected violation is zero.
  CHECK(estimate_default_threshold(env, parse_formulation("MC"), rng, 32, 0.99) == 0.0);
  CHECK(mean_relu(std::vector<double>{-1.0, 0.5, 1.5}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(mean_relu(std::vector<double>{}), std::invalid_argument);

  // Rover from the wide distribution: mu does violate, and the estimate is
  // the mean positive part of its discounted worst outcome.
  auto rover = make_environment("rover");
  Rng a(6), b(6);
  const Formulation& mc = parse_formulation("MC");
  const double est = estimate_default_threshold(*rover, mc, a, 64, 0.99);
  double ref = 0.0;
  for (int r = 0; r < 64; ++r) {
    EnvState s = rover->sample_initial(InitRegime::kWide, b);
    std::vector<double> g{rover->constraint(s)};
    while (!s.done) {
      RecordedStep rs = step_recorded(*rover, s, rover->default_action(s), b);
      g.push_back(rs.transition.g);
      s = rs.transition.next;
    }
    ref += relu(discounted_max(g, 0.99));
  }
  CHECK(est == doctest::Approx(ref / 64).epsilon(1e-12));
  CHECK(est > 0.0);
}
