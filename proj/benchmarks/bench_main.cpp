#include <benchmark/benchmark.h>

#include "cfharm/counterfactual.hpp"
#include "cfharm/envs.hpp"
#include "cfharm/estimators.hpp"
#include "cfharm/eval.hpp"
#include "cfharm/policy.hpp"
#include "cfharm/ppo.hpp"
#include "cfharm/trainer.hpp"

using namespace cfharm;

namespace {

void BM_EnvStep(benchmark::State& state, const char* name) {
  auto env = make_environment(name);
  Rng rng(1);
  EnvState s = env->sample_initial(InitRegime::kWide, rng);
  for (auto _ : state) {
    if (s.done) s = env->sample_initial(InitRegime::kWide, rng);
    RecordedStep r = step_recorded(*env, s, env->default_action(s), rng);
    benchmark::DoNotOptimize(r.transition.g);
    s = std::move(r.transition.next);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_EnvStep, rover, "rover");
BENCHMARK_CAPTURE(BM_EnvStep, trailer, "trailer");

void BM_TdlMax(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  Rng rng(2);
  std::vector<double> g(T), v(T);
  for (int i = 0; i < T; ++i) {
    g[i] = uniform(rng, -1, 1);
    v[i] = uniform(rng, -1, 1);
  }
  const EstimatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tdl_max(g, v, 0.0, cfg));
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_TdlMax)->Arg(24)->Arg(1000);

struct RoverBatch {
  std::shared_ptr<const Environment> env = make_environment("rover");
  TrajectoryBatch batch;
  RoverBatch() {
    DefaultPolicy mu(*env);
    VectorEnv venv(*env, 64, InitRegime::kWide, 3);
    Rng rng(4);
    batch = venv.rollout(mu, 24, rng);
  }
};

void BM_CounterfactualBatch(benchmark::State& state) {
  const RoverBatch rb;
  for (auto _ : state) {
    CounterfactualBatch cf = simulate_counterfactual_batch(*rb.env, rb.batch, 5);
    benchmark::DoNotOptimize(cf.g.data());
  }
  state.SetItemsProcessed(state.iterations() * rb.batch.size());
}
BENCHMARK(BM_CounterfactualBatch)->Unit(benchmark::kMillisecond);

void BM_ComputeTargets(benchmark::State& state, const char* formulation) {
  TrainConfig cfg = TrainConfig::defaults("rover");
  cfg.formulation = formulation;
  cfg.regime = cfg.form().regime;
  cfg.envs = 64;
  cfg.hidden = {64, 64};
  cfg.threshold_rollouts = 8;
  Trainer trainer(cfg);
  trainer.update();
  const TrajectoryBatch b = trainer.last_batch();
  for (auto _ : state) benchmark::DoNotOptimize(trainer.compute_targets(b).constraint.data());
  state.SetItemsProcessed(state.iterations() * b.size());
}
BENCHMARK_CAPTURE(BM_ComputeTargets, MC_0, "MC_0")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ComputeTargets, HARM, "HARM")->Unit(benchmark::kMillisecond);

void BM_PpoLoss(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  ModelSpec spec;
  spec.obs_dim = 7;
  spec.action_dim = 2;
  spec.hidden = {width, width};
  ActorCritic model(spec);
  Rng rng(5);
  model.initialize(rng);
  const int B = 2048;
  Minibatch mb;
  mb.obs = Matrix::Random(spec.obs_dim, B);
  mb.actions = Matrix::Random(spec.action_dim, B);
  mb.old_log_probs = policy_log_probs(model, mb.obs, mb.actions);
  mb.reward_adv = Vector::Random(B);
  mb.constraint_adv = Vector::Random(B);
  for (auto& t : mb.targets) t = Vector::Random(B);
  mb.trained = {true, true, true, true};
  Vector grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppo_loss(model, mb, 0.5, LossConfig{}, &grad).total);
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_PpoLoss)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EpisodeHarm(benchmark::State& state) {
  auto env = make_environment("rover");
  const EvalCase c = make_eval_case(*env, InitRegime::kWide, 1, 0);
  const Episode ep = default_episode(*env, c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(episode_harm(*env, ep.states, c.noise_plan, 0.99).episode);
  }
}
BENCHMARK(BM_EpisodeHarm);

}  // namespace

BENCHMARK_MAIN();
