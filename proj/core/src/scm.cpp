#include "cfharm/scm.hpp"

#include <algorithm>

namespace cfharm {

std::string_view to_string(InitRegime regime) {
  return regime == InitRegime::kFeasible ? "feasible" : "wide";
}

InitRegime parse_init_regime(std::string_view name) {
  if (name == "feasible") return InitRegime::kFeasible;
  if (name == "wide") return InitRegime::kWide;
  throw std::invalid_argument("unknown init regime: " + std::string(name));
}

RecordedStep step_recorded(const Environment& env, const EnvState& state,
                           const Action& action, Rng& rng) {
  if (state.done) throw ContractError("step on a finished episode");
  NoiseRecord noise = env.draw_noise(rng);
  Transition tr = env.transition(state, action, noise);
  return {std::move(tr), std::move(noise)};
}

Transition replay_step(const Environment& env, const EnvState& state,
                       const Action& action, const NoiseRecord& noise) {
  if (static_cast<int>(noise.draws.size()) != env.noise_dim()) {
    throw std::invalid_argument("noise record has " +
                                std::to_string(noise.draws.size()) +
                                " draws, environment expects " +
                                std::to_string(env.noise_dim()));
  }
  if (static_cast<int>(action.size()) != env.action_dim() ||
      static_cast<int>(state.x.size()) != env.state_dim()) {
    throw std::invalid_argument("state/action dimension mismatch in replay");
  }
  return env.transition(state, action, noise);
}

void DefaultPolicy::act(std::span<const EnvState> states, const Matrix&, Rng&,
                        Matrix& actions, Vector& log_probs) {
  const int n = static_cast<int>(states.size());
  actions.resize(env_.action_dim(), n);
  log_probs.setZero(n);
  for (int i = 0; i < n; ++i) {
    const Action a = env_.default_action(states[i]);
    for (int k = 0; k < env_.action_dim(); ++k) actions(k, i) = a[k];
  }
}

bool TrajectoryBatch::operator==(const TrajectoryBatch& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.size() == b.size() && a.rows() == b.rows() &&
           std::equal(a.data(), a.data() + a.size(), b.data());
  };
  return envs == o.envs && steps == o.steps && obs_dim == o.obs_dim &&
         action_dim == o.action_dim && states == o.states &&
         next_states == o.next_states && same(obs, o.obs) &&
         same(next_obs, o.next_obs) && same(actions, o.actions) &&
         same(log_probs, o.log_probs) && same(rewards, o.rewards) &&
         same(g, o.g) && same(next_g, o.next_g) && dones == o.dones &&
         goals == o.goals && noises == o.noises;
}

Matrix observations_to_matrix(std::span<const Observation> obs, int obs_dim) {
  Matrix m(obs_dim, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (int k = 0; k < obs_dim; ++k) m(k, static_cast<Eigen::Index>(i)) = obs[i][k];
  }
  return m;
}

namespace {

TrajectoryBatch allocate_batch(const Environment& env, int envs, int steps) {
  TrajectoryBatch b;
  b.envs = envs;
  b.steps = steps;
  b.obs_dim = env.obs_dim();
  b.action_dim = env.action_dim();
  const int n = envs * steps;
  b.states.resize(n);
  b.next_states.resize(n);
  b.obs.resize(b.obs_dim, n);
  b.next_obs.resize(b.obs_dim, n);
  b.actions.resize(b.action_dim, n);
  b.log_probs.resize(n);
  b.rewards.resize(n);
  b.g.resize(n);
  b.next_g.resize(n);
  b.dones.assign(n, 0);
  b.goals.assign(n, 0);
  b.noises.resize(n);
  return b;
}

void store_obs(Matrix& m, int col, const Observation& o) {
  for (std::size_t k = 0; k < o.size(); ++k) m(static_cast<Eigen::Index>(k), col) = o[k];
}

}  // namespace

VectorEnv::VectorEnv(const Environment& env, int num_envs, InitRegime regime,
                     std::uint64_t seed)
    : env_(env), regime_(regime) {
  if (num_envs < 1) throw std::invalid_argument("need at least one environment");
  states_.resize(num_envs);
  obs_.resize(num_envs);
  running_.resize(num_envs);
  rngs_.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) rngs_.push_back(derive_rng(seed, i, 0x5eed));
  for (int i = 0; i < num_envs; ++i) reset(i);
}

void VectorEnv::reset(int i) {
  states_[i] = env_.sample_initial(regime_, rngs_[i]);
  obs_[i] = env_.observe_initial(states_[i], rngs_[i]);
  running_[i] = EpisodeSummary{};
  running_[i].max_g = env_.constraint(states_[i]);
}

TrajectoryBatch VectorEnv::rollout(BatchPolicy& policy, int steps,
                                   Rng& policy_rng) {
  if (steps < 1) throw std::invalid_argument("rollout needs at least one step");
  const int n_env = size();
  TrajectoryBatch b = allocate_batch(env_, n_env, steps);
  finished_.clear();
  Matrix actions;
  Vector log_probs;
  for (int t = 0; t < steps; ++t) {
    const Matrix obs = observations_to_matrix(obs_, env_.obs_dim());
    policy.act(states_, obs, policy_rng, actions, log_probs);
    for (int e = 0; e < n_env; ++e) {
      const int idx = b.index(e, t);
      Action a(actions.col(e).data(), actions.col(e).data() + actions.rows());
      RecordedStep rs = step_recorded(env_, states_[e], a, rngs_[e]);
      Transition& tr = rs.transition;
      b.states[idx] = states_[e];
      b.obs.col(idx) = obs.col(e);
      b.actions.col(idx) = actions.col(e);
      b.log_probs[idx] = log_probs[e];
      b.rewards[idx] = tr.reward;
      b.g[idx] = env_.constraint(states_[e]);
      b.next_g[idx] = tr.g;
      b.dones[idx] = tr.next.done ? 1 : 0;
      b.goals[idx] = tr.goal ? 1 : 0;
      store_obs(b.next_obs, idx, tr.obs);
      b.next_states[idx] = tr.next;
      b.noises[idx] = std::move(rs.noise);

      EpisodeSummary& ep = running_[e];
      ep.max_g = std::max(ep.max_g, tr.g);
      ep.total_reward += tr.reward;
      ++ep.length;
      if (tr.next.done) {
        ep.success = tr.goal && ep.max_g <= 0.0;
        finished_.push_back(ep);
        reset(e);
      } else {
        states_[e] = std::move(tr.next);
        obs_[e] = std::move(tr.obs);
      }
    }
  }
  return b;
}

TrajectoryBatch replay_batch(const Environment& env,
                             const TrajectoryBatch& rec) {
  TrajectoryBatch b = allocate_batch(env, rec.envs, rec.steps);
  for (int e = 0; e < rec.envs; ++e) {
    EnvState state;
    Observation obs;
    for (int t = 0; t < rec.steps; ++t) {
      const int idx = rec.index(e, t);
      if (t == 0 || rec.dones[idx - 1]) {
        // Episode start: initial states come from the recording.
        state = rec.states[idx];
        obs.assign(rec.obs.col(idx).data(), rec.obs.col(idx).data() + rec.obs_dim);
      }
      Action a(rec.actions.col(idx).data(),
               rec.actions.col(idx).data() + rec.action_dim);
      Transition tr = replay_step(env, state, a, rec.noises[idx]);
      b.states[idx] = state;
      store_obs(b.obs, idx, obs);
      b.actions.col(idx) = rec.actions.col(idx);
      b.log_probs[idx] = rec.log_probs[idx];
      b.rewards[idx] = tr.reward;
      b.g[idx] = env.constraint(state);
      b.next_g[idx] = tr.g;
      b.dones[idx] = tr.next.done ? 1 : 0;
      b.goals[idx] = tr.goal ? 1 : 0;
      store_obs(b.next_obs, idx, tr.obs);
      b.next_states[idx] = tr.next;
      b.noises[idx] = rec.noises[idx];
      state = std::move(tr.next);
      obs = std::move(tr.obs);
    }
  }
  return b;
}

}  // namespace cfharm
