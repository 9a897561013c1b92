#include "cfharm/counterfactual.hpp"

#include <algorithm>
#include <string>

namespace cfharm {

CounterfactualPath simulate_counterfactual(const Environment& env,
                                           const EnvState& start,
                                           std::span<const NoiseRecord> noises,
                                           int n_steps) {
  if (n_steps < 0) throw std::invalid_argument("counterfactual: negative step count");
  if (static_cast<int>(noises.size()) < n_steps) {
    throw std::invalid_argument("counterfactual: " + std::to_string(n_steps) +
                                " steps requested but only " +
                                std::to_string(noises.size()) + " noise records");
  }
  CounterfactualPath path;
  path.states.reserve(n_steps + 1);
  path.obs.reserve(n_steps);
  path.g.reserve(n_steps + 1);
  path.states.push_back(start);
  path.g.push_back(env.constraint(start));
  for (int k = 0; k < n_steps; ++k) {
    const EnvState& s = path.states.back();
    if (s.done) break;
    Transition tr = replay_step(env, s, env.default_action(s), noises[k]);
    path.g.push_back(tr.g);
    path.obs.push_back(std::move(tr.obs));
    path.states.push_back(std::move(tr.next));
  }
  return path;
}

double window_value(std::span<const double> g_path,
                    std::span<const double> critic_next,
                    const EstimatorConfig& cfg) {
  if (g_path.empty()) throw std::invalid_argument("window_value: empty window");
  const std::vector<double> v = tdl_max(g_path, critic_next, critic_next.back(), cfg);
  return v.front();
}

double counterfactual_inference(const Environment& env, const EnvState& start,
                                std::span<const NoiseRecord> noises, int n_steps,
                                const ValueFn& v_mu, const EstimatorConfig& cfg) {
  if (n_steps < 1) throw std::invalid_argument("counterfactual inference needs N >= 1");
  const CounterfactualPath path = simulate_counterfactual(env, start, noises, n_steps);
  const int n = path.steps();
  if (n == 0) return path.g.front();
  const Vector critic = v_mu(observations_to_matrix(path.obs, env.obs_dim()));
  const std::span<const double> g(path.g.data(), static_cast<std::size_t>(n));
  return window_value(g, {critic.data(), static_cast<std::size_t>(n)}, cfg);
}

std::vector<double> harm_targets(std::span<const double> v_pi,
                                 std::span<const double> v_mu) {
  if (v_pi.size() != v_mu.size()) throw std::invalid_argument("harm_targets: length mismatch");
  std::vector<double> h(v_pi.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = harm_base(v_pi[i], v_mu[i]);
  return h;
}

std::vector<double> ccate_targets(std::span<const double> v_pi,
                                  std::span<const double> v_mu_critic) {
  if (v_pi.size() != v_mu_critic.size()) {
    throw std::invalid_argument("ccate_targets: length mismatch");
  }
  std::vector<double> c(v_pi.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = v_pi[i] - relu(v_mu_critic[i]);
  return c;
}

std::vector<int> window_lengths(const TrajectoryBatch& batch, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("window length N must be >= 1");
  std::vector<int> len(batch.size());
  for (int e = 0; e < batch.envs; ++e) {
    // Steps until (and including) the next episode end, scanning backwards.
    int to_end = 0;
    for (int t = batch.steps - 1; t >= 0; --t) {
      const int idx = batch.index(e, t);
      to_end = batch.dones[idx] ? 1 : to_end + 1;
      len[idx] = std::min(n_steps, to_end);
    }
  }
  return len;
}

CounterfactualBatch simulate_counterfactual_batch(const Environment& env,
                                                  const TrajectoryBatch& batch,
                                                  int n_steps) {
  CounterfactualBatch cf;
  cf.lengths = window_lengths(batch, n_steps);
  const int n = batch.size();
  std::vector<CounterfactualPath> paths(n);
  cf.offsets.resize(n);
  int cols = 0;
  for (int i = 0; i < n; ++i) {
    const std::span<const NoiseRecord> noises(batch.noises.data() + i,
                                              static_cast<std::size_t>(cf.lengths[i]));
    paths[i] = simulate_counterfactual(env, batch.states[i], noises, cf.lengths[i]);
    // The branch may end before the learner's window does.
    cf.lengths[i] = paths[i].steps();
    cf.offsets[i] = cols;
    cols += cf.lengths[i];
  }
  cf.obs.resize(batch.obs_dim, cols);
  cf.g.resize(cols);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < cf.lengths[i]; ++k) {
      const int c = cf.offsets[i] + k;
      const Observation& o = paths[i].obs[k];
      for (int r = 0; r < batch.obs_dim; ++r) cf.obs(r, c) = o[r];
      cf.g[c] = paths[i].g[k + 1];
    }
  }
  return cf;
}

std::vector<double> counterfactual_values(const CounterfactualBatch& cf,
                                          const TrajectoryBatch& batch,
                                          std::span<const double> critic_mu,
                                          const EstimatorConfig& cfg) {
  if (critic_mu.size() != cf.g.size()) {
    throw std::invalid_argument("counterfactual_values: one critic value per branch state");
  }
  const int n = static_cast<int>(cf.lengths.size());
  std::vector<double> out(n);
  std::vector<double> g;
  for (int i = 0; i < n; ++i) {
    const int len = cf.lengths[i];
    if (len == 0) {
      out[i] = batch.g[i];
      continue;
    }
    const std::size_t off = static_cast<std::size_t>(cf.offsets[i]);
    g.assign(1, batch.g[i]);
    g.insert(g.end(), cf.g.begin() + off, cf.g.begin() + off + len - 1);
    out[i] = window_value(g, critic_mu.subspan(off, len), cfg);
  }
  return out;
}

std::vector<double> learner_window_values(const TrajectoryBatch& batch,
                                          std::span<const int> lengths,
                                          std::span<const double> critic_pi_next,
                                          const EstimatorConfig& cfg) {
  const int n = batch.size();
  if (static_cast<int>(lengths.size()) != n || static_cast<int>(critic_pi_next.size()) != n) {
    throw std::invalid_argument("learner_window_values: size mismatch");
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int len = lengths[i];
    if (len == 0) {
      out[i] = batch.g[i];
      continue;
    }
    out[i] = window_value({batch.g.data() + i, static_cast<std::size_t>(len)},
                          critic_pi_next.subspan(i, len), cfg);
  }
  return out;
}

double discounted_max(std::span<const double> g, double gamma) {
  if (g.empty()) throw std::invalid_argument("discounted_max: empty sequence");
  double best = g.back();
  for (std::size_t k = g.size() - 1; k-- > 0;) best = std::max(g[k], gamma * best);
  return best;
}

EpisodeHarm episode_harm(const Environment& env,
                         std::span<const EnvState> learner_states,
                         std::span<const NoiseRecord> noise_plan, double gamma) {
  if (learner_states.empty()) throw std::invalid_argument("episode_harm: empty episode");
  const std::size_t T = learner_states.size() - 1;
  std::vector<double> g(T + 1);
  for (std::size_t t = 0; t <= T; ++t) g[t] = env.constraint(learner_states[t]);
  // Learner's worst discounted outcome from each state onwards.
  std::vector<double> learner(T + 1);
  learner[T] = g[T];
  for (std::size_t t = T; t-- > 0;) learner[t] = std::max(g[t], gamma * learner[t + 1]);

  // mu's discounted worst outcome from every learner state, filled from the
  // end. A branch that lands exactly on a later learner state follows that
  // state's branch from there on (same state, same noise), so its tail is
  // reused; the backward max then sees the same sequence and gives the same
  // bits as a full simulation.
  std::vector<double> branch(T);
  std::vector<double> prefix;
  for (std::size_t t = T; t-- > 0;) {
    const EnvState& s = learner_states[t];
    const int remaining = env.horizon() - s.step;
    if (remaining < 0 || static_cast<int>(noise_plan.size()) < s.step + remaining) {
      throw std::invalid_argument("episode_harm: noise plan shorter than the horizon");
    }
    prefix.assign(1, g[t]);
    EnvState b = s;
    std::size_t j = t;
    bool joined = false;
    while (!b.done) {
      Transition tr = replay_step(env, b, env.default_action(b),
                                  noise_plan[static_cast<std::size_t>(b.step)]);
      ++j;
      if (j < T && tr.next == learner_states[j]) {
        joined = true;
        break;
      }
      prefix.push_back(tr.g);
      b = std::move(tr.next);
    }
    double best = joined ? gamma * branch[j] : prefix.back();
    if (joined) best = std::max(prefix.back(), best);
    for (std::size_t k = prefix.size() - 1; k-- > 0;) best = std::max(prefix[k], gamma * best);
    branch[t] = best;
  }

  EpisodeHarm out;
  out.per_state.resize(T);
  double discount = 1.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double h = harm_base(learner[t], branch[t]);
    out.per_state[t] = h;
    out.episode = std::max(out.episode, discount * h);
    discount *= gamma;
  }
  return out;
}

double mean_relu(std::span<const double> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("mean_relu: no outcomes");
  double sum = 0.0;
  for (double v : outcomes) sum += relu(v);
  return sum / static_cast<double>(outcomes.size());
}

double estimate_default_threshold(const Environment& env, const Formulation& form,
                                  Rng& rng, int n_rollouts, double gamma) {
  if (n_rollouts < 1) throw std::invalid_argument("threshold estimate needs n_rollouts >= 1");
  std::vector<double> outcomes(n_rollouts);
  std::vector<double> per_state;
  for (int r = 0; r < n_rollouts; ++r) {
    EnvState s = env.sample_initial(form.regime, rng);
    per_state.assign(1, form.apply(env.constraint(s)));
    while (!s.done) {
      RecordedStep rs = step_recorded(env, s, env.default_action(s), rng);
      per_state.push_back(form.apply(rs.transition.g));
      s = std::move(rs.transition.next);
    }
    outcomes[r] = aggregate(form, per_state, gamma);
  }
  return mean_relu(outcomes);
}

}  // namespace cfharm
