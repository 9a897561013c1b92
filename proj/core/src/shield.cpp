#include "cfharm/shield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfharm/counterfactual.hpp"

namespace cfharm {

CriticFn model_critic(const ActorCritic& model, Head head) {
  return [&model, head](std::span<const EnvState>, const Matrix& obs) {
    return model.value(head, obs);
  };
}

CriticFn rollout_critic(const Environment& env,
                        std::function<Action(const EnvState&)> policy, double gamma) {
  return [&env, policy = std::move(policy), gamma](std::span<const EnvState> states,
                                                   const Matrix&) {
    const NoiseRecord zero{std::vector<double>(env.noise_dim(), 0.0)};
    Vector out(static_cast<Eigen::Index>(states.size()));
    std::vector<double> g;
    for (std::size_t i = 0; i < states.size(); ++i) {
      EnvState s = states[i];
      g.assign(1, env.constraint(s));
      while (!s.done) {
        Transition tr = env.transition(s, policy(s), zero);
        g.push_back(tr.g);
        s = std::move(tr.next);
      }
      out[static_cast<Eigen::Index>(i)] = discounted_max(g, gamma);
    }
    return out;
  };
}

ShieldMode parse_shield_mode(std::string_view name) {
  if (name == "none") return ShieldMode::kNone;
  if (name == "explicit") return ShieldMode::kExplicit;
  if (name == "implicit") return ShieldMode::kImplicit;
  throw std::invalid_argument("unknown shield mode: " + std::string(name));
}

void ShieldConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("shield needs at least one sample");
  if (n_steps < 1) throw std::invalid_argument("shield needs N >= 1");
  if (directions < 1) throw std::invalid_argument("shield needs at least one direction");
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("shield radii must be positive");
  }
}

HarmDiscriminator::HarmDiscriminator(const Environment& env, BatchPolicy& learner,
                                     CriticFn v_pi, CriticFn v_mu, EstimatorConfig est,
                                     int n_steps, int samples)
    : env_(env),
      learner_(learner),
      v_pi_(std::move(v_pi)),
      v_mu_(std::move(v_mu)),
      est_(est),
      n_steps_(n_steps),
      samples_(samples) {
  if (n_steps_ < 1 || samples_ < 1) {
    throw std::invalid_argument("discriminator needs N >= 1 and at least one sample");
  }
}

namespace {

double path_value(const CriticFn& critic, const std::vector<EnvState>& states,
                  const std::vector<Observation>& obs, const std::vector<double>& g,
                  int obs_dim, const EstimatorConfig& est) {
  const int n = static_cast<int>(states.size()) - 1;
  if (n == 0) return g.front();
  const std::span<const EnvState> tail(states.data() + 1, static_cast<std::size_t>(n));
  const Vector v = critic(tail, observations_to_matrix(obs, obs_dim));
  return window_value({g.data(), static_cast<std::size_t>(n)},
                      {v.data(), static_cast<std::size_t>(n)}, est);
}

}  // namespace

double HarmDiscriminator::branch_harm(const EnvState& state, const Action& action,
                                      std::span<const NoiseRecord> noises,
                                      Rng& policy_rng) const {
  if (static_cast<int>(noises.size()) < n_steps_) {
    throw std::invalid_argument("branch_harm: not enough noise records");
  }
  std::vector<EnvState> states{state};
  std::vector<Observation> obs;
  std::vector<double> g{env_.constraint(state)};
  Action a = action;
  Matrix actions;
  Vector log_probs;
  for (int k = 0; k < n_steps_ && !states.back().done; ++k) {
    if (k > 0) {
      learner_.act({&states.back(), 1}, observations_to_matrix({&obs.back(), 1}, env_.obs_dim()),
                   policy_rng, actions, log_probs);
      a.assign(actions.col(0).data(), actions.col(0).data() + actions.rows());
    }
    Transition tr = replay_step(env_, states.back(), a, noises[static_cast<std::size_t>(k)]);
    g.push_back(tr.g);
    obs.push_back(std::move(tr.obs));
    states.push_back(std::move(tr.next));
  }
  const double v_pi = path_value(v_pi_, states, obs, g, env_.obs_dim(), est_);
  const CounterfactualPath mu = simulate_counterfactual(env_, state, noises, n_steps_);
  const double v_mu = path_value(v_mu_, mu.states, mu.obs, mu.g, env_.obs_dim(), est_);
  return harm_base(v_pi, v_mu);
}

double HarmDiscriminator::operator()(const EnvState& state, const Action& action,
                                     std::uint64_t seed) const {
  std::vector<NoiseRecord> noises(n_steps_);
  double sum = 0.0;
  for (int i = 0; i < samples_; ++i) {
    Rng noise_rng = derive_rng(seed, static_cast<std::uint64_t>(i), 0xd15c);
    for (NoiseRecord& n : noises) n = env_.draw_noise(noise_rng);
    Rng policy_rng = derive_rng(seed, static_cast<std::uint64_t>(i), 0xd15d);
    sum += branch_harm(state, action, noises, policy_rng);
  }
  return sum / samples_;
}

ShieldDecision explicit_shield(const Environment& env, const EnvState& state,
                               const Action& proposed, const HarmDiscriminator& d,
                               const ShieldConfig& cfg, std::uint64_t seed) {
  ShieldDecision out;
  out.value = d(state, proposed, seed);
  if (out.value > cfg.threshold) {
    out.action = env.default_action(state);
    out.replaced = true;
  } else {
    out.action = proposed;
  }
  return out;
}

std::vector<Action> shield_offsets(int action_dim, const ShieldConfig& cfg) {
  cfg.validate();
  std::vector<Action> dirs;
  if (action_dim == 2) {
    for (int k = 0; k < cfg.directions; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / cfg.directions;
      dirs.push_back({std::cos(angle), std::sin(angle)});
    }
  } else {
    for (int axis = 0; axis < action_dim; ++axis) {
      for (double sgn : {1.0, -1.0}) {
        Action u(action_dim, 0.0);
        u[axis] = sgn;
        dirs.push_back(u);
      }
    }
  }
  std::vector<double> radii = cfg.radii;
  std::sort(radii.begin(), radii.end());
  std::vector<Action> out{Action(action_dim, 0.0)};
  for (double r : radii) {
    for (const Action& u : dirs) {
      Action a(u);
      for (double& x : a) x *= r;
      out.push_back(a);
    }
  }
  return out;
}

ShieldDecision implicit_shield(const EnvState& state, const Action& proposed,
                               const HarmDiscriminator& d, const ShieldConfig& cfg,
                               std::uint64_t seed) {
  const std::vector<Action> offsets = shield_offsets(static_cast<int>(proposed.size()), cfg);
  ShieldDecision out;
  out.candidates.reserve(offsets.size());
  out.candidate_values.reserve(offsets.size());
  for (const Action& off : offsets) {
    Action a = proposed;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += off[k];
    out.candidate_values.push_back(d(state, a, seed));
    out.candidates.push_back(std::move(a));
  }
  std::size_t pick = out.candidates.size();
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    if (out.candidate_values[i] <= cfg.threshold) {
      pick = i;
      break;
    }
  }
  if (pick == out.candidates.size()) {
    out.feasible = false;
    pick = static_cast<std::size_t>(
        std::min_element(out.candidate_values.begin(), out.candidate_values.end()) -
        out.candidate_values.begin());
  }
  out.action = out.candidates[pick];
  out.value = out.candidate_values[pick];
  out.replaced = pick != 0;
  return out;
}

ShieldedPolicy::ShieldedPolicy(const Environment& env, BatchPolicy& learner,
                               const HarmDiscriminator& d, ShieldConfig cfg)
    : env_(env), learner_(learner), d_(d), cfg_(std::move(cfg)) {
  cfg_.validate();
}

void ShieldedPolicy::act(std::span<const EnvState> states, const Matrix& obs, Rng& rng,
                         Matrix& actions, Vector& log_probs) {
  learner_.act(states, obs, rng, actions, log_probs);
  if (cfg_.mode == ShieldMode::kNone) return;
  for (Eigen::Index j = 0; j < actions.cols(); ++j) {
    const std::uint64_t seed = rng();
    const EnvState& s = states[static_cast<std::size_t>(j)];
    const Action proposed(actions.col(j).data(), actions.col(j).data() + actions.rows());
    const ShieldDecision dec = cfg_.mode == ShieldMode::kExplicit
                                   ? explicit_shield(env_, s, proposed, d_, cfg_, seed)
                                   : implicit_shield(s, proposed, d_, cfg_, seed);
    ++stats_.decisions;
    if (dec.replaced) ++stats_.replaced;
    if (!dec.feasible) ++stats_.infeasible;
    for (Eigen::Index k = 0; k < actions.rows(); ++k) actions(k, j) = dec.action[k];
    if (on_decision) on_decision(s, proposed, dec);
  }
}

}  // namespace cfharm
