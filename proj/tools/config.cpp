#include "config.hpp"

#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cfharm::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not a number: " + v);
  return d;
}

long parse_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long n = 0;
  try {
    n = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not an integer: " + v);
  return n;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": not a boolean: " + v);
}

std::vector<int> parse_widths(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(static_cast<int>(parse_long(key, part)));
  if (out.empty()) throw std::invalid_argument(key + ": empty layer list");
  for (int w : out) {
    if (w < 1) throw std::invalid_argument(key + ": layer widths must be positive");
  }
  return out;
}

std::string widths(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string& name, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define CFHARM_INT(sec, k, expr)                                                             \
  Field {                                                                                    \
    sec, #k, [](RunConfig& c, const std::string& n, const std::string& v) {                  \
      expr = static_cast<std::remove_reference_t<decltype(expr)>>(parse_long(n, v));         \
    },                                                                                       \
        [](const RunConfig& c) { return std::to_string(expr); }                              \
  }
#define CFHARM_REAL(sec, k, expr)                                                                \
  Field {                                                                                        \
    sec, #k, [](RunConfig& c, const std::string& n, const std::string& v) {                      \
      expr = parse_double(n, v);                                                                 \
    },                                                                                           \
        [](const RunConfig& c) { return num(expr); }                                             \
  }
#define CFHARM_BOOL(sec, k, expr)                                                                \
  Field {                                                                                        \
    sec, #k, [](RunConfig& c, const std::string& n, const std::string& v) {                      \
      expr = parse_bool(n, v);                                                                   \
    },                                                                                           \
        [](const RunConfig& c) { return std::string(expr ? "true" : "false"); }                  \
  }

// train.env, train.formulation and train.regime are handled separately:
// they choose defaults for everything else.
const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      CFHARM_BOOL("train", allow_regime_override, c.train.allow_regime_override),
      CFHARM_INT("train", envs, c.train.envs),
      CFHARM_INT("train", updates, c.train.updates),
      CFHARM_INT("train", steps, c.train.steps),
      CFHARM_INT("train", cf_steps, c.train.cf_steps),
      CFHARM_INT("train", minibatches, c.train.minibatches),
      CFHARM_INT("train", epochs, c.train.epochs),
      CFHARM_INT("train", seed, c.train.seed),
      CFHARM_INT("train", threshold_rollouts, c.train.threshold_rollouts),
      CFHARM_INT("train", threshold_refresh, c.train.threshold_refresh),
      CFHARM_INT("train", checkpoint_every, c.train.checkpoint_every),
      CFHARM_INT("train", selection_window, c.train.selection_window),
      CFHARM_INT("train", baseline_states, c.baseline_states),
      CFHARM_BOOL("train", normalize_reward_adv, c.train.normalize_reward_adv),
      Field{"env", "grid_path",
            [](RunConfig& c, const std::string&, const std::string& v) { c.train.grid_path = v; },
            [](const RunConfig& c) { return c.train.grid_path; }},
      CFHARM_REAL("ppo", clip, c.train.loss.clip),
      CFHARM_REAL("ppo", entropy_coef, c.train.loss.entropy_coef),
      CFHARM_BOOL("ppo", clip_combined, c.train.loss.clip_combined),
      CFHARM_REAL("ppo", critic_coef, c.train.loss.critic_coef),
      CFHARM_REAL("ppo", lr, c.train.adam.lr),
      CFHARM_REAL("ppo", beta1, c.train.adam.beta1),
      CFHARM_REAL("ppo", beta2, c.train.adam.beta2),
      CFHARM_REAL("ppo", adam_eps, c.train.adam.eps),
      CFHARM_REAL("ppo", max_grad, c.train.max_grad),
      CFHARM_REAL("estimator", gamma, c.train.est.gamma),
      CFHARM_REAL("estimator", lambda, c.train.est.lambda),
      CFHARM_BOOL("estimator", harm_return_minus, c.train.est.harm_return_minus),
      CFHARM_REAL("lagrange", init, c.train.lagrange_init),
      CFHARM_REAL("lagrange", base_lr, c.train.schedule.base_lr),
      CFHARM_REAL("lagrange", hold, c.train.schedule.hold),
      CFHARM_REAL("lagrange", final_lr, c.train.schedule.final_lr),
      CFHARM_REAL("lagrange", ramp_end, c.train.schedule.ramp_end),
      CFHARM_REAL("lagrange", reference_total, c.train.schedule.reference_total),
      Field{"model", "hidden",
            [](RunConfig& c, const std::string& n, const std::string& v) {
              c.train.hidden = parse_widths(n, v);
            },
            [](const RunConfig& c) { return widths(c.train.hidden); }},
      Field{"model", "encoder_hidden",
            [](RunConfig& c, const std::string& n, const std::string& v) {
              c.train.encoder_hidden = parse_widths(n, v);
            },
            [](const RunConfig& c) { return widths(c.train.encoder_hidden); }},
      CFHARM_BOOL("model", use_encoder, c.train.use_encoder),
  };
  return f;
}

#undef CFHARM_INT
#undef CFHARM_REAL
#undef CFHARM_BOOL

std::string lookup(const Sections& s, const std::string& sec, const std::string& key,
                   const std::string& fallback) {
  const auto a = s.find(sec);
  if (a == s.end()) return fallback;
  const auto b = a->second.find(key);
  return b == a->second.end() ? fallback : b->second;
}

}  // namespace

Sections read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("cannot read config " + path + ": " + e.message());
  }
  Sections s;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw std::invalid_argument("config " + path + ": key '" + section +
                                  "' outside a [section]");
    }
    for (const auto& [key, value] : body) s[section][key] = value.data();
  }
  return s;
}

void apply_override(Sections& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 ||
      dot + 1 == eq) {
    throw std::invalid_argument("expected section.key=value, got '" + assignment + "'");
  }
  s[assignment.substr(0, dot)][assignment.substr(dot + 1, eq - dot - 1)] =
      assignment.substr(eq + 1);
}

RunConfig build_config(const Sections& s) {
  RunConfig c;
  c.train = TrainConfig::defaults(lookup(s, "train", "env", "rover"));
  c.train.formulation = lookup(s, "train", "formulation", c.train.formulation);
  const Formulation& form = parse_formulation(c.train.formulation);
  const std::string regime = lookup(s, "train", "regime", "");
  c.train.regime = regime.empty() ? form.regime : parse_init_regime(regime);

  for (const auto& [section, body] : s) {
    for (const auto& [key, value] : body) {
      if (section == "train" && (key == "env" || key == "formulation" || key == "regime")) {
        continue;
      }
      bool known = false;
      for (const Field& f : fields()) {
        if (section == f.section && key == f.key) {
          f.set(c, section + "." + key, value);
          known = true;
          break;
        }
      }
      if (!known) throw std::invalid_argument("unknown config key " + section + "." + key);
    }
  }
  if (c.baseline_states < 1) throw std::invalid_argument("baseline_states must be >= 1");
  c.train.validate();
  return c;
}

Sections snapshot(const RunConfig& c) {
  Sections s;
  s["train"]["env"] = c.train.env;
  s["train"]["formulation"] = c.train.formulation;
  s["train"]["regime"] = std::string(to_string(c.train.regime));
  for (const Field& f : fields()) s[f.section][f.key] = f.get(c);
  return s;
}

nlohmann::json to_json(const Sections& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, body] : s) {
    for (const auto& [key, value] : body) j[section][key] = value;
  }
  return j;
}

Sections from_json(const nlohmann::json& j) {
  Sections s;
  for (const auto& [section, body] : j.items()) {
    for (const auto& [key, value] : body.items()) s[section][key] = value.get<std::string>();
  }
  return s;
}

}  // namespace cfharm::cli
