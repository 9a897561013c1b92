// cfharm: train, evaluate and plot counterfactual-harm constrained policies.
//
// Exit codes: 0 ok, 1 usage, 2 runtime failure, 3 numeric abort.

#include <cstdio>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"

#include "cfharm/common.hpp"
#include "commands.hpp"

using namespace cfharm::cli;

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual-harm constrained RL"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a policy from an INI config");
  auto* t_cfg = t->add_option("--config", train.config, "INI config file")->check(CLI::ExistingFile);
  auto* t_man = t->add_option("--from-manifest", train.from_manifest,
                              "Rerun the training recorded in a manifest")
                    ->check(CLI::ExistingFile);
  auto* t_set = t->add_option("--set", train.sets, "Override a setting: section.key=value");
  auto* t_env = t->add_option("--env", train.env, "rover, trailer or wall");
  auto* t_form = t->add_option("--formulation", train.formulation,
                               "DBS IC MC_0 CC_0 MC CC CCATE CCATE_C HARM HARM_C");
  auto* t_upd = t->add_option("--updates", train.updates, "Number of updates")->check(CLI::PositiveNumber);
  auto* t_envs = t->add_option("--envs", train.envs, "Parallel environments")->check(CLI::PositiveNumber);
  auto* t_seed = t->add_option("--seed", train.seed, "Root seed")->check(CLI::NonNegativeNumber);
  auto* t_ovr = t->add_flag("--allow-regime-override", train.allow_regime_override,
                            "Accept an initial-state regime the formulation does not use");
  t->add_option("--out", train.out, "Output directory (default $CFHARM_OUT/<run>)");
  t->add_flag("--force", train.force, "Overwrite an existing run directory");
  t->add_option("--log-every", train.log_every, "Progress line every N updates (0: quiet)");
  t_cfg->excludes(t_man);
  for (CLI::Option* o : {t_set, t_env, t_form, t_upd, t_envs, t_seed, t_ovr}) o->excludes(t_man);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Viability evaluation of a checkpoint or built-in policy");
  auto* e_ck = e->add_option("checkpoint,--checkpoint", eval.checkpoint, "Checkpoint file")
                   ->check(CLI::ExistingFile);
  auto* e_man = e->add_option("--from-manifest", eval.from_manifest,
                              "Rerun the evaluation recorded in a manifest")
                    ->check(CLI::ExistingFile);
  std::vector<CLI::Option*> e_opts{
      e_ck,
      e->add_option("--policy", eval.policy, "mu or reckless instead of a checkpoint"),
      e->add_option("--env", eval.env, "Environment (must match the checkpoint)"),
      e->add_option("--grid", eval.grid, "Occupancy grid file (trailer)"),
      e->add_option("--n-states", eval.n_states, "Initial states")->check(CLI::PositiveNumber),
      e->add_option("--seed", eval.seed, "Evaluation seed")->check(CLI::NonNegativeNumber),
      e->add_option("--regime", eval.regime, "feasible or wide"),
      e->add_option("--gamma", eval.gamma, "Discount for harm"),
      e->add_option("--shield", eval.shield, "none, explicit or implicit"),
      e->add_option("--shield-samples", eval.shield_samples, "Monte-Carlo samples per decision")
          ->check(CLI::PositiveNumber),
      e->add_option("--shield-steps", eval.shield_steps, "Counterfactual steps N"),
      e->add_option("--shield-threshold", eval.shield_threshold, "Harm threshold"),
      e->add_option("--critic", eval.critic, "Shield critics: model or rollout"),
  };
  for (CLI::Option* o : e_opts) o->excludes(e_man);
  e->add_option("--out", eval.out, "Output directory (default $CFHARM_OUT/<run>)");
  e->add_flag("--force", eval.force, "Overwrite an existing output directory");

  BaselineArgs base;
  auto* b = app.add_subcommand("baseline", "Rollout statistics of the default policy mu");
  auto* b_man = b->add_option("--from-manifest", base.from_manifest,
                              "Rerun the baseline recorded in a manifest")
                    ->check(CLI::ExistingFile);
  for (CLI::Option* o : {
           b->add_option("--env", base.env, "rover, trailer or wall"),
           b->add_option("--grid", base.grid, "Occupancy grid file (trailer)"),
           b->add_option("--n-states", base.n_states, "Initial states")->check(CLI::PositiveNumber),
           b->add_option("--seed", base.seed, "Seed")->check(CLI::NonNegativeNumber),
           b->add_option("--regime", base.regime, "feasible or wide"),
           b->add_option("--gamma", base.gamma, "Discount"),
       }) {
    o->excludes(b_man);
  }
  b->add_option("--out", base.out, "Output directory (default $CFHARM_OUT/<run>)");
  b->add_flag("--force", base.force, "Overwrite an existing output directory");

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "SVG curves from a train or eval directory");
  p->add_option("dir", plot.dir, "Run directory")->required();
  p->add_option("--out", plot.out, "Where to write (default: the run directory)");
  p->add_option("--window", plot.window, "Updates pooled per curve point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (t->parsed()) {
      if (train.config.empty() && train.from_manifest.empty() && train.env.empty() &&
          train.sets.empty()) {
        throw std::invalid_argument("train needs --config, --from-manifest or --env");
      }
      return run_train(train);
    }
    if (e->parsed()) return run_eval(eval);
    if (b->parsed()) return run_baseline(base);
    return run_plot(plot);
  } catch (const cfharm::NumericError& err) {
    std::fprintf(stderr, "numeric abort: %s\n", err.what());
    return kNumeric;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kRuntime;
  }
}
