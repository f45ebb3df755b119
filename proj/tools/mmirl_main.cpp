// mmirl: multi-mode inverse reinforcement learning lab for process control.
//
// Subcommands wire configs, environments, experts, trainers and evaluators
// together. Every training/eval run writes into a fresh run directory named
// <timestamp>_<confighash> containing the effective config echo, metrics,
// checkpoints and rendered artifacts.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmirl/airl.hpp"
#include "mmirl/config.hpp"
#include "mmirl/csv.hpp"
#include "mmirl/dataset_io.hpp"
#include "mmirl/demos.hpp"
#include "mmirl/eval.hpp"
#include "mmirl/expert_train.hpp"
#include "mmirl/metrics.hpp"
#include "mmirl/pi_controller.hpp"
#include "mmirl/svg.hpp"

namespace fs = std::filesystem;
using namespace mmirl;

namespace {

struct GlobalOpts {
  std::string config_path;
  int workers_override = 0;
};

RunConfig load_effective_config(const GlobalOpts& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (const char* env_seed = std::getenv("MMIRL_SEED")) {
    cfg.training.seed = static_cast<std::uint64_t>(std::stoull(env_seed));
  }
  if (g.workers_override > 0) cfg.training.workers = g.workers_override;
  validate_config(cfg);
  return cfg;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// Creates <out>/<timestamp>_<confighash>/ and drops the config echo in it.
fs::path make_run_dir(const std::string& out, const RunConfig& cfg) {
  fs::create_directories(out);
  std::string base = utc_stamp() + "_" + config_hash(cfg);
  fs::path dir = fs::path(out) / base;
  for (int suffix = 1; fs::exists(dir); ++suffix) dir = fs::path(out) / (base + "-" + std::to_string(suffix));
  fs::create_directories(dir);
  std::ofstream echo(dir / "effective_config.ini");
  echo << config_echo(cfg);
  std::cout << "run_dir: " << dir.string() << "\n";
  return dir;
}

std::string find_checkpoint(const std::string& path) {
  if (fs::is_directory(path)) {
    const fs::path candidate = fs::path(path) / "checkpoint.mmc";
    if (!fs::exists(candidate))
      throw std::runtime_error("no checkpoint.mmc under '" + path + "'");
    return candidate.string();
  }
  return path;
}

// --- controllers for `simulate` ----------------------------------------

struct SimController {
  std::function<std::vector<double>(const Env&, int step)> act;
  std::string name;
};

SimController make_controller(const std::string& kind, const RunConfig& cfg, const Env& env, int mode) {
  if (kind == "pi") {
    if (env.spec().id != "cstr")
      throw std::runtime_error("controller 'pi' requires the cstr environment");
    auto pi = std::make_shared<PiController>(cfg.env.pi_kc, cfg.env.pi_tau_i, cfg.env.pi_u0);
    const double dt = env.spec().dt;
    return {[pi, dt](const Env& e, int) {
              const auto raw = e.observe_raw();
              return std::vector<double>{pi->control(-raw[4], dt)};
            },
            "pi"};
  }
  if (kind.rfind("constant:", 0) == 0) {
    const std::vector<double> u = detail::parse_list(kind.substr(9), "controller");
    std::vector<double> action = u;
    if (action.size() == 1 && env.spec().action_dim > 1)
      action.assign(static_cast<std::size_t>(env.spec().action_dim), u[0]);
    if (action.size() != static_cast<std::size_t>(env.spec().action_dim))
      throw std::runtime_error("controller 'constant:' action width mismatch");
    return {[action](const Env&, int) { return action; }, "constant"};
  }
  if (kind.rfind("checkpoint:", 0) == 0) {
    const Checkpoint ckpt = load_checkpoint(find_checkpoint(kind.substr(11)));
    auto bundle = std::make_shared<IrlBundle>(load_irl_bundle(cfg, ckpt));
    const int m = env.spec().mode_count;
    return {[bundle, m, mode](const Env& e, int) {
              const auto aug = augment_observation(e.observe(), mode, m);
              return bundle->agent->policy().mean_action(aug);
            },
            "checkpoint"};
  }
  throw std::runtime_error("unknown controller '" + kind + "' (expected pi|constant:V|checkpoint:PATH)");
}

void write_trace(const fs::path& dir, const RunConfig& cfg, const Env& env,
                 const std::vector<std::vector<double>>& states,
                 const std::vector<std::vector<double>>& actions, const std::vector<double>& rewards,
                 int mode) {
  const EnvSpec& spec = env.spec();
  std::vector<std::string> header = {"step", "time"};
  if (spec.id == "bioreactor") {
    header.insert(header.end(), {"y1", "y2", "u1", "u2", "reward"});
  } else {
    header.insert(header.end(), {"ca", "t", "tc", "valve_state", "setpoint_error", "valve", "reward"});
  }
  CsvWriter csv((dir / "trace.csv").string(), header);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    std::vector<double> row = {static_cast<double>(t), static_cast<double>(t) * spec.dt};
    row.insert(row.end(), states[t].begin(), states[t].end());
    row.insert(row.end(), actions[t].begin(), actions[t].end());
    row.push_back(rewards[t]);
    csv.row(row);
  }

  // two stacked panels: process outputs on top, actions below
  std::vector<double> time(actions.size());
  for (std::size_t t = 0; t < time.size(); ++t) time[t] = static_cast<double>(t) * spec.dt;
  SvgPanel outputs, inputs;
  if (spec.id == "bioreactor") {
    SvgSeries y1{"y1 (reactant)", time, {}}, y2{"y2 (product)", time, {}};
    for (const auto& s : states) {
      y1.y.push_back(s[0]);
      y2.y.push_back(s[1]);
    }
    outputs.y_label = "concentration";
    outputs.series = {y1, y2};
    SvgSeries u1{"u1 (light)", time, {}}, u2{"u2 (inflow)", time, {}};
    for (const auto& a : actions) {
      u1.y.push_back(a[0]);
      u2.y.push_back(a[1]);
    }
    inputs.y_label = "action";
    inputs.series = {u1, u2};
  } else {
    SvgSeries temp{"T", time, {}}, setp{"T_set", time, {}};
    const double sp = cfg.modes.cstr_setpoint[static_cast<std::size_t>(mode)];
    for (const auto& s : states) {
      temp.y.push_back(s[1]);
      setp.y.push_back(sp);
    }
    outputs.y_label = "temperature [C]";
    outputs.series = {temp, setp};
    SvgSeries valve{"valve", time, {}};
    for (const auto& a : actions) valve.y.push_back(a[0]);
    inputs.y_label = "valve [%]";
    inputs.series = {valve};
  }
  const std::string title = spec.id + " trace (mode " + std::to_string(mode) + ")";
  const std::vector<SvgPanel> panels = {outputs, inputs};
  write_svg_chart((dir / "trace.svg").string(), title,
                  spec.id == "bioreactor" ? "normalized batch time" : "time [s]", panels);
}

// --- subcommand bodies ---------------------------------------------------

int cmd_simulate(const GlobalOpts& g, const std::string& env_id, int mode,
                 const std::string& controller, const std::string& out) {
  RunConfig cfg = load_effective_config(g);
  if (!env_id.empty()) cfg.env.id = env_id;
  validate_config(cfg);
  auto env = make_env(cfg);
  if (mode < 0 || mode >= env->spec().mode_count)
    throw std::runtime_error("mode " + std::to_string(mode) + " out of range");
  const fs::path dir = make_run_dir(out, cfg);

  SimController ctrl = make_controller(controller, cfg, *env, mode);
  env->reset(mode, seed_chain(cfg.training.seed, 0x51u));
  std::vector<std::vector<double>> states, actions;
  std::vector<double> rewards;
  int step = 0;
  while (!env->done()) {
    states.push_back(env->observe_raw());
    const auto u = clip_action(ctrl.act(*env, step), env->spec());
    const StepResult res = env->step(u);
    if (res.aborted) throw std::runtime_error("simulation aborted: " + res.abort_reason);
    actions.push_back(u);
    rewards.push_back(res.reward);
    ++step;
  }
  write_trace(dir, cfg, *env, states, actions, rewards, mode);
  double total = 0.0;
  for (double r : rewards) total += r;
  std::printf("simulated %d steps with controller %s, return %.6g\n", step, ctrl.name.c_str(), total);
  return 0;
}

int cmd_train_expert(const GlobalOpts& g, const std::string& env_id, const std::string& out,
                     const std::string& resume) {
  RunConfig cfg = load_effective_config(g);
  if (!env_id.empty()) cfg.env.id = env_id;
  validate_config(cfg);
  const fs::path dir = make_run_dir(out, cfg);

  ExpertTrainer trainer(cfg);
  if (!resume.empty()) trainer.restore(load_checkpoint(find_checkpoint(resume)));
  MetricsWriter metrics((dir / "metrics.jsonl").string());
  const std::string ckpt_path = (dir / "checkpoint.mmc").string();
  for (int it = trainer.iteration(); it < cfg.training.iterations; it = trainer.iteration()) {
    const auto stats = trainer.train_iteration();
    metrics.append(trainer.metrics_record(stats));
    if (cfg.training.checkpoint_every > 0 && (it + 1) % cfg.training.checkpoint_every == 0)
      save_checkpoint(ckpt_path, trainer.make_checkpoint());
    if ((it + 1) % 10 == 0 || it + 1 == cfg.training.iterations)
      std::printf("iter %4d  return %8.4f +- %.4f  entropy %6.3f\n", it + 1, stats.return_mean,
                  stats.return_std, stats.entropy);
  }
  save_checkpoint(ckpt_path, trainer.make_checkpoint());
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_gen_demos(const GlobalOpts& g, const std::string& expert, int per_mode,
                  const std::string& out) {
  RunConfig cfg = load_effective_config(g);
  auto env = make_env(cfg);

  std::function<std::unique_ptr<Expert>()> make_expert;
  std::unique_ptr<PolicyAgent> agent;  // keeps checkpoint policy alive
  if (expert == "pi") {
    if (env->spec().id != "cstr") throw std::runtime_error("expert 'pi' requires the cstr environment");
    const double dt = env->spec().dt;
    const double kc = cfg.env.pi_kc, ti = cfg.env.pi_tau_i, u0 = cfg.env.pi_u0;
    make_expert = [kc, ti, u0, dt] { return std::make_unique<PiExpert>(kc, ti, u0, dt); };
  } else if (expert.rfind("checkpoint:", 0) == 0) {
    const Checkpoint ckpt = load_checkpoint(find_checkpoint(expert.substr(11)));
    agent = load_policy_agent(cfg, ckpt);
    const GaussianPolicy* policy = &agent->policy();
    const int m = env->spec().mode_count;
    make_expert = [policy, m] { return std::make_unique<PolicyExpert>(*policy, m); };
  } else {
    throw std::runtime_error("unknown expert '" + expert + "' (expected pi|checkpoint:PATH)");
  }

  DemoConfig dc;
  dc.trajectories_per_mode = per_mode;
  dc.shuffle_seed = seed_chain(cfg.training.seed, 0xDE);
  dc.rollout_seed = seed_chain(cfg.training.seed, 0xDF);
  dc.workers = cfg.training.workers;
  const DemoResult result = generate_demos(*env, make_expert, dc);
  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_dataset(out, result.dataset);
  std::ofstream echo(out + ".config.ini");
  echo << config_echo(cfg);
  std::printf("wrote %zu trajectories (%d per mode x %d modes) to %s; %ld clipped actions\n",
              result.dataset.size(), per_mode, env->spec().mode_count, out.c_str(),
              result.clipped_actions);
  return 0;
}

int cmd_train_irl(const GlobalOpts& g, const std::string& demos_path, const std::string& out,
                  const std::string& resume) {
  RunConfig cfg = load_effective_config(g);
  const fs::path dir = make_run_dir(out, cfg);
  // training load path: labels stripped by construction
  std::vector<Trajectory> demos = read_training_set(demos_path);
  std::printf("loaded %zu unlabeled demonstrations from %s\n", demos.size(), demos_path.c_str());

  MtAirlTrainer trainer(cfg, std::move(demos));
  if (!resume.empty()) trainer.restore(load_checkpoint(find_checkpoint(resume)));
  MetricsWriter metrics((dir / "metrics.jsonl").string());
  const std::string ckpt_path = (dir / "checkpoint.mmc").string();
  for (int it = trainer.iteration(); it < cfg.training.iterations; it = trainer.iteration()) {
    const auto stats = trainer.train_iteration();
    metrics.append(trainer.metrics_record(stats));
    if (cfg.training.checkpoint_every > 0 && (it + 1) % cfg.training.checkpoint_every == 0)
      save_checkpoint(ckpt_path, trainer.make_checkpoint());
    if ((it + 1) % 10 == 0 || it + 1 == cfg.training.iterations)
      std::printf("iter %4d  disc %.4f (acc %.3f)  L_I %.4f  gen_ret %8.3f  true_ret %8.3f\n",
                  it + 1, stats.disc_loss, stats.disc_accuracy, stats.info_lb, stats.gen_return_est,
                  stats.true_return_mean);
  }
  save_checkpoint(ckpt_path, trainer.make_checkpoint());
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& checkpoint, int episodes, const std::string& out,
             const std::string& demos_path) {
  RunConfig cfg = load_effective_config(g);
  const fs::path dir = make_run_dir(out, cfg);
  const Checkpoint ckpt = load_checkpoint(find_checkpoint(checkpoint));
  IrlBundle bundle = load_irl_bundle(cfg, ckpt);
  auto env = make_env(cfg);
  const EnvSpec& spec = env->spec();
  const int m = spec.mode_count;

  DemoDataset demos;
  if (!demos_path.empty()) demos = read_dataset(demos_path);

  EvalReport report;
  report.terminal_metric_name = spec.id == "bioreactor" ? "terminal_y2" : "steady_abs_temp_err";

  // env mode -> conditioning z: majority vote of the inference net over
  // labeled demos; identity when unavailable
  std::vector<int> mode_to_z(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) mode_to_z[static_cast<std::size_t>(i)] = i;
  if (bundle.inference && !demos.empty()) {
    const InferenceEval ie = evaluate_inference(*bundle.inference, demos, spec);
    report.inference_accuracy = ie.assignment.accuracy;
    report.confusion = ie.confusion;
    mode_to_z = ie.assignment.mode_to_z;
  }

  const ExpertStatsPerMode expert =
      demos.empty() ? ExpertStatsPerMode{} : expert_stats(demos, spec, m);

  std::vector<PolicyEvalResult> per_mode;
  for (int mode = 0; mode < m; ++mode) {
    const int z = mode_to_z[static_cast<std::size_t>(mode)];
    PolicyEvalResult res = evaluate_policy(bundle.agent->policy(), *env, mode, z, episodes,
                                           seed_chain(cfg.training.seed, 0xE7A1, static_cast<std::uint64_t>(mode)),
                                           /*deterministic=*/true, cfg.training.workers);
    ModeReport mr;
    mr.env_mode = mode;
    mr.z = z;
    mr.learned_return_mean = res.return_mean;
    mr.learned_return_std = res.return_std;
    mr.terminal_metric = res.terminal_metric;
    if (!demos.empty() && mode < static_cast<int>(expert.return_mean.size())) {
      mr.expert_return_mean = expert.return_mean[static_cast<std::size_t>(mode)];
      mr.expert_return_std = expert.return_std[static_cast<std::size_t>(mode)];
      mr.expert_terminal_metric = expert.terminal_metric[static_cast<std::size_t>(mode)];
      if (mr.expert_return_mean != 0.0 && std::isfinite(mr.expert_return_mean))
        mr.imitation_ratio = mr.learned_return_mean / mr.expert_return_mean;
    }
    report.modes.push_back(mr);
    per_mode.push_back(std::move(res));
  }

  // report.jsonl: one record per mode
  {
    MetricsWriter w((dir / "report.jsonl").string());
    for (const auto& mr : report.modes) {
      w.append({{"env_mode", static_cast<long long>(mr.env_mode)},
                {"z", static_cast<long long>(mr.z)},
                {"learned_return_mean", mr.learned_return_mean},
                {"learned_return_std", mr.learned_return_std},
                {"expert_return_mean", mr.expert_return_mean},
                {"expert_return_std", mr.expert_return_std},
                {"imitation_ratio", mr.imitation_ratio},
                {report.terminal_metric_name, mr.terminal_metric},
                {"expert_" + report.terminal_metric_name, mr.expert_terminal_metric},
                {"inference_accuracy", report.inference_accuracy}});
    }
  }
  // report.txt
  {
    std::ofstream txt(dir / "report.txt");
    txt << "evaluation report (" << spec.id << ", " << episodes << " episodes per mode)\n";
    for (const auto& mr : report.modes) {
      txt << "mode " << mr.env_mode << " (z=" << mr.z << "): learned return " << mr.learned_return_mean
          << " +- " << mr.learned_return_std;
      if (std::isfinite(mr.expert_return_mean))
        txt << ", expert " << mr.expert_return_mean << " +- " << mr.expert_return_std
            << ", imitation ratio " << mr.imitation_ratio;
      txt << ", " << report.terminal_metric_name << " " << mr.terminal_metric << "\n";
    }
    if (std::isfinite(report.inference_accuracy))
      txt << "inference accuracy (best permutation): " << report.inference_accuracy << "\n";
  }

  // per-mode overlays: learned vs one expert demo
  for (int mode = 0; mode < m; ++mode) {
    const auto& res = per_mode[static_cast<std::size_t>(mode)];
    if (res.episodes.empty()) continue;
    const EpisodeData& ep = res.episodes[0];
    const Trajectory* demo = nullptr;
    for (const auto& rec : demos)
      if (rec.sidecar && rec.sidecar->mode_label == mode) {
        demo = &rec.traj;
        break;
      }
    std::vector<double> time(ep.length());
    for (std::size_t t = 0; t < time.size(); ++t) time[t] = static_cast<double>(t) * spec.dt;
    SvgPanel outputs, inputs;
    const int out_ch = 1;  // y2 for the bioreactor, T for the cstr
    SvgSeries learned{"learned", time, {}};
    for (const auto& o : ep.obs_raw) learned.y.push_back(o[static_cast<std::size_t>(out_ch)]);
    outputs.series.push_back(learned);
    if (demo) {
      SvgSeries exp_s{"expert", {}, {}};
      for (std::size_t t = 0; t < demo->states.size(); ++t) {
        exp_s.x.push_back(static_cast<double>(t) * spec.dt);
        exp_s.y.push_back(demo->states[t][static_cast<std::size_t>(out_ch)]);
      }
      outputs.series.push_back(exp_s);
    }
    outputs.y_label = spec.id == "bioreactor" ? "y2" : "T [C]";
    SvgSeries act{"learned action", time, {}};
    for (const auto& a : ep.actions) act.y.push_back(a[0]);
    inputs.series.push_back(act);
    if (demo) {
      SvgSeries exp_a{"expert action", {}, {}};
      for (std::size_t t = 0; t < demo->actions.size(); ++t) {
        exp_a.x.push_back(static_cast<double>(t) * spec.dt);
        exp_a.y.push_back(demo->actions[t][0]);
      }
      inputs.series.push_back(exp_a);
    }
    inputs.y_label = spec.id == "bioreactor" ? "u1" : "valve [%]";
    const std::vector<SvgPanel> panels = {outputs, inputs};
    write_svg_chart((dir / ("overlay_mode" + std::to_string(mode) + ".svg")).string(),
                    "learned vs expert (mode " + std::to_string(mode) + ")",
                    spec.id == "bioreactor" ? "normalized batch time" : "time [s]", panels);

    std::vector<std::string> header = {"step", "learned_output", "learned_action"};
    if (demo) {
      header.push_back("expert_output");
      header.push_back("expert_action");
    }
    CsvWriter csv((dir / ("overlay_mode" + std::to_string(mode) + ".csv")).string(), header);
    for (std::size_t t = 0; t < ep.length(); ++t) {
      std::vector<double> row = {static_cast<double>(t), ep.obs_raw[t][static_cast<std::size_t>(out_ch)],
                                 ep.actions[t][0]};
      if (demo) {
        const bool in_demo = t < demo->states.size();
        row.push_back(in_demo ? demo->states[t][static_cast<std::size_t>(out_ch)] : std::nan(""));
        row.push_back(in_demo ? demo->actions[t][0] : std::nan(""));
      }
      csv.row(row);
    }
  }

  for (const auto& mr : report.modes)
    std::printf("mode %d (z=%d): learned %.4f expert %.4f ratio %.3f %s %.4f\n", mr.env_mode, mr.z,
                mr.learned_return_mean, mr.expert_return_mean, mr.imitation_ratio,
                report.terminal_metric_name.c_str(), mr.terminal_metric);
  if (std::isfinite(report.inference_accuracy))
    std::printf("inference accuracy: %.4f\n", report.inference_accuracy);
  return 0;
}

int cmd_infer_mode(const GlobalOpts& g, const std::string& checkpoint, const std::string& demos_path) {
  RunConfig cfg = load_effective_config(g);
  const Checkpoint ckpt = load_checkpoint(find_checkpoint(checkpoint));
  IrlBundle bundle = load_irl_bundle(cfg, ckpt);
  if (!bundle.inference) throw std::runtime_error("checkpoint has no inference network");
  auto env = make_env(cfg);
  const DemoDataset demos = read_dataset(demos_path);
  const InferenceEval ie = evaluate_inference(*bundle.inference, demos, env->spec());

  std::printf("confusion matrix (rows: withheld label, cols: inferred z):\n");
  for (std::size_t r = 0; r < ie.confusion.size(); ++r) {
    std::printf("  label %zu:", r);
    for (long v : ie.confusion[r]) std::printf(" %6ld", v);
    std::printf("\n");
  }
  std::printf("best-permutation accuracy: %.4f\n", ie.assignment.accuracy);
  std::printf("mode -> z assignment:");
  for (std::size_t i = 0; i < ie.assignment.mode_to_z.size(); ++i)
    std::printf(" %zu->%d", i, ie.assignment.mode_to_z[i]);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-mode inverse reinforcement learning lab for process control"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--config", g.config_path, "run configuration file (defaults apply if omitted)");
  app.add_option("--workers", g.workers_override, "cap rollout/update worker threads");
  app.fallthrough();

  auto* sim = app.add_subcommand("simulate", "roll one episode under a fixed controller");
  std::string sim_env, sim_controller = "constant:0", sim_out = "runs";
  int sim_mode = 0;
  sim->add_option("--env", sim_env, "bioreactor|cstr (overrides config)");
  sim->add_option("--mode", sim_mode, "operating mode index");
  sim->add_option("--controller", sim_controller, "pi | constant:V | checkpoint:PATH");
  sim->add_option("--out", sim_out, "output directory (run dir created inside)");

  auto* texp = app.add_subcommand("train-expert", "forward RL on the true reward");
  std::string texp_env, texp_out = "runs", texp_resume;
  texp->add_option("--env", texp_env, "bioreactor|cstr (overrides config)");
  texp->add_option("--out", texp_out, "output directory");
  texp->add_option("--resume", texp_resume, "checkpoint to resume from");

  auto* gen = app.add_subcommand("gen-demos", "generate a shuffled multi-mode demonstration set");
  std::string gen_expert = "pi", gen_out = "demos.jsonl";
  int gen_per_mode = 1;
  gen->add_option("--expert", gen_expert, "pi | checkpoint:PATH");
  gen->add_option("--per-mode", gen_per_mode, "trajectories per mode")->required();
  gen->add_option("--out", gen_out, "output dataset file");

  auto* tirl = app.add_subcommand("train-irl", "multi-task adversarial IRL from demonstrations");
  std::string tirl_demos, tirl_out = "runs", tirl_resume;
  tirl->add_option("--demos", tirl_demos, "demonstration dataset file")->required();
  tirl->add_option("--out", tirl_out, "output directory");
  tirl->add_option("--resume", tirl_resume, "checkpoint to resume from");

  auto* ev = app.add_subcommand("eval", "evaluate a trained policy per mode");
  std::string ev_ckpt, ev_out = "runs", ev_demos;
  int ev_episodes = 20;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file or run directory")->required();
  ev->add_option("--episodes", ev_episodes, "episodes per mode");
  ev->add_option("--out", ev_out, "output directory");
  ev->add_option("--demos", ev_demos, "labeled demos for expert reference and mode mapping");

  auto* inf = app.add_subcommand("infer-mode", "classify demos with the inference network");
  std::string inf_ckpt, inf_demos;
  inf->add_option("--checkpoint", inf_ckpt, "checkpoint file or run directory")->required();
  inf->add_option("--demos", inf_demos, "labeled demonstration dataset")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(g, sim_env, sim_mode, sim_controller, sim_out);
    if (texp->parsed()) return cmd_train_expert(g, texp_env, texp_out, texp_resume);
    if (gen->parsed()) return cmd_gen_demos(g, gen_expert, gen_per_mode, gen_out);
    if (tirl->parsed()) return cmd_train_irl(g, tirl_demos, tirl_out, tirl_resume);
    if (ev->parsed()) return cmd_eval(g, ev_ckpt, ev_episodes, ev_out, ev_demos);
    if (inf->parsed()) return cmd_infer_mode(g, inf_ckpt, inf_demos);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return 1;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
