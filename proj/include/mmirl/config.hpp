#ifndef MMIRL_CONFIG_HPP_
#define MMIRL_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmirl/bioreactor.hpp"
#include "mmirl/cstr.hpp"
#include "mmirl/env.hpp"

namespace mmirl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Effective run configuration. Every field has a default; a handful of
/// sentinel defaults (0 / negative / empty list) mean "use the built-in
/// value for the selected environment" and are resolved by make_env.
struct RunConfig {
  struct EnvSection {
    std::string id = "bioreactor";  // bioreactor | cstr
    int horizon = 0;                // 0 -> builtin (20 bioreactor, 300 cstr)
    double dt = 0.0;                // 0 -> builtin (0.05, 10 s)
    int substeps = 10;
    double reset_jitter = -1.0;     // <0 -> builtin (0.02 on y1, 0.2 C on T)
    double cstr_noise_std_frac = 0.02;
    CstrParams cstr;
    double pi_kc = 18.0;
    double pi_tau_i = 200.0;
    double pi_u0 = 50.0;
    std::vector<double> norm_center;  // empty -> builtin
    std::vector<double> norm_scale;
  } env;

  struct ModesSection {
    int count = 2;
    std::vector<double> bioreactor_k = {0.5, 0.7};
    std::vector<double> cstr_setpoint = {90.0, 86.0};
  } modes;

  struct TrainingSection {
    std::uint64_t seed = 1;
    int workers = 4;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_ratio = 0.2;
    int ppo_epochs = 10;
    int minibatch = 256;
    double lr_policy = 3e-4;
    double lr_value = 1e-3;
    double lr_disc = 3e-4;
    double lr_inference = 3e-4;
    double ent_coef = 0.005;
    double target_kl = 0.02;
    double grad_clip = 0.5;
    int rollout_steps = 2000;
    int iterations = 300;
    int hidden_width = 64;
    int hidden_layers = 2;
    double log_std_init = -0.5;
    double log_std_min = -5.0;
    double log_std_max = 2.0;
    double info_coef = 1.0;
    int demo_batch = 64;
    int disc_epochs = 1;
    int inference_epochs = 1;
    int disc_minibatch = 256;
    int checkpoint_every = 0;  // 0 -> final only
  } training;

  struct IoSection {
    std::string out_dir = "runs";
  } io;
};

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_real(v[i]);
  }
  return s;
}

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& raw, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (strip(raw.substr(pos)).empty()) return v;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "': expected real, got '" + raw + "'");
}

inline long long parse_int(const std::string& raw, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(raw, &pos);
    if (strip(raw.substr(pos)).empty()) return v;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "': expected integer, got '" + raw + "'");
}

inline std::vector<double> parse_list(const std::string& raw, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(raw);
  while (std::getline(ss, item, ',')) {
    item = strip(item);
    if (item.empty()) continue;
    out.push_back(parse_real(item, key));
  }
  return out;
}

struct KeyHandler {
  std::function<void(RunConfig&, const std::string& raw, const std::string& key)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<std::pair<std::string, KeyHandler>>& config_schema() {
  static const std::vector<std::pair<std::string, KeyHandler>> schema = [] {
    std::vector<std::pair<std::string, KeyHandler>> s;
    auto add = [&s](std::string key, KeyHandler h) { s.emplace_back(std::move(key), std::move(h)); };

    auto real_kh = [](auto getter) {
      return KeyHandler{
          [getter](RunConfig& c, const std::string& raw, const std::string& key) { *getter(c) = parse_real(raw, key); },
          [getter](const RunConfig& c) { return fmt_real(*getter(const_cast<RunConfig&>(c))); }};
    };
    auto int_kh = [](auto getter) {
      return KeyHandler{
          [getter](RunConfig& c, const std::string& raw, const std::string& key) { *getter(c) = static_cast<int>(parse_int(raw, key)); },
          [getter](const RunConfig& c) { return std::to_string(*getter(const_cast<RunConfig&>(c))); }};
    };
    auto u64_kh = [](auto getter) {
      return KeyHandler{
          [getter](RunConfig& c, const std::string& raw, const std::string& key) { *getter(c) = static_cast<std::uint64_t>(parse_int(raw, key)); },
          [getter](const RunConfig& c) { return std::to_string(*getter(const_cast<RunConfig&>(c))); }};
    };
    auto str_kh = [](auto getter) {
      return KeyHandler{
          [getter](RunConfig& c, const std::string& raw, const std::string&) { *getter(c) = strip(raw); },
          [getter](const RunConfig& c) { return *getter(const_cast<RunConfig&>(c)); }};
    };
    auto list_kh = [](auto getter) {
      return KeyHandler{
          [getter](RunConfig& c, const std::string& raw, const std::string& key) { *getter(c) = parse_list(raw, key); },
          [getter](const RunConfig& c) { return fmt_list(*getter(const_cast<RunConfig&>(c))); }};
    };

    add("env.id", str_kh([](RunConfig& c) { return &c.env.id; }));
    add("env.horizon", int_kh([](RunConfig& c) { return &c.env.horizon; }));
    add("env.dt", real_kh([](RunConfig& c) { return &c.env.dt; }));
    add("env.substeps", int_kh([](RunConfig& c) { return &c.env.substeps; }));
    add("env.reset_jitter", real_kh([](RunConfig& c) { return &c.env.reset_jitter; }));
    add("env.cstr_noise_std_frac", real_kh([](RunConfig& c) { return &c.env.cstr_noise_std_frac; }));
    add("env.cstr_tau_r", real_kh([](RunConfig& c) { return &c.env.cstr.tau_r; }));
    add("env.cstr_k0", real_kh([](RunConfig& c) { return &c.env.cstr.k0; }));
    add("env.cstr_e_over_r", real_kh([](RunConfig& c) { return &c.env.cstr.e_over_r; }));
    add("env.cstr_caf", real_kh([](RunConfig& c) { return &c.env.cstr.caf; }));
    add("env.cstr_heat_gain", real_kh([](RunConfig& c) { return &c.env.cstr.heat_gain; }));
    add("env.cstr_ur", real_kh([](RunConfig& c) { return &c.env.cstr.ur; }));
    add("env.cstr_uc", real_kh([](RunConfig& c) { return &c.env.cstr.uc; }));
    add("env.cstr_tcf", real_kh([](RunConfig& c) { return &c.env.cstr.tcf; }));
    add("env.cstr_wmax", real_kh([](RunConfig& c) { return &c.env.cstr.wmax; }));
    add("env.cstr_t_nominal", real_kh([](RunConfig& c) { return &c.env.cstr.t_nominal; }));
    add("env.cstr_b_nominal", real_kh([](RunConfig& c) { return &c.env.cstr.b_nominal; }));
    add("env.pi_kc", real_kh([](RunConfig& c) { return &c.env.pi_kc; }));
    add("env.pi_tau_i", real_kh([](RunConfig& c) { return &c.env.pi_tau_i; }));
    add("env.pi_u0", real_kh([](RunConfig& c) { return &c.env.pi_u0; }));
    add("env.norm_center", list_kh([](RunConfig& c) { return &c.env.norm_center; }));
    add("env.norm_scale", list_kh([](RunConfig& c) { return &c.env.norm_scale; }));

    add("modes.count", int_kh([](RunConfig& c) { return &c.modes.count; }));
    add("modes.bioreactor_k", list_kh([](RunConfig& c) { return &c.modes.bioreactor_k; }));
    add("modes.cstr_setpoint", list_kh([](RunConfig& c) { return &c.modes.cstr_setpoint; }));

    add("training.seed", u64_kh([](RunConfig& c) { return &c.training.seed; }));
    add("training.workers", int_kh([](RunConfig& c) { return &c.training.workers; }));
    add("training.gamma", real_kh([](RunConfig& c) { return &c.training.gamma; }));
    add("training.gae_lambda", real_kh([](RunConfig& c) { return &c.training.gae_lambda; }));
    add("training.clip_ratio", real_kh([](RunConfig& c) { return &c.training.clip_ratio; }));
    add("training.ppo_epochs", int_kh([](RunConfig& c) { return &c.training.ppo_epochs; }));
    add("training.minibatch", int_kh([](RunConfig& c) { return &c.training.minibatch; }));
    add("training.lr_policy", real_kh([](RunConfig& c) { return &c.training.lr_policy; }));
    add("training.lr_value", real_kh([](RunConfig& c) { return &c.training.lr_value; }));
    add("training.lr_disc", real_kh([](RunConfig& c) { return &c.training.lr_disc; }));
    add("training.lr_inference", real_kh([](RunConfig& c) { return &c.training.lr_inference; }));
    add("training.ent_coef", real_kh([](RunConfig& c) { return &c.training.ent_coef; }));
    add("training.target_kl", real_kh([](RunConfig& c) { return &c.training.target_kl; }));
    add("training.grad_clip", real_kh([](RunConfig& c) { return &c.training.grad_clip; }));
    add("training.rollout_steps", int_kh([](RunConfig& c) { return &c.training.rollout_steps; }));
    add("training.iterations", int_kh([](RunConfig& c) { return &c.training.iterations; }));
    add("training.hidden_width", int_kh([](RunConfig& c) { return &c.training.hidden_width; }));
    add("training.hidden_layers", int_kh([](RunConfig& c) { return &c.training.hidden_layers; }));
    add("training.log_std_init", real_kh([](RunConfig& c) { return &c.training.log_std_init; }));
    add("training.log_std_min", real_kh([](RunConfig& c) { return &c.training.log_std_min; }));
    add("training.log_std_max", real_kh([](RunConfig& c) { return &c.training.log_std_max; }));
    add("training.info_coef", real_kh([](RunConfig& c) { return &c.training.info_coef; }));
    add("training.demo_batch", int_kh([](RunConfig& c) { return &c.training.demo_batch; }));
    add("training.disc_epochs", int_kh([](RunConfig& c) { return &c.training.disc_epochs; }));
    add("training.inference_epochs", int_kh([](RunConfig& c) { return &c.training.inference_epochs; }));
    add("training.disc_minibatch", int_kh([](RunConfig& c) { return &c.training.disc_minibatch; }));
    add("training.checkpoint_every", int_kh([](RunConfig& c) { return &c.training.checkpoint_every; }));

    add("io.out_dir", str_kh([](RunConfig& c) { return &c.io.out_dir; }));
    return s;
  }();
  return schema;
}

}  // namespace detail

inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config: key '" + key + "': " + why);
  };
  if (c.env.id != "bioreactor" && c.env.id != "cstr") fail("env.id", "must be 'bioreactor' or 'cstr'");
  if (c.env.horizon < 0) fail("env.horizon", "must be >= 0 (0 = builtin)");
  if (c.env.dt < 0.0) fail("env.dt", "must be >= 0 (0 = builtin)");
  if (c.env.substeps < 1) fail("env.substeps", "must be >= 1");
  if (c.env.cstr_noise_std_frac < 0.0) fail("env.cstr_noise_std_frac", "must be >= 0");
  if (c.modes.count < 1) fail("modes.count", "must be >= 1");
  const std::size_t m = static_cast<std::size_t>(c.modes.count);
  if (c.env.id == "bioreactor" && c.modes.bioreactor_k.size() != m)
    fail("modes.bioreactor_k", "list length must equal modes.count");
  if (c.env.id == "cstr" && c.modes.cstr_setpoint.size() != m)
    fail("modes.cstr_setpoint", "list length must equal modes.count");
  if (!(c.training.gamma > 0.0 && c.training.gamma <= 1.0)) fail("training.gamma", "must be in (0, 1]");
  if (!(c.training.gae_lambda >= 0.0 && c.training.gae_lambda <= 1.0)) fail("training.gae_lambda", "must be in [0, 1]");
  if (!(c.training.clip_ratio > 0.0 && c.training.clip_ratio < 1.0)) fail("training.clip_ratio", "must be in (0, 1)");
  if (c.training.ppo_epochs < 1) fail("training.ppo_epochs", "must be >= 1");
  if (c.training.minibatch < 1) fail("training.minibatch", "must be >= 1");
  const std::pair<const char*, double> lrs[] = {{"training.lr_policy", c.training.lr_policy},
                                                {"training.lr_value", c.training.lr_value},
                                                {"training.lr_disc", c.training.lr_disc},
                                                {"training.lr_inference", c.training.lr_inference}};
  for (const auto& [k, v] : lrs)
    if (!(v > 0.0)) fail(k, "must be > 0");
  if (c.training.ent_coef < 0.0) fail("training.ent_coef", "must be >= 0");
  if (!(c.training.target_kl > 0.0)) fail("training.target_kl", "must be > 0");
  if (c.training.workers < 1) fail("training.workers", "must be >= 1");
  if (c.training.rollout_steps < 1) fail("training.rollout_steps", "must be >= 1");
  if (c.training.iterations < 0) fail("training.iterations", "must be >= 0");
  if (c.training.hidden_width < 1 || c.training.hidden_layers < 1)
    fail("training.hidden_width", "network shape must be positive");
  if (!(c.training.log_std_min < c.training.log_std_max))
    fail("training.log_std_min", "must be < training.log_std_max");
  if (c.training.info_coef < 0.0) fail("training.info_coef", "must be >= 0");
  if (c.training.demo_batch < 1) fail("training.demo_batch", "must be >= 1");
  if (c.modes.count > 64) fail("modes.count", "unreasonably large mode count");
  if (!c.env.norm_center.empty() || !c.env.norm_scale.empty()) {
    const std::size_t dim = c.env.id == "bioreactor" ? 2u : 5u;
    if (c.env.norm_center.size() != dim) fail("env.norm_center", "wrong length for env");
    if (c.env.norm_scale.size() != dim) fail("env.norm_scale", "wrong length for env");
    for (double s : c.env.norm_scale)
      if (!(s > 0.0)) fail("env.norm_scale", "entries must be > 0");
  }
}

/// Parses the sectioned key-value text format. Unknown sections or keys are
/// rejected with the offending path; all omitted keys keep their defaults.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<string>") {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = detail::strip(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config: " + origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = detail::strip(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& kv : detail::config_schema())
        if (kv.first.rfind(section + ".", 0) == 0) known = true;
      if (!known) throw ConfigError("config: unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::strip(s.substr(0, eq));
    const std::string raw = detail::strip(s.substr(eq + 1));
    if (section.empty()) throw ConfigError("config: key '" + key + "' outside any section");
    const std::string path = section + "." + key;
    bool found = false;
    for (const auto& kv : detail::config_schema()) {
      if (kv.first == path) {
        kv.second.set(cfg, raw, path);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("config: unknown key '" + path + "'");
  }
  validate_config(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

/// Canonical echo of the effective configuration: every key in schema order.
/// Reals use 17 significant digits, so parse(echo(cfg)) == cfg.
inline std::string config_echo(const RunConfig& cfg) {
  std::string out;
  std::string current_section;
  for (const auto& kv : detail::config_schema()) {
    const std::string section = kv.first.substr(0, kv.first.find('.'));
    const std::string key = kv.first.substr(kv.first.find('.') + 1);
    if (section != current_section) {
      if (!out.empty()) out += "\n";
      out += "[" + section + "]\n";
      current_section = section;
    }
    out += key + " = " + kv.second.get(cfg) + "\n";
  }
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config_echo(cfg))));
  return std::string(buf).substr(0, 8);
}

/// Builds the configured environment with sentinel defaults resolved.
inline std::unique_ptr<Env> make_env(const RunConfig& cfg) {
  if (cfg.env.id == "bioreactor") {
    BioreactorConfig bc;
    bc.horizon = cfg.env.horizon > 0 ? cfg.env.horizon : 20;
    bc.dt = cfg.env.dt > 0.0 ? cfg.env.dt : 0.05;
    bc.substeps = cfg.env.substeps;
    bc.y1_jitter = cfg.env.reset_jitter >= 0.0 ? cfg.env.reset_jitter : 0.02;
    bc.mode_k = cfg.modes.bioreactor_k;
    return std::make_unique<BioreactorEnv>(bc);
  }
  CstrConfig cc;
  cc.params = cfg.env.cstr;
  cc.horizon = cfg.env.horizon > 0 ? cfg.env.horizon : 300;
  cc.dt = cfg.env.dt > 0.0 ? cfg.env.dt : 10.0;
  cc.substeps = cfg.env.substeps;
  cc.noise_std_frac = cfg.env.cstr_noise_std_frac;
  cc.t_jitter = cfg.env.reset_jitter >= 0.0 ? cfg.env.reset_jitter : 0.2;
  cc.setpoints = cfg.modes.cstr_setpoint;
  cc.norm_center = cfg.env.norm_center;
  cc.norm_scale = cfg.env.norm_scale;
  return std::make_unique<CstrEnv>(cc);
}

}  // namespace mmirl

#endif  // MMIRL_CONFIG_HPP_
