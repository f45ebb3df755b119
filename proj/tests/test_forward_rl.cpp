#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mmirl/bioreactor.hpp"
#include "mmirl/config.hpp"
#include "mmirl/expert_train.hpp"
#include "mmirl/gae.hpp"
#include "mmirl/ppo.hpp"
#include "mmirl/rollout.hpp"
#include "support/test_envs.hpp"

using namespace mmirl;
using mmirl_tests::BanditEnv;

namespace {

PolicyLayout bioreactor_layout(int mode_count = 2) {
  PolicyLayout layout;
  layout.obs_dim = 2 + mode_count;
  layout.act_dim = 2;
  layout.hidden = {32, 32};
  layout.act_low = {0.0, 0.0};
  layout.act_high = {5.0, 5.0};
  return layout;
}

}  // namespace

TEST_CASE("gae: single step, gamma = lambda = 1, zero value") {
  const auto res = gae(std::vector<double>{2.5}, std::vector<double>{0.0}, 1.0, 1.0, 0.0);
  REQUIRE(res.advantages[0] == 2.5);
  REQUIRE(res.returns[0] == 2.5);
}

TEST_CASE("gae: rewards equal to TD targets give zero advantages") {
  const double gamma = 0.9;
  const std::vector<double> values = {1.0, 2.0, 3.0};
  // r_t = V_t - gamma*V_{t+1}, bootstrap 0 at the end
  std::vector<double> rewards(3);
  for (int t = 0; t < 3; ++t) rewards[static_cast<std::size_t>(t)] = values[static_cast<std::size_t>(t)] - gamma * (t == 2 ? 0.0 : values[static_cast<std::size_t>(t + 1)]);
  const auto res = gae(rewards, values, gamma, 0.95, 0.0);
  for (double a : res.advantages) REQUIRE(a == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("gae: 3-step case matches a scripted recursive recomputation") {
  const double gamma = 0.9, lambda = 0.95;
  const std::vector<double> rewards = {1.0, -0.5, 2.0};
  const std::vector<double> values = {0.3, 0.1, -0.2};
  const auto res = gae(rewards, values, gamma, lambda, 0.0);

  // scripted recursion from the back
  double adv = 0.0;
  std::vector<double> want(3);
  for (int t = 2; t >= 0; --t) {
    const double next_v = t == 2 ? 0.0 : values[static_cast<std::size_t>(t + 1)];
    const double delta = rewards[static_cast<std::size_t>(t)] + gamma * next_v - values[static_cast<std::size_t>(t)];
    adv = delta + gamma * lambda * adv;
    want[static_cast<std::size_t>(t)] = adv;
  }
  for (int t = 0; t < 3; ++t) {
    REQUIRE(res.advantages[static_cast<std::size_t>(t)] == Catch::Approx(want[static_cast<std::size_t>(t)]).epsilon(1e-14));
    REQUIRE(res.returns[static_cast<std::size_t>(t)] == Catch::Approx(want[static_cast<std::size_t>(t)] + values[static_cast<std::size_t>(t)]).epsilon(1e-14));
  }
}

TEST_CASE("gae rejects mismatched lengths") {
  REQUIRE_THROWS_AS(gae(std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}, 0.9, 0.95),
                    std::invalid_argument);
}

TEST_CASE("collect_rollouts: deterministic-mode agent on a deterministic env repeats batches") {
  BioreactorConfig bc;
  bc.y1_jitter = 0.0;
  BioreactorEnv env(bc);
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 33);

  RolloutOptions opt;
  opt.n_steps = 60;
  opt.seed = 5;
  opt.workers = 1;
  opt.env_mode_fn = [](int, Rng& rng) { return rng.uniform_int(2); };
  opt.z_follows_env_mode = true;
  opt.deterministic = true;

  const auto a = collect_rollouts(agent.policy(), env, opt);
  const auto b = collect_rollouts(agent.policy(), env, opt);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    REQUIRE(a.episodes[e].actions == b.episodes[e].actions);
    REQUIRE(a.episodes[e].env_rewards == b.episodes[e].env_rewards);
  }
}

TEST_CASE("collect_rollouts: results are identical for any worker count") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 7);
  RolloutOptions opt;
  opt.n_steps = 200;
  opt.seed = 11;
  opt.env_mode_fn = [](int, Rng& rng) { return rng.uniform_int(2); };
  opt.z_follows_env_mode = true;

  opt.workers = 1;
  const auto a = collect_rollouts(agent.policy(), env, opt);
  opt.workers = 4;
  const auto b = collect_rollouts(agent.policy(), env, opt);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    REQUIRE(a.episodes[e].actions == b.episodes[e].actions);
    REQUIRE(a.episodes[e].log_probs == b.episodes[e].log_probs);
    REQUIRE(a.episodes[e].z == b.episodes[e].z);
  }
}

TEST_CASE("collect_rollouts: n_steps equal to the horizon yields exactly one episode") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 1);
  RolloutOptions opt;
  opt.n_steps = 20;
  opt.seed = 2;
  opt.env_mode_fn = [](int, Rng&) { return 0; };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  REQUIRE(batch.episodes.size() == 1);
  REQUIRE(batch.total_steps() == 20);
}

TEST_CASE("collect_rollouts: augmented observation width is state_dim + M") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 1);
  RolloutOptions opt;
  opt.n_steps = 20;
  opt.seed = 2;
  opt.env_mode_fn = [](int, Rng&) { return 1; };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  for (const auto& ep : batch.episodes) {
    for (const auto& obs : ep.obs_aug) {
      REQUIRE(obs.size() == 2 + 2);
      REQUIRE(obs[2 + static_cast<std::size_t>(ep.z)] == 1.0);
    }
    // z never changes within an episode
    REQUIRE(ep.z == 1);
  }
}

TEST_CASE("prepare: advantages are zero-mean unit-variance after batch normalization") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 3);
  RolloutOptions opt;
  opt.n_steps = 200;
  opt.seed = 4;
  opt.env_mode_fn = [](int, Rng& rng) { return rng.uniform_int(2); };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  const auto arr = agent.prepare(batch);
  double mean = 0.0;
  for (double a : arr.advantages) mean += a;
  mean /= static_cast<double>(arr.advantages.size());
  double var = 0.0;
  for (double a : arr.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(arr.advantages.size());
  REQUIRE(std::abs(mean) < 1e-10);
  REQUIRE(var == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("policy_update: zero advantages and zero entropy coef leave the policy unchanged") {
  BanditEnv env;
  PolicyLayout layout;
  layout.obs_dim = 2;  // state + single-mode one-hot
  layout.act_dim = 1;
  layout.hidden = {8};
  layout.act_low = {-1.0};
  layout.act_high = {1.0};
  PpoConfig cfg;
  cfg.ent_coef = 0.0;
  cfg.epochs = 3;
  PolicyAgent agent(layout, cfg, 17);

  RolloutOptions opt;
  opt.n_steps = 64;
  opt.seed = 6;
  opt.env_mode_fn = [](int, Rng&) { return 0; };
  opt.z_follows_env_mode = true;
  auto batch = collect_rollouts(agent.policy(), env, opt);
  // constant rewards => after GAE with constant values, advantages identical
  // => normalized advantages all zero
  for (auto& ep : batch.episodes)
    for (auto& r : ep.train_rewards) r = 1.0;

  const std::vector<double> before(agent.policy().block().values().begin(),
                                   agent.policy().block().values().end());
  (void)agent.update(batch, 99);
  const std::vector<double> after(agent.policy().block().values().begin(),
                                  agent.policy().block().values().end());
  REQUIRE(before == after);
}

TEST_CASE("policy_update: probability ratio is exactly 1 at the old parameters") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 5);
  RolloutOptions opt;
  opt.n_steps = 40;
  opt.seed = 8;
  opt.env_mode_fn = [](int, Rng& rng) { return rng.uniform_int(2); };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  for (const auto& ep : batch.episodes)
    for (std::size_t t = 0; t < ep.length(); ++t) {
      const double lp = agent.policy().log_prob_presquash(ep.obs_aug[t], ep.presquash[t]);
      REQUIRE(std::exp(lp - ep.log_probs[t]) == 1.0);
    }
}

TEST_CASE("policy_update: runaway KL aborts remaining epochs") {
  BioreactorEnv env;
  PpoConfig cfg;
  cfg.lr_policy = 0.5;  // absurd learning rate forces a large step
  cfg.target_kl = 1e-4;
  cfg.epochs = 10;
  PolicyAgent agent(bioreactor_layout(), cfg, 21);
  RolloutOptions opt;
  opt.n_steps = 128;
  opt.seed = 14;
  opt.env_mode_fn = [](int, Rng& rng) { return rng.uniform_int(2); };
  opt.z_follows_env_mode = true;
  auto batch = collect_rollouts(agent.policy(), env, opt);
  const auto stats = agent.update(batch, 50);
  REQUIRE(stats.kl_abort);
  REQUIRE(stats.epochs_run < cfg.epochs);
}

TEST_CASE("maxent_return: zero reward reduces to the pure entropy term") {
  BioreactorEnv env;
  PolicyAgent agent(bioreactor_layout(), PpoConfig{}, 9);
  RolloutOptions opt;
  opt.n_steps = 20;
  opt.seed = 3;
  opt.env_mode_fn = [](int, Rng&) { return 0; };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  const auto& ep = batch.episodes[0];
  const double got = maxent_return(ep, [](const auto&, const auto&) { return 0.0; });
  double want = 0.0;
  for (double lp : ep.log_probs) want -= lp;
  REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
  REQUIRE(std::isfinite(got));
}

TEST_CASE("maxent_return: hand-built 2-step trajectory matches the scripted sum") {
  EpisodeData ep;
  ep.obs_raw = {{1.0, 0.0}, {0.9, 0.1}};
  ep.actions = {{1.0, 2.0}, {0.5, 0.5}};
  ep.presquash = {{0.0, 0.0}, {0.0, 0.0}};
  ep.log_probs = {-1.2, -0.8};
  ep.env_rewards = {0.0, 0.0};
  ep.train_rewards = {0.0, 0.0};
  auto reward_fn = [](const std::vector<double>& x, const std::vector<double>& u) {
    return x[0] + u[1];
  };
  const double want = (1.0 + 2.0) - (-1.2) + (0.9 + 0.5) - (-0.8);
  REQUIRE(maxent_return(ep, reward_fn) == Catch::Approx(want).epsilon(1e-14));
}

TEST_CASE("maxent_return stays finite at the deterministic limit thanks to the log_std clamp") {
  PolicyLayout layout;
  layout.obs_dim = 2;
  layout.act_dim = 1;
  layout.hidden = {8};
  layout.act_low = {-1.0};
  layout.act_high = {1.0};
  layout.log_std_init = -50.0;  // requests an (over-)deterministic policy
  PolicyAgent agent(layout, PpoConfig{}, 2);
  agent.policy().clamp_log_std();
  REQUIRE(agent.policy().log_std()[0] == -5.0);  // clamped floor

  BanditEnv env;
  RolloutOptions opt;
  opt.n_steps = 4;
  opt.seed = 1;
  opt.env_mode_fn = [](int, Rng&) { return 0; };
  opt.z_follows_env_mode = true;
  const auto batch = collect_rollouts(agent.policy(), env, opt);
  for (const auto& ep : batch.episodes)
    REQUIRE(std::isfinite(maxent_return(ep, [](const auto&, const auto&) { return 0.0; })));
}

TEST_CASE("entropy bonus direction on a one-state bandit") {
  // higher entropy coefficient must not decrease converged policy entropy
  double entropies[2];
  int i = 0;
  for (double coef : {0.0, 0.5}) {
    BanditEnv env({0.0});
    PolicyLayout layout;
    layout.obs_dim = 2;
    layout.act_dim = 1;
    layout.hidden = {16};
    layout.act_low = {-1.0};
    layout.act_high = {1.0};
    PpoConfig cfg;
    cfg.ent_coef = coef;
    cfg.gamma = 1.0;
    cfg.lr_policy = 1e-3;
    cfg.lr_value = 3e-3;
    PolicyAgent agent(layout, cfg, 12);
    for (int it = 0; it < 250; ++it) {
      RolloutOptions opt;
      opt.n_steps = 256;
      opt.seed = seed_chain(12, static_cast<std::uint64_t>(it));
      opt.workers = 2;
      opt.env_mode_fn = [](int, Rng&) { return 0; };
      opt.z_follows_env_mode = true;
      auto batch = collect_rollouts(agent.policy(), env, opt);
      agent.update(batch, seed_chain(13, static_cast<std::uint64_t>(it)));
    }
    entropies[i++] = gaussian_entropy(agent.policy().log_std());
  }
  REQUIRE(entropies[1] >= entropies[0]);
}

TEST_CASE("expert training improves the bioreactor return") {
  RunConfig cfg;
  cfg.training.seed = 3;
  cfg.training.rollout_steps = 400;
  cfg.training.iterations = 25;
  cfg.training.gamma = 1.0;
  cfg.training.workers = 2;
  ExpertTrainer trainer(cfg);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < cfg.training.iterations; ++it) {
    const auto stats = trainer.train_iteration();
    if (it == 0) first = stats.return_mean;
    last = stats.return_mean;
  }
  REQUIRE(last > first);
}

TEST_CASE("mode relabeling: permuted one-hot encoding with permuted weights acts identically") {
  // construct agent B from agent A by swapping the z-input columns of the
  // first layer; conditioning B on swapped one-hots must reproduce A exactly
  BioreactorEnv env;
  PolicyLayout layout = bioreactor_layout();
  PolicyAgent a(layout, PpoConfig{}, 44);
  PolicyAgent b(layout, PpoConfig{}, 44);
  b.policy().block().set_values(a.policy().block().values());

  // first layer W is hidden[0] x obs_dim, z columns are the last 2
  const int rows = layout.hidden[0];
  const int cols = layout.obs_dim;
  auto w = b.policy().block().values(0, static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    std::swap(w[static_cast<std::size_t>(r * cols + 2)], w[static_cast<std::size_t>(r * cols + 3)]);

  env.reset(0, 5);
  const auto obs = env.observe();
  const auto obs_a = augment_observation(obs, 0, 2);
  const auto obs_b = augment_observation(obs, 1, 2);
  const auto act_a = a.policy().mean_action(obs_a);
  const auto act_b = b.policy().mean_action(obs_b);
  REQUIRE(act_a == act_b);
}
