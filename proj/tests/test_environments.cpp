#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "mmirl/bioreactor.hpp"
#include "mmirl/config.hpp"
#include "mmirl/cstr.hpp"
#include "mmirl/rng.hpp"
#include "support/ode_oracle.hpp"

using namespace mmirl;

TEST_CASE("bioreactor: zero action leaves both concentrations unchanged") {
  BioreactorEnv env;
  env.reset(0, 42);
  const auto before = env.observe_raw();
  env.step(std::vector<double>{0.0, 0.0});
  const auto after = env.observe_raw();
  REQUIRE(after[0] == Catch::Approx(before[0]).margin(1e-15));
  REQUIRE(after[1] == Catch::Approx(before[1]).margin(1e-15));
}

TEST_CASE("bioreactor: instantaneous product derivative equals -k at (1,1) under (0,1)") {
  for (const auto& [mode, k] : {std::pair{0, 0.5}, std::pair{1, 0.7}}) {
    std::array<double, 2> y = {1.0, 1.0};
    std::array<double, 2> dy{};
    const std::vector<double> u = {0.0, 1.0};
    bioreactor_rhs(y, u, k, dy);
    REQUIRE(dy[1] == Catch::Approx(-k).epsilon(1e-14));
    (void)mode;
  }
}

TEST_CASE("bioreactor: one step matches adaptive high-accuracy integrator") {
  BioreactorConfig cfg;
  cfg.y1_jitter = 0.0;
  BioreactorEnv env(cfg);
  env.reset(0, 1);
  const std::vector<double> u = {1.0, 0.0};
  env.step(u);
  const auto got = env.observe_raw();

  std::array<double, 2> y = {1.0, 0.0};
  mmirl_tests::dopri5_advance(y, cfg.dt, 1e-12, [&](const std::array<double, 2>& yy, std::array<double, 2>& dy) {
    bioreactor_rhs(yy, u, 0.5, dy);
  });
  REQUIRE(got[0] == Catch::Approx(y[0]).margin(1e-6));
  REQUIRE(got[1] == Catch::Approx(y[1]).margin(1e-6));
}

TEST_CASE("bioreactor reward: action-change penalty and terminal product bonus") {
  BioreactorConfig cfg;
  cfg.y1_jitter = 0.0;
  BioreactorEnv env(cfg);
  env.reset(0, 0);
  // u_prev starts at (0,0); first step with (1,2) pays 0.01*(1+2)
  auto r1 = env.step(std::vector<double>{1.0, 2.0});
  REQUIRE(r1.reward == Catch::Approx(-0.03).epsilon(1e-12));
  // u_prev (1,2) -> (2,1): |1|+|1| = 2
  auto r2 = env.step(std::vector<double>{2.0, 1.0});
  REQUIRE(r2.reward == Catch::Approx(-0.02).epsilon(1e-12));

  // terminal step adds y2(T) exactly
  BioreactorEnv env2(cfg);
  env2.reset(0, 0);
  StepResult last;
  for (int t = 0; t < cfg.horizon; ++t) last = env2.step(std::vector<double>{1.0, 1.0});
  REQUIRE(last.done);
  const double y2_terminal = env2.observe_raw()[1];
  // non-terminal steps after the first cost zero (constant action)
  REQUIRE(last.reward == Catch::Approx(y2_terminal).epsilon(1e-12));
}

TEST_CASE("bioreactor: constant-action episode return matches scripted recomputation") {
  BioreactorConfig cfg;
  cfg.y1_jitter = 0.0;
  BioreactorEnv env(cfg);
  env.reset(1, 3);
  const std::vector<double> u = {2.0, 3.0};
  double total = 0.0;
  while (!env.done()) total += env.step(u).reward;

  // scripted: RK4 by hand over the same grid
  std::array<double, 2> y = {1.0, 0.0};
  double scripted = -0.01 * (2.0 + 3.0);  // first move from (0,0)
  for (int t = 0; t < cfg.horizon; ++t)
    rk4_advance(y, cfg.dt, cfg.substeps, [&](const std::array<double, 2>& yy, std::array<double, 2>& dy) {
      bioreactor_rhs(yy, u, 0.7, dy);
    });
  scripted += y[1];
  REQUIRE(total == Catch::Approx(scripted).epsilon(1e-12));
}

TEST_CASE("bioreactor: episodes run exactly horizon steps and further stepping is rejected") {
  BioreactorEnv env;
  env.reset(0, 5);
  int steps = 0;
  while (!env.done()) {
    env.step(std::vector<double>{1.0, 1.0});
    ++steps;
  }
  REQUIRE(steps == 20);
  REQUIRE_THROWS_AS(env.step(std::vector<double>{1.0, 1.0}), std::logic_error);
}

TEST_CASE("bioreactor: with u2 = 0 the reactant is non-increasing") {
  Rng rng(9);
  BioreactorEnv env;
  for (int trial = 0; trial < 5; ++trial) {
    env.reset(trial % 2, 100 + static_cast<std::uint64_t>(trial));
    double prev = env.observe_raw()[0];
    while (!env.done()) {
      env.step(std::vector<double>{rng.uniform(0.0, 5.0), 0.0});
      const double cur = env.observe_raw()[0];
      REQUIRE(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("bioreactor mode separation: k = 0.5 yields terminal y2 >= k = 0.7") {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<double>> actions;
    for (int t = 0; t < 20; ++t) actions.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
    BioreactorConfig cfg;
    cfg.y1_jitter = 0.0;
    double terminal[2];
    for (int mode = 0; mode < 2; ++mode) {
      BioreactorEnv env(cfg);
      env.reset(mode, 7);
      for (const auto& u : actions) env.step(u);
      terminal[mode] = env.observe_raw()[1];
    }
    REQUIRE(terminal[0] >= terminal[1] - 1e-12);
  }
}

TEST_CASE("bioreactor reset: zero jitter gives the exact nominal state") {
  BioreactorConfig cfg;
  cfg.y1_jitter = 0.0;
  BioreactorEnv env(cfg);
  env.reset(0, 77);
  const auto obs = env.observe_raw();
  REQUIRE(obs[0] == 1.0);
  REQUIRE(obs[1] == 0.0);
}

TEST_CASE("reset determinism and jitter statistics") {
  BioreactorEnv env;
  env.reset(0, 123);
  const auto a = env.observe_raw();
  env.reset(0, 123);
  const auto b = env.observe_raw();
  REQUIRE(a == b);

  // 10^4 resets: sample mean of y1 within 3 standard errors of 1.0
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    env.reset(0, 1000 + static_cast<std::uint64_t>(i));
    sum += env.observe_raw()[0];
  }
  const double mean = sum / n;
  const double se = (0.02 / std::sqrt(3.0)) / std::sqrt(static_cast<double>(n));
  REQUIRE(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("cstr: deterministic trajectories for identical seeds") {
  CstrConfig cfg;
  CstrEnv env1(cfg), env2(cfg);
  env1.reset(0, 99);
  env2.reset(0, 99);
  for (int t = 0; t < 50; ++t) {
    env1.step(std::vector<double>{40.0});
    env2.step(std::vector<double>{40.0});
  }
  REQUIRE(env1.observe_raw() == env2.observe_raw());
}

TEST_CASE("cstr: higher valve opening cools the reactor") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  double temps[2];
  int i = 0;
  for (double valve : {20.0, 80.0}) {
    CstrEnv env(cfg);
    env.reset(0, 4);
    for (int t = 0; t < 30; ++t) env.step(std::vector<double>{valve});
    temps[i++] = env.state().t;
  }
  REQUIRE(temps[1] < temps[0]);
}

TEST_CASE("cstr: calibrated steady state drifts less than 0.01 C in one step") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  CstrEnv env(cfg);
  env.reset(0, 1);
  const double t_before = env.state().t;
  env.step(std::vector<double>{cfg.params.b_nominal});
  REQUIRE(std::abs(env.state().t - t_before) < 0.01);
}

TEST_CASE("cstr: one episode matches the adaptive integrator at every control step") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  cfg.horizon = 60;
  CstrEnv env(cfg);
  env.reset(0, 11);
  const auto steady = env.steady_state();
  std::array<double, 3> oracle = {steady.ca, steady.t, steady.tc};
  Rng rng(8);
  for (int t = 0; t < cfg.horizon; ++t) {
    const double valve = 30.0 + 40.0 * rng.uniform();
    env.step(std::vector<double>{valve});
    mmirl_tests::dopri5_advance(oracle, cfg.dt, 1e-11,
                                [&](const std::array<double, 3>& x, std::array<double, 3>& dx) {
                                  cstr_rhs(x, valve, cfg.params, steady.tf, cfg.params.caf, dx);
                                });
    const auto got = env.observe_raw();
    const double floors[3] = {1e-3, 1.0, 1.0};
    const double vals[3] = {got[0], got[1], got[2]};
    for (int c = 0; c < 3; ++c) {
      const double rel = std::abs(vals[c] - oracle[static_cast<std::size_t>(c)]) /
                         (std::abs(oracle[static_cast<std::size_t>(c)]) + floors[c]);
      REQUIRE(rel < 1e-5);
    }
  }
}

TEST_CASE("cstr: steady-state temperature is non-increasing in valve opening") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  cfg.horizon = 100000;  // long enough to settle from nominal
  double prev_t = 1e9;
  for (double valve : {0.0, 20.0, 40.0, 60.0, 80.0, 100.0}) {
    CstrEnv env(cfg);
    env.reset(0, 3);
    for (int t = 0; t < 4000; ++t) env.step(std::vector<double>{valve});
    REQUIRE(env.state().t <= prev_t + 1e-9);
    prev_t = env.state().t;
  }
}

TEST_CASE("cstr: episode length is exactly 300 by default") {
  CstrEnv env;
  env.reset(1, 6);
  int steps = 0;
  while (!env.done()) {
    env.step(std::vector<double>{50.0});
    ++steps;
  }
  REQUIRE(steps == 300);
  REQUIRE_THROWS_AS(env.step(std::vector<double>{50.0}), std::logic_error);
}

TEST_CASE("cstr reward: quadratic tracking error plus move suppression") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  CstrEnv env(cfg);
  env.reset(0, 1);  // setpoint 90
  const double b_before = env.state().b;
  const auto res = env.step(std::vector<double>{60.0});
  const double err = 90.0 - env.state().t;
  const double dv = 60.0 - b_before;
  REQUIRE(res.reward == Catch::Approx(-err * err - 0.01 * dv * dv).epsilon(1e-12));
}

TEST_CASE("observe: cstr raw observation layout and setpoint error") {
  CstrConfig cfg;
  cfg.noise_std_frac = 0.0;
  cfg.t_jitter = 0.0;
  CstrEnv env(cfg);
  env.reset(0, 1);
  auto raw = env.observe_raw();
  REQUIRE(raw.size() == 5);
  REQUIRE(raw[1] == Catch::Approx(88.0));
  REQUIRE(raw[3] == Catch::Approx(50.0));
  REQUIRE(raw[4] == Catch::Approx(90.0 - raw[1]).margin(1e-12));
}

TEST_CASE("observe: bioreactor observation is the identity on (y1, y2)") {
  BioreactorConfig cfg;
  cfg.y1_jitter = 0.0;
  BioreactorEnv env(cfg);
  env.reset(0, 2);
  REQUIRE(env.observe_raw() == std::vector<double>{1.0, 0.0});
  REQUIRE(env.observe() == env.observe_raw());
}

TEST_CASE("observe: normalization round-trips to 1e-12") {
  CstrEnv env;
  env.reset(1, 13);
  for (int t = 0; t < 10; ++t) env.step(std::vector<double>{45.0});
  const auto raw = env.observe_raw();
  const auto norm = env.observe();
  const auto back = env.denormalize(norm);
  for (std::size_t i = 0; i < raw.size(); ++i) REQUIRE(back[i] == Catch::Approx(raw[i]).margin(1e-12));
}

TEST_CASE("cstr reset: nominal steady state with jitter statistics") {
  CstrConfig cfg;
  cfg.t_jitter = 0.0;
  CstrEnv env(cfg);
  env.reset(0, 8);
  REQUIRE(env.state().t == 88.0);
  REQUIRE(env.state().b == 50.0);

  CstrConfig jcfg;
  CstrEnv jenv(jcfg);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    jenv.reset(0, 500 + static_cast<std::uint64_t>(i));
    sum += jenv.state().t;
  }
  const double se = (0.2 / std::sqrt(3.0)) / std::sqrt(static_cast<double>(n));
  REQUIRE(std::abs(sum / n - 88.0) <= 3.0 * se);
}

TEST_CASE("make_env resolves config sentinels") {
  RunConfig cfg;
  auto bio = make_env(cfg);
  REQUIRE(bio->spec().horizon == 20);
  REQUIRE(bio->spec().dt == Catch::Approx(0.05));
  REQUIRE(bio->spec().mode_count == 2);

  cfg.env.id = "cstr";
  auto cstr = make_env(cfg);
  REQUIRE(cstr->spec().horizon == 300);
  REQUIRE(cstr->spec().dt == Catch::Approx(10.0));
  REQUIRE(cstr->spec().state_dim == 5);
}

TEST_CASE("cstr aborts with a diagnostic on non-finite state") {
  CstrConfig cfg;
  cfg.params.k0 = 1e300;  // absurd rate constant: guaranteed blow-up
  cfg.params.e_over_r = 1.0;
  CstrEnv env(cfg);
  env.reset(0, 1);
  StepResult res;
  for (int t = 0; t < 10 && !env.done(); ++t) res = env.step(std::vector<double>{0.0});
  REQUIRE(res.aborted);
  REQUIRE(res.abort_reason.find("non-finite") != std::string::npos);
  REQUIRE_THROWS_AS(env.step(std::vector<double>{0.0}), std::logic_error);
}
