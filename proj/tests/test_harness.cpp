#include <doctest.h>

#include <cmath>

#include "mpmab/harness.hpp"
#include "mpmab/errors.hpp"

using namespace mpmab;

namespace {

/// Records what it is allowed to see at each selection.
class ProbePolicy final : public Policy {
 public:
  std::string name() const override { return "probe"; }
  void reset(int players, int arms, std::int64_t, std::uint64_t) override {
    players_ = players;
    arms_ = arms;
  }
  void select(std::int64_t round, std::span<int> arms) override {
    REQUIRE(observed_rounds == round - 1);
    last_selected.assign(arms.size(), 0);
    for (int p = 0; p < players_; ++p) {
      arms[p] = static_cast<int>((round + p) % arms_);
      last_selected[p] = arms[p];
    }
  }
  void observe(std::span<const int> arms, std::span<const double>) override {
    REQUIRE(std::vector<int>(arms.begin(), arms.end()) == last_selected);
    ++observed_rounds;
  }

  std::int64_t observed_rounds = 0;
  std::vector<int> last_selected;

 private:
  int players_ = 0;
  int arms_ = 1;
};

std::vector<int> arm_sequence(const MpmabInstance& inst, Policy& policy, std::int64_t horizon, std::uint64_t seed) {
  std::vector<int> seq;
  run_episode(inst, policy, horizon, seed,
              [&](std::int64_t, std::span<const int> arms) { seq.insert(seq.end(), arms.begin(), arms.end()); });
  return seq;
}

}  // namespace

TEST_CASE("deterministic one-good-arm instance under Ind-UCB") {
  const int m = 4, k = 5;
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(m, k);
  mu.col(2).setOnes();
  const MpmabInstance inst(mu, RewardKind::kPointMass);
  IndUcbPolicy policy;
  const std::int64_t horizon = 20000;
  const RegretTrace trace = run_episode(inst, policy, horizon, 1);
  // Initialization pulls every arm once; arm 2 is the only free one.
  CHECK(trace.cum_regret[k - 1] == m * (k - 1));
  // A zero arm with n pulls is retried only while sqrt(2 ln t / n) > 1, so n <= 2 ln T + 1.
  CHECK(trace.cum_regret.back() <= m * (k - 1) * (2.0 * std::log(double(horizon)) + 1.0));
  // Short horizons stay within M K.
  IndUcbPolicy fresh;
  CHECK(run_episode(inst, fresh, k + 1, 1).cum_regret.back() <= m * k);
}

TEST_CASE("all-optimal instance has zero regret") {
  const MpmabInstance inst(Eigen::MatrixXd::Constant(3, 4, 0.4));
  for (const auto& name : policy_names()) {
    PolicySpec spec;
    spec.algorithm = name;
    auto policy = make_policy(spec);
    const RegretTrace trace = run_episode(inst, *policy, 300, 2);
    CHECK(trace.cum_regret.back() == 0.0);
  }
}

TEST_CASE("property: trace bookkeeping closes on every preset") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Philox4x32 rng(seed, stream_id(StreamTag::kInstance));
    const MpmabInstance inst = generate_instance(6, 5, static_cast<int>(seed + 1), 0.15, rng);
    const Eigen::MatrixXd gaps = diagnostics(inst).gaps;
    for (const auto& name : policy_names()) {
      PolicySpec spec;
      spec.algorithm = name;
      auto policy = make_policy(spec);
      const std::int64_t horizon = 1500;
      const RegretTrace trace = run_episode(inst, *policy, horizon, seed);
      REQUIRE(std::is_sorted(trace.cum_regret.begin(), trace.cum_regret.end()));
      REQUIRE(trace.per_player_pulls.sum() == 6 * horizon);
      for (int p = 0; p < 6; ++p) REQUIRE(trace.per_player_pulls.row(p).sum() == horizon);
      const double closed = (gaps.array() * trace.per_player_pulls.cast<double>().array()).sum();
      REQUIRE(trace.cum_regret.back() == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("decisions only see previous rounds") {
  Philox4x32 rng(1, 0);
  const MpmabInstance inst = generate_instance(3, 4, 1, 0.15, rng);
  ProbePolicy probe;
  run_episode(inst, probe, 50, 0);
  CHECK(probe.observed_rounds == 50);
}

TEST_CASE("horizon must exceed max(M, K)") {
  const MpmabInstance inst(Eigen::MatrixXd::Constant(3, 8, 0.5));
  IndUcbPolicy policy;
  CHECK_THROWS_AS(run_episode(inst, policy, 8, 0), ArgumentError);
  CHECK_NOTHROW(run_episode(inst, policy, 9, 0));
}

TEST_CASE("episodes are deterministic under a fixed seed") {
  Philox4x32 rng(2, 0);
  const MpmabInstance inst = generate_instance(5, 6, 3, 0.15, rng);
  for (const auto& name : policy_names()) {
    PolicySpec spec;
    spec.algorithm = name;
    auto a = make_policy(spec);
    auto b = make_policy(spec);
    CHECK(arm_sequence(inst, *a, 800, 11) == arm_sequence(inst, *b, 800, 11));
  }
}

TEST_CASE("naive-agg and robustagg-adapted(0) share one code path") {
  Philox4x32 rng(9, 0);
  const MpmabInstance inst = generate_instance(8, 6, 4, 0.15, rng);
  PolicySpec naive;
  naive.algorithm = "naive-agg";
  PolicySpec adapted0;
  adapted0.algorithm = "robustagg-adapted";
  adapted0.eps = 0.0;
  auto a = make_policy(naive);
  auto b = make_policy(adapted0);
  CHECK(arm_sequence(inst, *a, 2000, 4) == arm_sequence(inst, *b, 2000, 4));
}

TEST_CASE("checkpoints") {
  const auto c = checkpoints(100000);
  CHECK(c.size() == 1000);
  CHECK(c.front() == 100);
  CHECK(c.back() == 100000);
  CHECK(checkpoints(2500).back() == 2500);
  CHECK(checkpoints(2500)[0] == 2);
  CHECK(checkpoints(10).size() == 10);
}

TEST_CASE("run_replicated") {
  ExperimentConfig cfg;
  cfg.horizon = 1000;
  cfg.policy.algorithm = "robustagg-adapted";
  cfg.source.num_players = 4;
  cfg.source.num_arms = 5;
  cfg.source.num_subpar = 3;
  cfg.base_seed = 40;

  SUBCASE("one replication equals the single trace") {
    cfg.num_replications = 1;
    const Aggregate agg = run_replicated(cfg);
    const MpmabInstance inst = cfg.source.materialize(40);
    auto policy = make_policy(cfg.policy);
    const RegretTrace trace = run_episode(inst, *policy, 1000, 40);
    CHECK(agg.final_values()(0) == trace.cum_regret.back());
    CHECK(agg.stderr_of_mean().isZero());
    CHECK(agg.seeds == std::vector<std::uint64_t>{40});
  }
  SUBCASE("parallel and serial runs agree bit for bit") {
    cfg.num_replications = 6;
    cfg.threads = 1;
    const Aggregate serial = run_replicated(cfg);
    cfg.threads = 4;
    const Aggregate parallel = run_replicated(cfg);
    CHECK(serial.values == parallel.values);
    CHECK(serial.seeds == parallel.seeds);
  }
  SUBCASE("generated sources draw a fresh instance per replication") {
    CHECK_FALSE(cfg.source.materialize(40) == cfg.source.materialize(41));
    CHECK(cfg.source.materialize(41) == cfg.source.materialize(41));
  }
  SUBCASE("mean and standard error") {
    cfg.num_replications = 5;
    const Aggregate agg = run_replicated(cfg);
    const Eigen::VectorXd f = agg.final_values();
    const double mu = f.mean();
    const double se = std::sqrt((f.array() - mu).square().sum() / 4.0 / 5.0);
    CHECK(agg.mean()(agg.mean().size() - 1) == doctest::Approx(mu));
    CHECK(agg.stderr_of_mean()(agg.mean().size() - 1) == doctest::Approx(se));
  }
  SUBCASE("invalid configurations") {
    cfg.num_replications = 0;
    CHECK_THROWS_AS(run_replicated(cfg), ArgumentError);
    cfg.num_replications = 1;
    cfg.policy.algorithm = "nope";
    CHECK_THROWS_AS(run_replicated(cfg), ArgumentError);
    cfg.policy.algorithm = "ind-ucb";
    cfg.source.kind = InstanceSource::Kind::kFile;
    cfg.source.file = "/nonexistent/instance.json";
    CHECK_THROWS_AS(run_replicated(cfg), IoError);
  }
}

TEST_CASE("example-1 instance: aggregation cannot beat independent UCB by much") {
  // Pilot of this exact configuration (T = 1e5, M = 20, delta = 0.05, 30 seeds):
  // ind-ucb 5289.7, robustagg(0.15) 28630.3 (ratio 0.185), robustagg-adapted(0.15) 5301.5 (ratio 0.998).
  // The upper end of the band is the claim under test. The theory-coefficient lower end is
  // half the pilot ratio, since its wide intervals keep it exploring the delta gap.
  ExperimentConfig cfg;
  cfg.horizon = 100000;
  cfg.num_replications = 30;
  cfg.source.kind = InstanceSource::Kind::kExample1;
  cfg.source.num_players = 20;
  cfg.source.delta = 0.05;
  cfg.policy.algorithm = "ind-ucb";
  const double ind = run_replicated(cfg).final_values().mean();
  cfg.policy.algorithm = "robustagg";
  cfg.policy.eps = 0.15;
  const double theory = run_replicated(cfg).final_values().mean();
  cfg.policy.algorithm = "robustagg-adapted";
  const double adapted = run_replicated(cfg).final_values().mean();
  MESSAGE("ind-ucb " << ind << ", robustagg(0.15) " << theory << ", robustagg-adapted(0.15) " << adapted);
  CHECK(ind / theory >= 0.09);
  CHECK(ind / theory <= 2.0);
  CHECK(ind / adapted >= 0.5);
  CHECK(ind / adapted <= 2.0);
}
