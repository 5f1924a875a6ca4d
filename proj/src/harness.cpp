#include "mpmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mpmab/errors.hpp"

namespace mpmab {

MpmabInstance InstanceSource::materialize(std::uint64_t replication_seed) const {
  switch (kind) {
    case Kind::kGenerated: {
      Philox4x32 rng(replication_seed, stream_id(StreamTag::kInstance));
      return generate_instance(num_players, num_arms, num_subpar, eps, rng, reward_kind);
    }
    case Kind::kExample1:
      return example1_instance(num_players, delta, reward_kind);
    case Kind::kFile:
      return load_instance(file);
  }
  throw ArgumentError("unknown instance source");
}

void ExperimentConfig::validate() const {
  if (num_replications < 1) throw ArgumentError("need at least one replication");
  if (horizon < 2) throw ArgumentError("horizon must be at least 2");
}

RegretTrace run_episode(const MpmabInstance& instance, Policy& policy, std::int64_t horizon,
                        std::uint64_t seed, const ArmObserver& observer) {
  const int m = instance.num_players();
  const int k = instance.num_arms();
  if (horizon <= std::max(m, k)) throw ArgumentError("horizon T must exceed max(M, K)");

  const Eigen::MatrixXd gaps = diagnostics(instance).gaps;
  std::vector<Philox4x32> reward_rngs;
  reward_rngs.reserve(m);
  for (int p = 0; p < m; ++p) reward_rngs.emplace_back(seed, stream_id(StreamTag::kReward, p));

  policy.reset(m, k, horizon, seed);

  RegretTrace trace;
  trace.replication_seed = seed;
  trace.cum_regret.resize(static_cast<std::size_t>(horizon));
  trace.per_player_pulls = CountMatrix::Zero(m, k);

  std::vector<int> arms(m);
  std::vector<double> rewards(m);
  double regret = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    policy.select(t, arms);
    if (observer) observer(t, arms);
    for (int p = 0; p < m; ++p) {
      const int i = arms[p];
      if (i < 0 || i >= k) throw IndexError("policy selected an arm out of range");
      rewards[p] = sample_reward(instance, p, i, reward_rngs[p]);
      regret += gaps(p, i);
      trace.per_player_pulls(p, i) += 1;
    }
    policy.observe(arms, rewards);
    trace.cum_regret[static_cast<std::size_t>(t - 1)] = regret;
  }
  return trace;
}

std::vector<std::int64_t> checkpoints(std::int64_t horizon) {
  std::vector<std::int64_t> out;
  const std::int64_t step = std::max<std::int64_t>(1, horizon / 1000);
  for (std::int64_t t = step; t <= horizon; t += step) out.push_back(t);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

Eigen::VectorXd Aggregate::mean() const {
  if (values.rows() == 0) return Eigen::VectorXd::Zero(values.cols());
  return values.colwise().mean().transpose();
}

Eigen::VectorXd Aggregate::stderr_of_mean() const {
  const Eigen::Index n = values.rows();
  if (n < 2) return Eigen::VectorXd::Zero(values.cols());
  const Eigen::RowVectorXd mu = values.colwise().mean();
  const Eigen::RowVectorXd var = (values.rowwise() - mu).array().square().colwise().sum() / double(n - 1);
  return (var.array().sqrt() / std::sqrt(double(n))).transpose();
}

Eigen::VectorXd Aggregate::final_values() const {
  if (values.cols() == 0) return {};
  return values.col(values.cols() - 1);
}

Aggregate run_replicated(const ExperimentConfig& config) {
  config.validate();
  // Construct once up front so a bad preset fails before any work starts.
  make_policy(config.policy);

  Aggregate agg;
  agg.algorithm = config.policy.algorithm;
  agg.eps = effective_eps(config.policy);
  if (config.source.kind == InstanceSource::Kind::kGenerated) agg.num_subpar = config.source.num_subpar;
  agg.horizon = config.horizon;
  agg.base_seed = config.base_seed;
  agg.rounds = checkpoints(config.horizon);

  const int reps = config.num_replications;
  const Eigen::Index cols = static_cast<Eigen::Index>(agg.rounds.size());
  agg.values = Eigen::MatrixXd::Zero(reps, cols);
  agg.seeds.resize(reps);

  const MpmabInstance probe = config.source.materialize(config.base_seed);
  agg.num_players = probe.num_players();
  agg.num_arms = probe.num_arms();

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      try {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
        const MpmabInstance instance = config.source.materialize(seed);
        auto policy = make_policy(config.policy);
        const RegretTrace trace = run_episode(instance, *policy, config.horizon, seed);
        agg.seeds[r] = seed;
        for (Eigen::Index c = 0; c < cols; ++c) {
          agg.values(r, c) = trace.cum_regret[static_cast<std::size_t>(agg.rounds[c] - 1)];
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps;
      }
    }
  };

  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, reps);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return agg;
}

}  // namespace mpmab
