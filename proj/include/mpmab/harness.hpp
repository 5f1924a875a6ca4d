#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmab/env.hpp"
#include "mpmab/policies.hpp"

namespace mpmab {

struct InstanceSource {
  enum class Kind { kGenerated, kExample1, kFile };

  Kind kind = Kind::kGenerated;
  int num_players = 20;
  int num_arms = 10;
  int num_subpar = 0;
  double eps = 0.15;          ///< generator dissimilarity
  double delta = 0.05;        ///< example1 gap
  RewardKind reward_kind = RewardKind::kBernoulli;
  std::filesystem::path file;

  /// Instance for one replication.  Generated sources draw a fresh instance
  /// from the replication seed; other sources ignore it.
  MpmabInstance materialize(std::uint64_t replication_seed) const;
};

struct ExperimentConfig {
  std::int64_t horizon = 100000;
  PolicySpec policy;
  InstanceSource source;
  int num_replications = 1;
  std::uint64_t base_seed = 0;
  int threads = 0;  ///< 0: hardware concurrency

  void validate() const;
};

struct RegretTrace {
  std::vector<double> cum_regret;  ///< collective pseudo-regret after each round
  CountMatrix per_player_pulls;    ///< n_i^p(T)
  std::uint64_t replication_seed = 0;
};

/// Called after every round's selection with the arms about to be pulled.
using ArmObserver = std::function<void(std::int64_t round, std::span<const int> arms)>;

/// Simulates the synchronous protocol for `horizon` rounds.  Player p's
/// rewards come from stream (seed, reward:p); the policy is reset with `seed`.
RegretTrace run_episode(const MpmabInstance& instance, Policy& policy, std::int64_t horizon,
                        std::uint64_t seed, const ArmObserver& observer = {});

/// Rounds at which traces are recorded: every max(1, T/1000) rounds plus T.
std::vector<std::int64_t> checkpoints(std::int64_t horizon);

/// Replicated results at checkpoints.  values is replications x checkpoints.
struct Aggregate {
  std::string algorithm;
  double eps = 0.0;
  std::optional<int> num_subpar;
  int num_players = 0;
  int num_arms = 0;
  std::int64_t horizon = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::int64_t> rounds;
  std::vector<std::uint64_t> seeds;
  Eigen::MatrixXd values;

  Eigen::VectorXd mean() const;
  /// Standard error of the mean across replications (0 for one replication).
  Eigen::VectorXd stderr_of_mean() const;
  /// Final-round values, one per replication.
  Eigen::VectorXd final_values() const;
};

/// Runs num_replications episodes (replication r uses seed base_seed + r) in
/// parallel and reduces them in replication order.
Aggregate run_replicated(const ExperimentConfig& config);

}  // namespace mpmab
