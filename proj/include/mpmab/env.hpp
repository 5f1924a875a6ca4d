#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mpmab/rng.hpp"

namespace mpmab {

enum class RewardKind { kBernoulli, kPointMass };

std::string_view to_string(RewardKind kind);
RewardKind parse_reward_kind(std::string_view name);

/// Ground truth of an ε-MPMAB problem: one row of arm means per player.
///
/// Immutable after construction; every mean lies in [0, 1].
class MpmabInstance {
 public:
  MpmabInstance(Eigen::MatrixXd means, RewardKind kind = RewardKind::kBernoulli);

  int num_players() const { return static_cast<int>(means_.rows()); }
  int num_arms() const { return static_cast<int>(means_.cols()); }
  RewardKind reward_kind() const { return kind_; }
  const Eigen::MatrixXd& means() const { return means_; }
  double mean(int player, int arm) const { return means_(player, arm); }

  friend bool operator==(const MpmabInstance& a, const MpmabInstance& b) {
    return a.kind_ == b.kind_ && a.means_.rows() == b.means_.rows() &&
           a.means_.cols() == b.means_.cols() && a.means_ == b.means_;
  }

 private:
  Eigen::MatrixXd means_;
  RewardKind kind_;
};

/// Gap structure of an instance.  Vectors are indexed by player (optimal_means)
/// or by arm (gap_min, gap_max); gaps is players x arms.
struct InstanceDiagnostics {
  double dissimilarity = 0.0;
  Eigen::VectorXd optimal_means;
  Eigen::MatrixXd gaps;
  Eigen::VectorXd gap_min;
  Eigen::VectorXd gap_max;

  /// Arms with some player's gap strictly above 5 * eps.
  std::vector<int> subpar_arms(double eps) const;
};

InstanceDiagnostics diagnostics(const MpmabInstance& instance);

/// I_eps = { i : exists p, mu_*^p - mu_i^p > 5 eps }, ascending.
std::vector<int> subpar_arms(const MpmabInstance& instance, double eps);

/// Draws one reward for (player, arm).  Bernoulli instances consume exactly one
/// uniform from `rng`; point-mass instances consume nothing.
double sample_reward(const MpmabInstance& instance, int player, int arm, Philox4x32& rng);

/// Random instance with exactly `num_subpar` subpar arms (the last ones) and
/// dissimilarity below `eps`.  Player 1's competitive arms are drawn from
/// U[0.8, 0.8 + eps), its subpar arms from U[0, d - 5 eps) where d is the best
/// competitive mean, and every other player perturbs player 1 within eps / 2.
MpmabInstance generate_instance(int num_players, int num_arms, int num_subpar, double eps,
                                Philox4x32& rng, RewardKind kind = RewardKind::kBernoulli);

/// Two arms, mu_1 = 1/2 + delta and mu_2 = 1/2 for every player.
MpmabInstance example1_instance(int num_players, double delta,
                                RewardKind kind = RewardKind::kBernoulli);

// JSON instance files: {"num_players", "num_arms", "reward_kind", "means"}.
std::string to_json(const MpmabInstance& instance);
MpmabInstance instance_from_json(std::string_view text);
void save_instance(const MpmabInstance& instance, const std::filesystem::path& path);
MpmabInstance load_instance(const std::filesystem::path& path);

}  // namespace mpmab
