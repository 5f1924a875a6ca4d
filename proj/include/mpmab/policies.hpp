#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmab/estimators.hpp"

namespace mpmab {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Shared-feedback statistics for all players.
///
/// Own counts and sums are stored per (player, arm); the auxiliary side
/// (m_i^p and its reward sum) is the arm total minus the player's own share.
class StatsTable {
 public:
  StatsTable() = default;
  StatsTable(int num_players, int num_arms);

  int num_players() const { return static_cast<int>(own_count_.rows()); }
  int num_arms() const { return static_cast<int>(own_count_.cols()); }

  PullStats at(int player, int arm) const {
    return {own_count_(player, arm), own_sum_(player, arm),
            total_count_(arm) - own_count_(player, arm), total_sum_(arm) - own_sum_(player, arm)};
  }

  /// Per-arm statistics of one player.
  std::vector<PullStats> player_stats(int player) const;

  /// Applies one synchronous round: player p pulled arms[p] and saw rewards[p].
  void record(std::span<const int> arms, std::span<const double> rewards);

  void clear();

  const CountMatrix& own_counts() const { return own_count_; }
  const Eigen::MatrixXd& own_sums() const { return own_sum_; }

 private:
  CountMatrix own_count_;
  Eigen::MatrixXd own_sum_;
  CountVector total_count_;
  Eigen::VectorXd total_sum_;
};

/// Free-function form of the round update.
void update_stats(StatsTable& stats, std::span<const int> arms, std::span<const double> rewards);

struct UcbDecision {
  int chosen_arm = 0;
  Eigen::VectorXd per_arm_ucb;
  Eigen::VectorXd per_arm_lambda;
};

/// UCB and its weight for one (player, arm) under robust aggregation.
struct ArmIndex {
  double ucb;
  double lambda;
};

inline ArmIndex robustagg_index(const PullStats& stats, const ConfidenceParams& params) {
  const std::int64_t n = stats.own_bar(), m = stats.other_bar();
  const double lambda = lambda_star(n, m, params);
  return {kappa(stats, lambda) + width(n, m, lambda, params), lambda};
}

/// One player's RobustAgg decision: argmax of kappa(lambda*) + F(lambda*),
/// lowest index on ties.
UcbDecision robustagg_select(std::span<const PullStats> arm_stats, const ConfidenceParams& params);

/// UCB-1 on the player's own data.  Untried arms are played first, in index
/// order; afterwards argmax of mean + sqrt(bonus * ln t / n).
UcbDecision inducb_select(std::span<const PullStats> arm_stats, std::int64_t round, double bonus = 2.0);

/// A multi-player policy driven by the synchronous protocol: select() for all
/// players from statistics through the previous round, then observe() the
/// round's pulls.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  virtual void reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) = 0;
  /// Fills arms[p] for every player.  `round` is 1-based.
  virtual void select(std::int64_t round, std::span<int> arms) = 0;
  virtual void observe(std::span<const int> arms, std::span<const double> rewards) = 0;
};

/// RobustAgg(eps) with width coefficient c and importance scale rho.
/// Covers the theory variant (c = 8 sqrt 13), the adapted variant (c = sqrt 2)
/// and Naive-Agg (c = sqrt 2, eps = 0).
class RobustAggPolicy : public Policy {
 public:
  RobustAggPolicy(std::string name, double coeff, double eps, double rho = 1.0);

  std::string name() const override { return name_; }
  void reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) override;
  void select(std::int64_t round, std::span<int> arms) override;
  void observe(std::span<const int> arms, std::span<const double> rewards) override;

  /// Clears statistics, keeping dimensions and horizon.
  void restart();
  void set_rho(double rho);

  const ConfidenceParams& params() const { return params_; }
  const StatsTable& stats() const { return stats_; }

 private:
  std::string name_;
  ConfidenceParams params_;
  StatsTable stats_;
};

class IndUcbPolicy : public Policy {
 public:
  explicit IndUcbPolicy(double bonus = 2.0) : bonus_(bonus) {}

  std::string name() const override { return "ind-ucb"; }
  void reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) override;
  void select(std::int64_t round, std::span<int> arms) override;
  void observe(std::span<const int> arms, std::span<const double> rewards) override;

  const StatsTable& stats() const { return stats_; }

 private:
  double bonus_;
  StatsTable stats_;
};

/// Named preset plus overrides, as parsed from the CLI or a config file.
struct PolicySpec {
  std::string algorithm = "robustagg-adapted";
  double eps = 0.15;
  std::optional<double> coeff;        ///< overrides the preset's width coefficient
  double ucb_bonus = 2.0;             ///< ind-ucb: bonus = sqrt(ucb_bonus * ln t / n)
  std::optional<int> num_base;        ///< agnostic: B
  std::optional<double> mix_gamma;    ///< agnostic: uniform-mixing floor
  std::optional<double> lr_growth;    ///< agnostic: beta
  bool normalize_master_loss = false; ///< agnostic: divide master loss by M
};

const std::vector<std::string>& policy_names();

/// Effective eps for reporting (0 for naive-agg and ind-ucb).
double effective_eps(const PolicySpec& spec);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

}  // namespace mpmab
