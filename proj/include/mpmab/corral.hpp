#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mpmab/env.hpp"
#include "mpmab/policies.hpp"
#include "mpmab/rng.hpp"

namespace mpmab {

struct CorralOverrides {
  std::optional<int> num_base;
  std::optional<double> mix_gamma;
  std::optional<double> lr_growth;
  bool normalize_loss = false;
};

/// Master configuration for RobustAgg-Agnostic.
struct CorralConfig {
  int num_base = 1;               ///< B = ceil(log2(M T)) + 1
  std::vector<double> eps_grid;   ///< eps_b = 2^{-b}, b = 0..B-1
  double master_lr = 1.0;         ///< eta = 1 / (M sqrt T)
  double mix_gamma = 0.0;         ///< uniform-mixing floor, default 1 / T
  double lr_growth = 1.0;         ///< beta = exp(1 / ln T)
  bool normalize_loss = false;    ///< divide the master loss by M
  std::int64_t horizon = 2;

  static CorralConfig make(int num_players, std::int64_t horizon, const CorralOverrides& overrides = {});

  double initial_rho() const { return 2.0 * num_base; }
  double rho_cap() const { return static_cast<double>(num_base) * static_cast<double>(horizon); }
};

/// A base learner the master can restart with a new importance scale.
class BaseLearner : public Policy {
 public:
  virtual void restart(double rho) = 0;
};

/// RobustAgg(eps_b) as a Corral base learner; rho feeds its widths.
class RobustAggLearner final : public BaseLearner {
 public:
  RobustAggLearner(double coeff, double eps, double rho) : inner_("robustagg", coeff, eps, rho) {}

  std::string name() const override { return inner_.name(); }
  void reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) override {
    inner_.reset(num_players, num_arms, horizon, seed);
  }
  void select(std::int64_t round, std::span<int> arms) override { inner_.select(round, arms); }
  void observe(std::span<const int> arms, std::span<const double> rewards) override {
    inner_.observe(arms, rewards);
  }
  void restart(double rho) override {
    inner_.set_rho(rho);
    inner_.restart();
  }

  const RobustAggPolicy& policy() const { return inner_; }

 private:
  RobustAggPolicy inner_;
};

struct CorralState {
  Eigen::VectorXd q;               ///< sampling distribution over base learners
  Eigen::VectorXd per_learner_lr;
  Eigen::VectorXd rho;
  Eigen::VectorXi restart_count;
  std::vector<std::unique_ptr<BaseLearner>> base_states;
};

/// Log-barrier online mirror descent step with uniform mixing.
///
/// Solves 1/q'_b = 1/q_b + lr_b (loss_b - nu) for the normalizer nu making q'
/// a probability vector, then returns (1 - gamma) q' + gamma / B.
Eigen::VectorXd logbarrier_omd_step(const Eigen::VectorXd& q, const Eigen::VectorXd& loss,
                                    const Eigen::VectorXd& lr, double gamma);

/// Corral master over B base learners fed importance-weighted rewards.
///
/// Every learner proposes arms each round and observes its own proposals; only
/// the sampled learner's rewards are non-zero, scaled by 1/q_b, so each learner
/// interacts with an unbiased importance-weighted environment.
class CorralMaster {
 public:
  CorralMaster(CorralConfig config, std::vector<std::unique_ptr<BaseLearner>> learners);

  void reset(int num_players, int num_arms, std::uint64_t seed);

  /// Collects proposals, samples b_t ~ q and returns the sampled learner's arms.
  std::span<const int> propose(std::int64_t round);

  /// Importance-weighted feedback, OMD update and restarts for the round.
  void feedback(std::span<const int> arms, std::span<const double> rewards);

  /// Restarts learner b when 1/q_b exceeds its rho.  Returns true on restart.
  bool maybe_restart(int b);

  int last_choice() const { return last_choice_; }
  const CorralConfig& config() const { return config_; }
  const CorralState& state() const { return state_; }
  std::span<const int> proposal(int b) const;

 private:
  CorralConfig config_;
  CorralState state_;
  Philox4x32 rng_;
  int num_players_ = 0;
  Eigen::MatrixXi proposals_;  // players x learners
  std::vector<double> weighted_;
  int last_choice_ = 0;
};

/// One agnostic round against a live environment: propose, pull each player's
/// arm once, feed back.  Returns the arms pulled.
std::vector<int> corral_round(CorralMaster& master, const MpmabInstance& instance, std::int64_t round,
                              std::span<Philox4x32> reward_rngs);

/// RobustAgg-Agnostic as a harness policy: Corral over RobustAgg(eps_b).
class AgnosticPolicy : public Policy {
 public:
  AgnosticPolicy(double coeff, CorralOverrides overrides = {}) : coeff_(coeff), overrides_(overrides) {}

  std::string name() const override { return "robustagg-agnostic"; }
  void reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) override;
  void select(std::int64_t round, std::span<int> arms) override;
  void observe(std::span<const int> arms, std::span<const double> rewards) override;

  const CorralMaster& master() const { return *master_; }

 private:
  double coeff_;
  CorralOverrides overrides_;
  std::unique_ptr<CorralMaster> master_;
};

}  // namespace mpmab
