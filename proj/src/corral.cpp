#include "mpmab/corral.hpp"

#include <cmath>
#include <limits>

#include "mpmab/errors.hpp"

namespace mpmab {

CorralConfig CorralConfig::make(int num_players, std::int64_t horizon, const CorralOverrides& overrides) {
  if (num_players < 1) throw ArgumentError("corral: need at least one player");
  if (horizon < 2) throw ArgumentError("corral: horizon must be at least 2");
  CorralConfig c;
  const double mt = static_cast<double>(num_players) * static_cast<double>(horizon);
  c.horizon = horizon;
  c.num_base = overrides.num_base.value_or(static_cast<int>(std::ceil(std::log2(mt))) + 1);
  if (c.num_base < 1) throw ArgumentError("corral: need at least one base learner");
  for (int b = 0; b < c.num_base; ++b) c.eps_grid.push_back(std::ldexp(1.0, -b));
  c.master_lr = 1.0 / (num_players * std::sqrt(static_cast<double>(horizon)));
  c.mix_gamma = overrides.mix_gamma.value_or(1.0 / static_cast<double>(horizon));
  c.lr_growth = overrides.lr_growth.value_or(std::exp(1.0 / std::log(static_cast<double>(horizon))));
  c.normalize_loss = overrides.normalize_loss;
  if (!(c.mix_gamma >= 0.0 && c.mix_gamma < 1.0)) throw ArgumentError("corral: gamma must lie in [0, 1)");
  if (!(c.lr_growth >= 1.0)) throw ArgumentError("corral: beta must be at least 1");
  return c;
}

Eigen::VectorXd logbarrier_omd_step(const Eigen::VectorXd& q, const Eigen::VectorXd& loss,
                                    const Eigen::VectorXd& lr, double gamma) {
  const Eigen::Index n = q.size();
  if (n < 1 || loss.size() != n || lr.size() != n) throw ArgumentError("omd: size mismatch");
  if (!(q.minCoeff() > 0.0)) throw ArgumentError("omd: q must be strictly positive");
  if (!(lr.minCoeff() > 0.0)) throw ArgumentError("omd: learning rates must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("omd: gamma must lie in [0, 1)");

  const Eigen::ArrayXd inv_q = q.array().inverse();
  const Eigen::ArrayXd lr_a = lr.array();
  const Eigen::ArrayXd loss_a = loss.array();

  Eigen::ArrayXd next;
  if (loss_a.maxCoeff() == loss_a.minCoeff()) {
    next = q.array();
  } else {
    // q'_b(nu) is increasing and convex in nu up to the first pole.
    const double pole = (inv_q / lr_a + loss_a).minCoeff();
    auto solve_at = [&](double nu) { return (inv_q + lr_a * (loss_a - nu)).inverse(); };
    auto residual = [&](double nu) {
      if (nu >= pole) return std::numeric_limits<double>::infinity();
      const Eigen::ArrayXd v = solve_at(nu);
      return (v > 0.0).all() ? v.sum() - 1.0 : std::numeric_limits<double>::infinity();
    };

    double lo = loss_a.minCoeff();
    double hi = std::min(loss_a.maxCoeff(), pole);
    double nu = lo;
    double f = residual(nu);
    bool converged = std::abs(f) <= 1e-12;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
      if (f < 0.0) lo = nu; else hi = nu;
      double candidate = 0.5 * (lo + hi);
      if (std::isfinite(f)) {
        const Eigen::ArrayXd v = solve_at(nu);
        const double slope = (lr_a * v.square()).sum();
        const double newton = nu - f / slope;
        if (slope > 0.0 && newton > lo && newton < hi) candidate = newton;
      }
      if (candidate == nu) break;
      nu = candidate;
      f = residual(nu);
      converged = std::abs(f) <= 1e-12;
    }
    if (!converged && !(std::isfinite(f) && std::abs(f) <= 1e-9)) {
      throw NumericError("log-barrier OMD normalizer did not converge");
    }
    next = solve_at(nu);
    next /= next.sum();
  }
  return ((1.0 - gamma) * next + gamma / static_cast<double>(n)).matrix();
}

CorralMaster::CorralMaster(CorralConfig config, std::vector<std::unique_ptr<BaseLearner>> learners)
    : config_(std::move(config)) {
  if (learners.size() != static_cast<std::size_t>(config_.num_base)) {
    throw ArgumentError("corral: learner count must equal B");
  }
  state_.base_states = std::move(learners);
}

void CorralMaster::reset(int num_players, int num_arms, std::uint64_t seed) {
  const int b = config_.num_base;
  num_players_ = num_players;
  state_.q = Eigen::VectorXd::Constant(b, 1.0 / b);
  state_.per_learner_lr = Eigen::VectorXd::Constant(b, config_.master_lr);
  state_.rho = Eigen::VectorXd::Constant(b, std::min(config_.initial_rho(), config_.rho_cap()));
  state_.restart_count = Eigen::VectorXi::Zero(b);
  for (int i = 0; i < b; ++i) {
    state_.base_states[i]->reset(num_players, num_arms, config_.horizon, seed);
    state_.base_states[i]->restart(state_.rho(i));
  }
  rng_ = Philox4x32(seed, stream_id(StreamTag::kPolicy));
  proposals_ = Eigen::MatrixXi::Zero(num_players, b);
  weighted_.assign(num_players, 0.0);
  last_choice_ = 0;
}

std::span<const int> CorralMaster::proposal(int b) const {
  return {proposals_.col(b).data(), static_cast<std::size_t>(num_players_)};
}

std::span<const int> CorralMaster::propose(std::int64_t round) {
  const int b_count = config_.num_base;
  for (int b = 0; b < b_count; ++b) {
    state_.base_states[b]->select(round, {proposals_.col(b).data(), static_cast<std::size_t>(num_players_)});
  }
  const double u = rng_.uniform01();
  double acc = 0.0;
  last_choice_ = b_count - 1;
  for (int b = 0; b < b_count; ++b) {
    acc += state_.q(b);
    if (u < acc) {
      last_choice_ = b;
      break;
    }
  }
  return proposal(last_choice_);
}

void CorralMaster::feedback(std::span<const int> arms, std::span<const double> rewards) {
  const int b_count = config_.num_base;
  const int chosen = last_choice_;
  const double q_chosen = state_.q(chosen);
  for (int p = 0; p < num_players_; ++p) {
    if (arms[p] != proposals_(p, chosen)) throw ArgumentError("corral: feedback arms differ from proposal");
  }

  double loss = 0.0;
  for (int p = 0; p < num_players_; ++p) loss += 1.0 - rewards[p];
  if (config_.normalize_loss) loss /= num_players_;

  for (int b = 0; b < b_count; ++b) {
    for (int p = 0; p < num_players_; ++p) weighted_[p] = b == chosen ? rewards[p] / q_chosen : 0.0;
    state_.base_states[b]->observe(proposal(b), weighted_);
  }

  Eigen::VectorXd losses = Eigen::VectorXd::Zero(b_count);
  losses(chosen) = loss / q_chosen;
  state_.q = logbarrier_omd_step(state_.q, losses, state_.per_learner_lr, config_.mix_gamma);
  for (int b = 0; b < b_count; ++b) maybe_restart(b);
}

bool CorralMaster::maybe_restart(int b) {
  const double cap = config_.rho_cap();
  const double inv_q = 1.0 / state_.q(b);
  if (!(inv_q > state_.rho(b)) || state_.rho(b) >= cap) return false;
  double rho = config_.initial_rho();
  while (rho < 2.0 * inv_q && rho < cap) rho *= 2.0;
  state_.rho(b) = std::min(rho, cap);
  state_.per_learner_lr(b) *= config_.lr_growth;
  state_.restart_count(b) += 1;
  state_.base_states[b]->restart(state_.rho(b));
  return true;
}

std::vector<int> corral_round(CorralMaster& master, const MpmabInstance& instance, std::int64_t round,
                              std::span<Philox4x32> reward_rngs) {
  const auto proposed = master.propose(round);
  std::vector<int> arms(proposed.begin(), proposed.end());
  std::vector<double> rewards(arms.size());
  for (std::size_t p = 0; p < arms.size(); ++p) {
    rewards[p] = sample_reward(instance, static_cast<int>(p), arms[p], reward_rngs[p]);
  }
  master.feedback(arms, rewards);
  return arms;
}

void AgnosticPolicy::reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t seed) {
  CorralConfig config = CorralConfig::make(num_players, horizon, overrides_);
  std::vector<std::unique_ptr<BaseLearner>> learners;
  for (double eps : config.eps_grid) {
    learners.push_back(std::make_unique<RobustAggLearner>(coeff_, eps, config.initial_rho()));
  }
  master_ = std::make_unique<CorralMaster>(std::move(config), std::move(learners));
  master_->reset(num_players, num_arms, seed);
}

void AgnosticPolicy::select(std::int64_t round, std::span<int> arms) {
  const auto proposed = master_->propose(round);
  std::copy(proposed.begin(), proposed.end(), arms.begin());
}

void AgnosticPolicy::observe(std::span<const int> arms, std::span<const double> rewards) {
  master_->feedback(arms, rewards);
}

}  // namespace mpmab
