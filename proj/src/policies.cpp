#include "mpmab/policies.hpp"

#include <cmath>

#include "mpmab/corral.hpp"
#include "mpmab/errors.hpp"

namespace mpmab {

StatsTable::StatsTable(int num_players, int num_arms)
    : own_count_(CountMatrix::Zero(num_players, num_arms)),
      own_sum_(Eigen::MatrixXd::Zero(num_players, num_arms)),
      total_count_(CountVector::Zero(num_arms)),
      total_sum_(Eigen::VectorXd::Zero(num_arms)) {}

std::vector<PullStats> StatsTable::player_stats(int player) const {
  std::vector<PullStats> out;
  out.reserve(num_arms());
  for (int i = 0; i < num_arms(); ++i) out.push_back(at(player, i));
  return out;
}

void StatsTable::record(std::span<const int> arms, std::span<const double> rewards) {
  if (arms.size() != static_cast<std::size_t>(num_players()) || rewards.size() != arms.size()) {
    throw ArgumentError("record: need one (arm, reward) pair per player");
  }
  for (int p = 0; p < num_players(); ++p) {
    const int i = arms[p];
    if (i < 0 || i >= num_arms()) throw IndexError("record: arm index out of range");
    own_count_(p, i) += 1;
    own_sum_(p, i) += rewards[p];
    total_count_(i) += 1;
    total_sum_(i) += rewards[p];
  }
}

void StatsTable::clear() {
  own_count_.setZero();
  own_sum_.setZero();
  total_count_.setZero();
  total_sum_.setZero();
}

void update_stats(StatsTable& stats, std::span<const int> arms, std::span<const double> rewards) {
  stats.record(arms, rewards);
}

UcbDecision robustagg_select(std::span<const PullStats> arm_stats, const ConfidenceParams& params) {
  if (arm_stats.empty()) throw ArgumentError("robustagg_select: no arms");
  params.validate();
  const auto k = static_cast<Eigen::Index>(arm_stats.size());
  UcbDecision d{0, Eigen::VectorXd(k), Eigen::VectorXd(k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const ArmIndex idx = robustagg_index(arm_stats[i], params);
    d.per_arm_ucb(i) = idx.ucb;
    d.per_arm_lambda(i) = idx.lambda;
    if (idx.ucb > d.per_arm_ucb(d.chosen_arm)) d.chosen_arm = static_cast<int>(i);
  }
  return d;
}

UcbDecision inducb_select(std::span<const PullStats> arm_stats, std::int64_t round, double bonus) {
  if (arm_stats.empty()) throw ArgumentError("inducb_select: no arms");
  if (round < 1) throw ArgumentError("inducb_select: round must be >= 1");
  const auto k = static_cast<Eigen::Index>(arm_stats.size());
  UcbDecision d{0, Eigen::VectorXd(k), Eigen::VectorXd::Ones(k)};
  const double log_t = std::log(static_cast<double>(round));
  int untried = -1;
  for (Eigen::Index i = 0; i < k; ++i) {
    const PullStats& s = arm_stats[i];
    if (s.own_count == 0) {
      d.per_arm_ucb(i) = std::numeric_limits<double>::infinity();
      if (untried < 0) untried = static_cast<int>(i);
      continue;
    }
    const double n = static_cast<double>(s.own_count);
    d.per_arm_ucb(i) = s.own_sum / n + std::sqrt(bonus * log_t / n);
    if (untried < 0 && d.per_arm_ucb(i) > d.per_arm_ucb(d.chosen_arm)) d.chosen_arm = static_cast<int>(i);
  }
  if (untried >= 0) d.chosen_arm = untried;
  return d;
}

RobustAggPolicy::RobustAggPolicy(std::string name, double coeff, double eps, double rho)
    : name_(std::move(name)) {
  params_.coeff = coeff;
  params_.eps = eps;
  params_.rho = rho;
  params_.validate();
}

void RobustAggPolicy::reset(int num_players, int num_arms, std::int64_t horizon, std::uint64_t) {
  if (horizon < 2) throw ArgumentError("horizon must be at least 2");
  params_.ln_horizon = std::log(static_cast<double>(horizon));
  stats_ = StatsTable(num_players, num_arms);
}

void RobustAggPolicy::restart() { stats_.clear(); }

void RobustAggPolicy::set_rho(double rho) {
  if (!(rho >= 1.0)) throw ArgumentError("rho must be at least 1");
  params_.rho = rho;
}

void RobustAggPolicy::select(std::int64_t, std::span<int> arms) {
  const int k = stats_.num_arms();
  for (int p = 0; p < stats_.num_players(); ++p) {
    int best = 0;
    double best_ucb = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      const double ucb = robustagg_index(stats_.at(p, i), params_).ucb;
      if (ucb > best_ucb) {
        best_ucb = ucb;
        best = i;
      }
    }
    arms[p] = best;
  }
}

void RobustAggPolicy::observe(std::span<const int> arms, std::span<const double> rewards) {
  stats_.record(arms, rewards);
}

void IndUcbPolicy::reset(int num_players, int num_arms, std::int64_t, std::uint64_t) {
  stats_ = StatsTable(num_players, num_arms);
}

void IndUcbPolicy::select(std::int64_t round, std::span<int> arms) {
  const int k = stats_.num_arms();
  const double log_t = std::log(static_cast<double>(round));
  const auto& counts = stats_.own_counts();
  const auto& sums = stats_.own_sums();
  for (int p = 0; p < stats_.num_players(); ++p) {
    int best = -1;
    double best_ucb = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      const auto n = counts(p, i);
      if (n == 0) {
        best = i;
        break;
      }
      const double nd = static_cast<double>(n);
      const double ucb = sums(p, i) / nd + std::sqrt(bonus_ * log_t / nd);
      if (ucb > best_ucb) {
        best_ucb = ucb;
        best = i;
      }
    }
    arms[p] = best;
  }
}

void IndUcbPolicy::observe(std::span<const int> arms, std::span<const double> rewards) {
  stats_.record(arms, rewards);
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {"robustagg", "robustagg-adapted", "naive-agg", "ind-ucb",
                                                 "robustagg-agnostic"};
  return names;
}

double effective_eps(const PolicySpec& spec) {
  if (spec.algorithm == "naive-agg" || spec.algorithm == "ind-ucb") return 0.0;
  return spec.eps;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  const std::string& a = spec.algorithm;
  if (a == "robustagg") {
    return std::make_unique<RobustAggPolicy>(a, spec.coeff.value_or(kTheoryCoeff), spec.eps);
  }
  if (a == "robustagg-adapted") {
    return std::make_unique<RobustAggPolicy>(a, spec.coeff.value_or(kAdaptedCoeff), spec.eps);
  }
  if (a == "naive-agg") {
    return std::make_unique<RobustAggPolicy>(a, spec.coeff.value_or(kAdaptedCoeff), 0.0);
  }
  if (a == "ind-ucb") return std::make_unique<IndUcbPolicy>(spec.ucb_bonus);
  if (a == "robustagg-agnostic") {
    CorralOverrides o;
    o.num_base = spec.num_base;
    o.mix_gamma = spec.mix_gamma;
    o.lr_growth = spec.lr_growth;
    o.normalize_loss = spec.normalize_master_loss;
    return std::make_unique<AgnosticPolicy>(spec.coeff.value_or(kAdaptedCoeff), o);
  }
  throw ArgumentError("unknown algorithm: " + a);
}

}  // namespace mpmab
