#include "mpmab/env.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mpmab/errors.hpp"

namespace mpmab {

std::string_view to_string(RewardKind kind) {
  return kind == RewardKind::kBernoulli ? "bernoulli" : "pointmass";
}

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "bernoulli") return RewardKind::kBernoulli;
  if (name == "pointmass") return RewardKind::kPointMass;
  throw ArgumentError("unknown reward kind: " + std::string(name));
}

MpmabInstance::MpmabInstance(Eigen::MatrixXd means, RewardKind kind)
    : means_(std::move(means)), kind_(kind) {
  if (means_.rows() < 1 || means_.cols() < 1) {
    throw ArgumentError("instance needs at least one player and one arm");
  }
  if (!means_.allFinite() || means_.minCoeff() < 0.0 || means_.maxCoeff() > 1.0) {
    throw ArgumentError("instance means must lie in [0, 1]");
  }
}

std::vector<int> InstanceDiagnostics::subpar_arms(double eps) const {
  if (!(eps >= 0.0)) throw ArgumentError("eps must be non-negative");
  std::vector<int> arms;
  for (Eigen::Index i = 0; i < gaps.cols(); ++i) {
    if (gap_max(i) > 5.0 * eps) arms.push_back(static_cast<int>(i));
  }
  return arms;
}

InstanceDiagnostics diagnostics(const MpmabInstance& instance) {
  const Eigen::MatrixXd& mu = instance.means();
  InstanceDiagnostics d;
  d.optimal_means = mu.rowwise().maxCoeff();
  d.gaps = (-mu).colwise() + d.optimal_means;
  d.gap_min = d.gaps.colwise().minCoeff().transpose();
  d.gap_max = d.gaps.colwise().maxCoeff().transpose();
  d.dissimilarity = (mu.colwise().maxCoeff() - mu.colwise().minCoeff()).maxCoeff();
  return d;
}

std::vector<int> subpar_arms(const MpmabInstance& instance, double eps) {
  return diagnostics(instance).subpar_arms(eps);
}

double sample_reward(const MpmabInstance& instance, int player, int arm, Philox4x32& rng) {
  if (player < 0 || player >= instance.num_players() || arm < 0 || arm >= instance.num_arms()) {
    throw IndexError("sample_reward: (player " + std::to_string(player) + ", arm " +
                     std::to_string(arm) + ") out of range");
  }
  const double mu = instance.mean(player, arm);
  if (instance.reward_kind() == RewardKind::kPointMass) return mu;
  return rng.uniform01() < mu ? 1.0 : 0.0;
}

MpmabInstance generate_instance(int num_players, int num_arms, int num_subpar, double eps,
                                Philox4x32& rng, RewardKind kind) {
  if (num_players < 1 || num_arms < 1) throw ArgumentError("need M >= 1 and K >= 1");
  if (num_subpar < 0 || num_subpar >= num_arms) {
    throw ArgumentError("number of subpar arms must lie in [0, K-1]");
  }
  if (!(eps > 0.0) || eps > 0.2) throw ArgumentError("generator requires eps in (0, 0.2]");

  constexpr double kBase = 0.8;
  const int competitive = num_arms - num_subpar;
  Eigen::MatrixXd mu(num_players, num_arms);

  for (int i = 0; i < competitive; ++i) mu(0, i) = rng.uniform(kBase, kBase + eps);
  const double best = mu.row(0).head(competitive).maxCoeff();
  const double ceiling = best - 5.0 * eps;
  if (num_subpar > 0 && ceiling <= 0.0) {
    throw ArgumentError("degenerate subpar interval: d - 5 eps <= 0");
  }
  for (int i = competitive; i < num_arms; ++i) mu(0, i) = rng.uniform(0.0, ceiling);

  for (int p = 1; p < num_players; ++p) {
    for (int i = 0; i < num_arms; ++i) {
      const double lo = std::max(0.0, mu(0, i) - eps / 2.0);
      const double hi = std::min(mu(0, i) + eps / 2.0, 1.0);
      mu(p, i) = rng.uniform(lo, hi);
    }
  }
  return MpmabInstance(std::move(mu), kind);
}

MpmabInstance example1_instance(int num_players, double delta, RewardKind kind) {
  if (num_players < 1) throw ArgumentError("need at least one player");
  if (!(delta > 0.0) || delta > 0.5) throw ArgumentError("delta must lie in (0, 1/2]");
  Eigen::MatrixXd mu(num_players, 2);
  mu.col(0).setConstant(0.5 + delta);
  mu.col(1).setConstant(0.5);
  return MpmabInstance(std::move(mu), kind);
}

std::string to_json(const MpmabInstance& instance) {
  nlohmann::json doc;
  doc["num_players"] = instance.num_players();
  doc["num_arms"] = instance.num_arms();
  doc["reward_kind"] = std::string(to_string(instance.reward_kind()));
  auto rows = nlohmann::json::array();
  for (int p = 0; p < instance.num_players(); ++p) {
    auto row = nlohmann::json::array();
    for (int i = 0; i < instance.num_arms(); ++i) row.push_back(instance.mean(p, i));
    rows.push_back(std::move(row));
  }
  doc["means"] = std::move(rows);
  return doc.dump(2);
}

MpmabInstance instance_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("instance file is not valid JSON: ") + e.what());
  }
  for (const char* key : {"num_players", "num_arms", "reward_kind", "means"}) {
    if (!doc.contains(key)) throw ArgumentError(std::string("instance file lacks \"") + key + "\"");
  }
  if (!doc["num_players"].is_number_integer() || !doc["num_arms"].is_number_integer() ||
      !doc["reward_kind"].is_string() || !doc["means"].is_array()) {
    throw ArgumentError("instance file has mistyped fields");
  }
  const int players = doc["num_players"].get<int>();
  const int arms = doc["num_arms"].get<int>();
  if (players < 1 || arms < 1) throw ArgumentError("instance file has non-positive dimensions");
  const auto& rows = doc["means"];
  if (rows.size() != static_cast<std::size_t>(players)) {
    throw ArgumentError("means has wrong number of rows");
  }
  Eigen::MatrixXd mu(players, arms);
  for (int p = 0; p < players; ++p) {
    const auto& row = rows[p];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(arms)) {
      throw ArgumentError("means row " + std::to_string(p) + " has wrong length");
    }
    for (int i = 0; i < arms; ++i) {
      if (!row[i].is_number()) throw ArgumentError("means entries must be numbers");
      mu(p, i) = row[i].get<double>();
    }
  }
  return MpmabInstance(std::move(mu), parse_reward_kind(doc["reward_kind"].get<std::string>()));
}

void save_instance(const MpmabInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write instance file: " + path.string());
  out << to_json(instance) << '\n';
  if (!out) throw IoError("failed writing instance file: " + path.string());
}

MpmabInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read instance file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json(buffer.str());
}

}  // namespace mpmab
