#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "mpmab/errors.hpp"

namespace mpmab {

/// 8 * sqrt(13): coefficient under which the confidence widths are provably valid.
inline constexpr double kTheoryCoeff = 8.0 * 3.605551275463989293119221;
/// sqrt(2): the UCB-1 constant used by the adapted variant.
inline constexpr double kAdaptedCoeff = std::numbers::sqrt2;

/// Parameters of the aggregated confidence width
///   F(n, m, lambda) = coeff * sqrt(rho * ln_horizon * (lambda^2/n + (1-lambda)^2/m))
///                     + (1 - lambda) * eps.
template <typename Scalar>
struct BasicConfidenceParams {
  Scalar coeff = Scalar(kTheoryCoeff);
  Scalar ln_horizon = Scalar(1);
  Scalar eps = Scalar(0);
  Scalar rho = Scalar(1);

  void validate() const {
    if (!(coeff > 0)) throw ArgumentError("width coefficient must be positive");
    if (!(ln_horizon > 0)) throw ArgumentError("ln T must be positive");
    if (!(eps >= 0)) throw ArgumentError("eps must be non-negative");
    if (!(rho >= 1)) throw ArgumentError("rho must be at least 1");
  }

  /// coeff^2 * rho * ln T; the variance scale shared by width and lambda_star.
  Scalar variance_scale() const { return coeff * coeff * rho * ln_horizon; }
};

using ConfidenceParams = BasicConfidenceParams<double>;

/// Per (player, arm) sufficient statistics: own pulls and pulls by everyone else.
struct PullStats {
  std::int64_t own_count = 0;
  double own_sum = 0.0;
  std::int64_t other_count = 0;
  double other_sum = 0.0;

  std::int64_t own_bar() const { return std::max<std::int64_t>(1, own_count); }
  std::int64_t other_bar() const { return std::max<std::int64_t>(1, other_count); }
};

/// Confidence width F(n_bar, m_bar, lambda, eps).
template <typename Scalar>
Scalar width(std::int64_t n_bar, std::int64_t m_bar, Scalar lambda,
             const BasicConfidenceParams<Scalar>& params) {
  if (!(lambda >= 0 && lambda <= 1)) throw ArgumentError("lambda must lie in [0, 1]");
  if (n_bar < 1 || m_bar < 1) throw ArgumentError("width needs n_bar, m_bar >= 1");
  using std::sqrt;
  const Scalar n = Scalar(n_bar), m = Scalar(m_bar), rest = 1 - lambda;
  return params.coeff * sqrt(params.rho * params.ln_horizon * (lambda * lambda / n + rest * rest / m)) +
         rest * params.eps;
}

/// Closed-form minimiser of width() over lambda in [0, 1].
///
/// Returns 1 once the player's own sample is large enough that the bias of
/// borrowing outweighs the variance saved (n_bar >= c^2 rho ln T / eps^2);
/// otherwise the stationary point of the convex width, which lies in
/// [n/(n+m), 1].
template <typename Scalar>
Scalar lambda_star(std::int64_t n_bar, std::int64_t m_bar, const BasicConfidenceParams<Scalar>& params) {
  if (!(params.ln_horizon > 0)) throw ArgumentError("ln T must be positive");
  if (n_bar < 1 || m_bar < 1) throw ArgumentError("lambda_star needs n_bar, m_bar >= 1");
  using std::sqrt;
  const Scalar n = Scalar(n_bar), m = Scalar(m_bar), eps = params.eps;
  const Scalar scale = params.variance_scale();
  if (eps > 0 && n >= scale / (eps * eps)) return Scalar(1);
  const Scalar denom = scale * (n + m) - eps * eps * n * m;
  // denom <= 0 forces n, m > scale / eps^2, i.e. the branch above.
  assert(denom > 0);
  if (!(denom > 0)) return Scalar(1);
  const Scalar lambda = n / (n + m) * (1 + eps * m * sqrt(1 / denom));
  return std::clamp(lambda, Scalar(0), Scalar(1));
}

/// kappa(lambda) = lambda * own mean + (1 - lambda) * auxiliary mean, with
/// empty sums divided by max(1, count).
inline double kappa(const PullStats& stats, double lambda) {
  return lambda * (stats.own_sum / double(stats.own_bar())) +
         (1.0 - lambda) * (stats.other_sum / double(stats.other_bar()));
}

}  // namespace mpmab
