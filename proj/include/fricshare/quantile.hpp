#pragma once

#include <span>
#include <vector>

namespace fricshare::mech {

/// Law of a discrete random variable: strictly increasing support with
/// probability weights. The last cumulative weight is pinned to exactly 1.
class DiscreteDist {
 public:
  DiscreteDist(std::vector<double> support, std::vector<double> weights);

  /// Distribution of `values` when outcome w carries mass `probs[w]`.
  static DiscreteDist from_values(std::span<const double> values, std::span<const double> probs);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  /// cumulative()[k] = F(support()[k]).
  const std::vector<double>& cumulative() const { return cumulative_; }

  double cdf(double y) const;
  /// F^{-1}(p) = inf{y : F(y) >= p}.
  double quantile_lower(double p) const;
  /// F^{-1,+}(p) = sup{y : F(y) <= p}, capped at the top of the support.
  double quantile_upper(double p) const;
  double mean() const;

  /// Probability levels are compared with this slack so that cumulative sums
  /// accumulated in different orders still line up.
  static constexpr double kLevelTol = 1e-12;

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// F^{-1,alpha}(p): F^{-1,+}(0) at p = 0, F^{-1}(1) at p = 1, and the
/// alpha-mixture of lower and upper quantiles in between.
double quantile_mixed(const DiscreteDist& d, double p, double alpha);

}  // namespace fricshare::mech
