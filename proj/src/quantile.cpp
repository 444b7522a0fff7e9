#include "fricshare/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fricshare/error.hpp"

namespace fricshare::mech {

DiscreteDist::DiscreteDist(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size())
    throw DomainError("discrete distribution needs matching nonempty support and weights");
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (!std::isfinite(support_[k])) throw DomainError("support values must be finite");
    if (k > 0 && !(support_[k] > support_[k - 1]))
      throw DomainError("support must be strictly increasing");
    if (!(weights_[k] >= 0.0)) throw DomainError("weights must be nonnegative");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

DiscreteDist DiscreteDist::from_values(std::span<const double> values,
                                       std::span<const double> probs) {
  if (values.size() != probs.size() || values.empty())
    throw DomainError("values and probabilities must have the same nonzero length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> support;
  std::vector<double> weights;
  for (std::size_t w : order) {
    if (!support.empty() && values[w] == support.back()) {
      weights.back() += probs[w];
    } else {
      support.push_back(values[w]);
      weights.push_back(probs[w]);
    }
  }
  return DiscreteDist(std::move(support), std::move(weights));
}

double DiscreteDist::cdf(double y) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), y);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double DiscreteDist::quantile_lower(double p) const {
  for (std::size_t k = 0; k < support_.size(); ++k)
    if (cumulative_[k] >= p - kLevelTol) return support_[k];
  return support_.back();
}

double DiscreteDist::quantile_upper(double p) const {
  for (std::size_t k = 0; k < support_.size(); ++k)
    if (cumulative_[k] > p + kLevelTol) return support_[k];
  return support_.back();
}

double DiscreteDist::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < support_.size(); ++k) m += support_[k] * weights_[k];
  return m;
}

double quantile_mixed(const DiscreteDist& d, double p, double alpha) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability level must lie in [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("mixing weight must lie in [0,1]");
  if (p == 0.0) return d.quantile_upper(0.0);
  if (p == 1.0) return d.quantile_lower(1.0);
  return alpha * d.quantile_lower(p) + (1.0 - alpha) * d.quantile_upper(p);
}

}  // namespace fricshare::mech
