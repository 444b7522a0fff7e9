#pragma once

// Closed-form left expected-shortfall sharing for jointly normal endowments.
//
// With X ~ N(mu, V) and G trivial, the law of X_i given S is normal with a
// mean affine in S and a constant variance s_i^2, so the rule collapses to
// H_i = a_i + b_i S - kappa(lambda) s_i and the global cost is deterministic.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fricshare::gauss {

struct GaussianPool {
  std::vector<double> mu;
  std::vector<std::vector<double>> cov;

  std::size_t size() const { return mu.size(); }
  double sigma(std::size_t i) const;

  /// cov_ij = rho_ij sigma_i sigma_j.
  static GaussianPool from_correlation(std::vector<double> mu, const std::vector<double>& sigma,
                                       const std::vector<std::vector<double>>& rho);
};

/// Shape, symmetry (1e-12 relative), nonnegative diagonal, |rho| <= 1 + 1e-12
/// and positive semidefiniteness. `what` prefixes the diagnostic.
void validate(const GaussianPool& pool, const std::string& what = "pool");

struct PoolStats {
  double sigma_total = 0.0;
  std::vector<double> sigma;
  std::vector<double> rho_bar;
  /// Conditional standard deviation of X_i given S: sqrt((1 - rho_bar^2) sigma^2).
  std::vector<double> s;
};

/// Agents with sigma_i = 0 get rho_bar_i = 0. A pool whose every marginal is
/// degenerate has sigma_total = 0; a pool with risky members that nonetheless
/// sums to a constant is rejected.
PoolStats pool_stats(const GaussianPool& pool);

/// H_i = a_i + b_i S - c_i.
struct EsClosedForm {
  double lambda = 1.0;
  double kappa = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
};

EsClosedForm es_closed_form(const GaussianPool& pool, double lambda);

struct CostSummary {
  double global = 0.0;
  std::vector<double> expected;  ///< per-agent expected cost, kappa s_i
};

CostSummary gaussian_costs(const GaussianPool& pool, double lambda);

struct TradeoffReport {
  std::vector<double> benefit;          ///< T_i
  std::vector<double> expected_cost;    ///< C_i bar
  std::vector<double> expected_alloc;   ///< E[H_i]
  double global_cost = 0.0;
};

/// Mean-variance participation benefit with per-agent risk aversion theta_i.
TradeoffReport tradeoff(const GaussianPool& pool, double lambda, const std::vector<double>& theta);

/// Smallest lambda at which agent `agent` is indifferent to joining, i.e.
/// theta s_i = kappa(lambda). Empty when theta <= 0, s_i = 0, or the root lies
/// below 1e-6.
std::optional<double> lambda_star(const GaussianPool& pool, double theta, std::size_t agent);
std::optional<double> lambda_star_for(double s, double theta);

enum class CorrelationScheme { Constant, Geometric };

/// Equicorrelated pool of `n` agents with common sigma, one row per rho.
struct CorrelationSweep {
  std::vector<double> grid;
  std::size_t n = 2;
  double sigma = 1.0;
};

/// Pools of size n_min..n_max; Constant uses rho_ij = rho, Geometric uses
/// rho_ij = rho^|i-j|.
struct ParticipantsSweep {
  std::size_t n_min = 2;
  std::size_t n_max = 20;
  CorrelationScheme scheme = CorrelationScheme::Constant;
  double rho = 0.2;
  double sigma = 1.0;
};

using SweepKind = std::variant<CorrelationSweep, ParticipantsSweep>;

struct SweepRow {
  double param = 0.0;
  double global_cost = 0.0;
  double avg_benefit = 0.0;
  double avg_cost_per_agent = 0.0;
};

std::vector<SweepRow> sweep(const SweepKind& kind, double lambda, double theta);

GaussianPool correlated_pool(std::size_t n, double sigma, CorrelationScheme scheme, double rho);

}  // namespace fricshare::gauss
