#include "fricshare/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fricshare/error.hpp"
#include "fricshare/normal.hpp"

namespace fricshare::gauss {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kRhoSlack = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kLambdaLo = 1e-6;
constexpr double kLambdaTol = 1e-8;

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double GaussianPool::sigma(std::size_t i) const { return std::sqrt(std::max(cov[i][i], 0.0)); }

GaussianPool GaussianPool::from_correlation(std::vector<double> mu,
                                            const std::vector<double>& sigma,
                                            const std::vector<std::vector<double>>& rho) {
  const std::size_t n = mu.size();
  if (sigma.size() != n || rho.size() != n)
    throw DomainError("mu, sigma and rho must describe the same number of agents");
  GaussianPool pool{std::move(mu), std::vector<std::vector<double>>(n, std::vector<double>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    if (rho[i].size() != n) throw DomainError("correlation matrix must be square");
    if (!(sigma[i] >= 0.0)) throw DomainError("sigma must be nonnegative");
    for (std::size_t j = 0; j < n; ++j) pool.cov[i][j] = rho[i][j] * sigma[i] * sigma[j];
  }
  return pool;
}

void validate(const GaussianPool& pool, const std::string& what) {
  const std::size_t n = pool.size();
  if (n == 0) throw DomainError(what + ": empty pool");
  if (pool.cov.size() != n) throw DomainError(what + ": covariance size does not match mu");
  Eigen::MatrixXd v(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pool.cov[i].size() != n) throw DomainError(what + ": covariance must be square");
    if (!std::isfinite(pool.mu[i])) throw DomainError(what + ": mu must be finite");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(pool.cov[i][j])) throw DomainError(what + ": covariance must be finite");
      v(i, j) = pool.cov[i][j];
    }
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pool.cov[i][i] < 0.0)
      throw DomainError(what + ": negative variance for agent " + std::to_string(i));
    scale = std::max(scale, pool.cov[i][i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = pool.cov[i][j];
      const double b = pool.cov[j][i];
      if (std::abs(a - b) > kSymTol * std::max({1.0, std::abs(a), std::abs(b)}))
        throw DomainError(what + ": covariance not symmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      const double bound = std::sqrt(pool.cov[i][i] * pool.cov[j][j]);
      if (std::abs(a) > (1.0 + kRhoSlack) * bound + 1e-300)
        throw DomainError(what + ": implied correlation outside [-1,1] at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
    }
  if (scale == 0.0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol * scale)
    throw DomainError(what + ": covariance is not positive semidefinite (smallest eigenvalue " +
                      num(min_eig) + ")");
}

PoolStats pool_stats(const GaussianPool& pool) {
  validate(pool);
  const std::size_t n = pool.size();
  PoolStats st;
  st.sigma.resize(n);
  st.rho_bar.assign(n, 0.0);
  st.s.assign(n, 0.0);
  double total_var = 0.0;
  bool any_risk = false;
  for (std::size_t i = 0; i < n; ++i) {
    st.sigma[i] = pool.sigma(i);
    any_risk = any_risk || st.sigma[i] > 0.0;
    for (std::size_t j = 0; j < n; ++j) total_var += pool.cov[i][j];
  }
  st.sigma_total = std::sqrt(std::max(total_var, 0.0));
  if (!any_risk) return st;
  if (!(st.sigma_total > 0.0))
    throw DomainError("aggregate endowment has zero variance although members are risky");
  for (std::size_t i = 0; i < n; ++i) {
    if (st.sigma[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += pool.cov[i][j];
    st.rho_bar[i] = row / (st.sigma[i] * st.sigma_total);
    const double resid = std::max(0.0, 1.0 - st.rho_bar[i] * st.rho_bar[i]);
    st.s[i] = std::sqrt(resid * st.sigma[i] * st.sigma[i]);
  }
  return st;
}

EsClosedForm es_closed_form(const GaussianPool& pool, double lambda) {
  const PoolStats st = pool_stats(pool);
  const std::size_t n = pool.size();
  EsClosedForm f;
  f.lambda = lambda;
  f.kappa = normal::kappa(lambda);
  f.a.resize(n);
  f.b.resize(n);
  f.c.resize(n);
  double mu_total = 0.0;
  for (double m : pool.mu) mu_total += m;
  for (std::size_t i = 0; i < n; ++i) {
    f.b[i] = st.sigma_total > 0.0 ? st.sigma[i] * st.rho_bar[i] / st.sigma_total : 0.0;
    f.a[i] = pool.mu[i] - f.b[i] * mu_total;
    f.c[i] = f.kappa * st.s[i];
  }
  return f;
}

CostSummary gaussian_costs(const GaussianPool& pool, double lambda) {
  const EsClosedForm f = es_closed_form(pool, lambda);
  CostSummary out;
  out.expected = f.c;
  for (double c : f.c) out.global += c;
  return out;
}

TradeoffReport tradeoff(const GaussianPool& pool, double lambda, const std::vector<double>& theta) {
  if (theta.size() != pool.size())
    throw DomainError("theta must have one entry per agent");
  const PoolStats st = pool_stats(pool);
  const double k = normal::kappa(lambda);
  TradeoffReport r;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double s = st.s[i];
    r.benefit.push_back(s * (theta[i] * s - k));
    r.expected_cost.push_back(k * s);
    r.expected_alloc.push_back(pool.mu[i] - k * s);
    r.global_cost += k * s;
  }
  return r;
}

std::optional<double> lambda_star_for(double s, double theta) {
  if (!(theta > 0.0) || !(s > 0.0)) return std::nullopt;
  const double target = theta * s;
  if (target >= normal::kappa(kLambdaLo)) return std::nullopt;
  // kappa decreases from kappa(1e-6) to kappa(1) = 0, so the root is bracketed.
  double lo = kLambdaLo;
  double hi = 1.0;
  while (hi - lo > kLambdaTol) {
    const double mid = 0.5 * (lo + hi);
    if (normal::kappa(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<double> lambda_star(const GaussianPool& pool, double theta, std::size_t agent) {
  if (agent >= pool.size()) throw DomainError("agent index out of range");
  return lambda_star_for(pool_stats(pool).s[agent], theta);
}

GaussianPool correlated_pool(std::size_t n, double sigma, CorrelationScheme scheme, double rho) {
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = static_cast<double>(i > j ? i - j : j - i);
      r[i][j] = scheme == CorrelationScheme::Constant ? rho : std::pow(rho, d);
    }
  return GaussianPool::from_correlation(std::vector<double>(n, 0.0),
                                        std::vector<double>(n, sigma), r);
}

namespace {

SweepRow row_for(const GaussianPool& pool, double param, double lambda, double theta,
                 const std::string& label) {
  try {
    validate(pool, label);
  } catch (const DomainError& e) {
    throw DomainError(std::string("sweep: ") + e.what());
  }
  const auto rep = tradeoff(pool, lambda, std::vector<double>(pool.size(), theta));
  SweepRow row;
  row.param = param;
  row.global_cost = rep.global_cost;
  double t = 0.0;
  for (double b : rep.benefit) t += b;
  const auto n = static_cast<double>(pool.size());
  row.avg_benefit = t / n;
  row.avg_cost_per_agent = rep.global_cost / n;
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepKind& kind, double lambda, double theta) {
  std::vector<SweepRow> rows;
  if (const auto* c = std::get_if<CorrelationSweep>(&kind)) {
    if (c->grid.empty()) throw DomainError("sweep: empty correlation grid");
    if (c->n < 2) throw DomainError("sweep: need at least two agents");
    for (double rho : c->grid) {
      const auto pool = correlated_pool(c->n, c->sigma, CorrelationScheme::Constant, rho);
      rows.push_back(row_for(pool, rho, lambda, theta,
                             "rho = " + num(rho) + " with n = " + std::to_string(c->n)));
    }
  } else {
    const auto& p = std::get<ParticipantsSweep>(kind);
    if (p.n_min < 2 || p.n_max < p.n_min) throw DomainError("sweep: invalid participant range");
    for (std::size_t n = p.n_min; n <= p.n_max; ++n) {
      const auto pool = correlated_pool(n, p.sigma, p.scheme, p.rho);
      rows.push_back(row_for(pool, static_cast<double>(n), lambda, theta,
                             "n = " + std::to_string(n) + " with rho = " + num(p.rho)));
    }
  }
  return rows;
}

}  // namespace fricshare::gauss
