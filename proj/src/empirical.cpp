#include "fricshare/empirical.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fricshare/error.hpp"
#include "fricshare/gaussian.hpp"

namespace fricshare::emp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

void sort_periods(std::vector<std::string>& periods) {
  std::vector<std::pair<double, std::string>> numeric;
  for (const auto& p : periods) {
    double v = 0.0;
    if (!parse_number(p, v)) {
      std::sort(periods.begin(), periods.end());
      return;
    }
    numeric.emplace_back(v, p);
  }
  std::sort(numeric.begin(), numeric.end());
  for (std::size_t k = 0; k < periods.size(); ++k) periods[k] = numeric[k].second;
}

}  // namespace

LossTable ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  return ingest(in, path);
}

LossTable ingest(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<std::string> errors;
  std::map<std::string, std::map<std::string, double>> cells;  // entity -> period -> amount
  std::vector<std::string> entity_order;
  std::set<std::string> period_set;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "period" || fields[1] != "entity" ||
          fields[2] != "amount")
        throw DomainError(source + ":" + std::to_string(lineno) +
                          ": expected header 'period,entity,amount'");
      header_seen = true;
      continue;
    }
    double amount = 0.0;
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 3 fields");
      continue;
    }
    if (!parse_number(fields[2], amount) || !std::isfinite(amount) || amount < 0.0) {
      errors.push_back("line " + std::to_string(lineno) + ": amount '" + fields[2] +
                       "' is not a finite nonnegative number");
      continue;
    }
    if (!cells.count(fields[1])) entity_order.push_back(fields[1]);
    cells[fields[1]][fields[0]] += amount;
    period_set.insert(fields[0]);
  }
  if (!header_seen) throw DomainError(source + ": empty input");
  if (!errors.empty()) {
    std::string msg = source + ": unparsable rows";
    for (const auto& e : errors) msg += "\n  " + e;
    throw DomainError(msg);
  }

  LossTable t;
  t.periods.assign(period_set.begin(), period_set.end());
  sort_periods(t.periods);
  if (t.periods.size() < 3)
    throw DomainError(source + ": need at least 3 periods, found " +
                      std::to_string(t.periods.size()));

  for (const auto& name : entity_order) {
    const auto& row = cells.at(name);
    std::vector<std::string> missing;
    std::vector<double> series;
    for (const auto& p : t.periods) {
      auto it = row.find(p);
      if (it == row.end()) {
        missing.push_back(p);
      } else {
        series.push_back(it->second);
      }
    }
    if (!missing.empty()) {
      std::string msg = name + " dropped: missing period";
      msg += missing.size() > 1 ? "s " : " ";
      for (std::size_t k = 0; k < missing.size(); ++k) msg += (k ? "," : "") + missing[k];
      t.dropped.push_back(msg);
      continue;
    }
    t.entities.push_back(name);
    t.losses.push_back(std::move(series));
  }
  return t;
}

SummaryStats summarize(const LossTable& table, SignConvention sign) {
  const std::size_t e = table.entities.size();
  const std::size_t p = table.periods.size();
  if (p < 2) throw DomainError("need at least 2 periods to summarize");
  const double flip = sign == SignConvention::LossesAsNegativeEndowments ? -1.0 : 1.0;

  SummaryStats st;
  st.names = table.entities;
  st.means.assign(e, 0.0);
  st.variances.assign(e, 0.0);
  st.correlation.assign(e, std::vector<double>(e, 0.0));
  std::vector<std::vector<double>> dev(e, std::vector<double>(p));
  for (std::size_t i = 0; i < e; ++i) {
    double m = 0.0;
    for (double v : table.losses[i]) m += flip * v;
    m /= static_cast<double>(p);
    st.means[i] = m;
    double ss = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      dev[i][k] = flip * table.losses[i][k] - m;
      ss += dev[i][k] * dev[i][k];
    }
    st.variances[i] = ss / static_cast<double>(p - 1);
    if (st.variances[i] == 0.0) st.zero_variance.push_back(i);
  }
  for (std::size_t i = 0; i < e; ++i) {
    st.correlation[i][i] = 1.0;
    for (std::size_t j = i + 1; j < e; ++j) {
      double r = 0.0;
      if (st.variances[i] > 0.0 && st.variances[j] > 0.0) {
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          sxy += dev[i][k] * dev[j][k];
          sxx += dev[i][k] * dev[i][k];
          syy += dev[j][k] * dev[j][k];
        }
        r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      }
      st.correlation[i][j] = st.correlation[j][i] = r;
    }
  }
  return st;
}

bool project_correlation(std::vector<std::vector<double>>& corr, double tol) {
  const std::size_t n = corr.size();
  Eigen::MatrixXd c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = corr[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  Eigen::VectorXd vals = eig.eigenvalues();
  if (vals.minCoeff() >= 0.0) return false;
  if (vals.minCoeff() < -tol) {
    std::ostringstream os;
    os << "correlation matrix is not positive semidefinite (smallest eigenvalue "
       << vals.minCoeff() << ")";
    throw DomainError(os.str());
  }
  vals = vals.cwiseMax(0.0);
  Eigen::MatrixXd fixed = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      corr[i][j] = i == j ? 1.0 : fixed(i, j) / std::sqrt(fixed(i, i) * fixed(j, j));
  return true;
}

Report report(const SummaryStats& stats, double lambda, const std::vector<double>& theta) {
  const std::size_t n = stats.means.size();
  if (stats.variances.size() != n || stats.correlation.size() != n)
    throw DomainError("stats: means, variances and correlation sizes differ");
  std::vector<double> th = theta;
  if (th.size() == 1) th.assign(n, theta.front());
  if (th.size() != n) throw DomainError("theta must have one entry or one per entity");

  Report rep;
  auto corr = stats.correlation;
  for (std::size_t i = 0; i < n; ++i) {
    if (corr[i].size() != n) throw DomainError("stats: correlation must be square");
    if (std::abs(corr[i][i] - 1.0) > 1e-12) throw DomainError("stats: correlation diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(corr[i][j]) > 1.0 + 1e-12 || std::abs(corr[i][j] - corr[j][i]) > 1e-12)
        throw DomainError("stats: correlation must be symmetric with entries in [-1,1]");
  }
  rep.projected = project_correlation(corr);

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(stats.variances[i] >= 0.0)) throw DomainError("stats: variances must be nonnegative");
    sigma[i] = std::sqrt(stats.variances[i]);
  }
  const auto pool = gauss::GaussianPool::from_correlation(stats.means, sigma, corr);
  const auto t = gauss::tradeoff(pool, lambda, th);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = i < stats.names.size() ? stats.names[i] : "agent" + std::to_string(i);
    rep.rows.push_back({name, t.expected_alloc[i], t.expected_cost[i], t.benefit[i]});
  }
  rep.global_cost = t.global_cost;
  return rep;
}

}  // namespace fricshare::emp
