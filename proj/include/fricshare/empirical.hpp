#pragma once

// Loss-table ingestion and the summary statistics that feed the Gaussian
// closed forms.

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace fricshare::emp {

struct LossTable {
  std::vector<std::string> entities;
  std::vector<std::string> periods;
  /// losses[e][p], claims paid (>= 0).
  std::vector<std::vector<double>> losses;
  /// One line per entity removed for missing periods.
  std::vector<std::string> dropped;
};

/// Reads CSV with header `period,entity,amount`. Duplicate (period, entity)
/// rows are summed; periods are ordered numerically when every label parses
/// as a number and lexicographically otherwise.
LossTable ingest(const std::string& path);
LossTable ingest(std::istream& in, const std::string& source = "<input>");

enum class SignConvention { LossesAsNegativeEndowments };

struct SummaryStats {
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<double> variances;  ///< unbiased
  std::vector<std::vector<double>> correlation;
  /// Entities whose series is constant; their off-diagonal correlations are 0.
  std::vector<std::size_t> zero_variance;
};

SummaryStats summarize(const LossTable& table,
                       SignConvention sign = SignConvention::LossesAsNegativeEndowments);

struct ReportRow {
  std::string name;
  double expected_alloc = 0.0;  ///< E[H_i]
  double expected_cost = 0.0;   ///< C_i bar
  double benefit = 0.0;         ///< T_i
};

struct Report {
  std::vector<ReportRow> rows;
  double global_cost = 0.0;
  /// True when small negative eigenvalues of the correlation matrix were zeroed.
  bool projected = false;
};

/// `theta` holds one value per entity, or a single value applied to all.
Report report(const SummaryStats& stats, double lambda, const std::vector<double>& theta);

/// Zeroes eigenvalues in [-tol, 0) and restores the unit diagonal; throws when
/// an eigenvalue lies below -tol. Returns whether anything changed.
bool project_correlation(std::vector<std::vector<double>>& corr, double tol = 1e-8);

}  // namespace fricshare::emp
