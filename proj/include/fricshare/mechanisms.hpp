#pragma once

// Allocation rules on finite spaces and their frictional costs.
//
// Every rule conditions on G^X, the information set joined with the
// partition generated by the aggregate endowment. Conditional-mean rules
// redistribute S^X exactly; the robust rules (worst case over an ambiguity
// set, left expected shortfall, mean-deviation) return sub-allocations whose
// shortfall is the global frictional cost.

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fricshare/prob.hpp"

namespace fricshare::mech {

using prob::EndowmentProfile;
using prob::FiniteSpace;
using prob::InfoPartition;
using prob::Measure;
using prob::RandVar;

struct Cmrs {};
struct SubjectiveCmrs {
  Measure q;
};
struct RobustCmrs {
  std::vector<Measure> measures;
};
struct LeftEs {
  double lambda = 1.0;
};

/// Conditional deviation measures available to the mean-deviation rule.
enum class Deviation {
  CondStdDev,       ///< block-conditional standard deviation
  CondMeanAbsDev,   ///< block-conditional mean absolute deviation about the block mean
  CondLowerSemiDev  ///< block-conditional mean shortfall below the block mean
};

struct MeanDeviation {
  Deviation dev = Deviation::CondStdDev;
  double theta = 0.0;
};
struct Qbrs {};
struct Proportional {};

using MechanismSpec =
    std::variant<Cmrs, SubjectiveCmrs, RobustCmrs, LeftEs, MeanDeviation, Qbrs, Proportional>;

/// Short identifier used in reports, e.g. "cmrs" or "left_es:0.9".
std::string spec_name(const MechanismSpec& spec);
std::string deviation_name(Deviation dev);

/// Throws DomainError when parameters are outside their ranges.
void validate(const MechanismSpec& spec);

/// True for rules that redistribute the aggregate exactly.
bool is_full_allocation(const MechanismSpec& spec);

struct Allocation {
  std::vector<RandVar> parts;
  InfoPartition info_used;  ///< the realized G^X

  std::size_t agent_count() const { return parts.size(); }
  RandVar total() const;
};

struct CostReport {
  RandVar global;
  /// Keyed by (i, j) with i < j.
  std::map<std::pair<std::size_t, std::size_t>, RandVar> pairwise;
};

/// Evaluates `spec` on a profile with information set `g`.
Allocation apply(const MechanismSpec& spec, const EndowmentProfile& profile,
                 const InfoPartition& g, const FiniteSpace& space);

/// Block-conditional left-tail expected shortfall of x at level lambda under q.
RandVar cond_left_es(const RandVar& x, const InfoPartition& part, double lambda,
                     const Measure& q);

/// Block-conditional deviation of x under the base measure.
RandVar cond_deviation(const RandVar& x, const InfoPartition& part, Deviation dev,
                       const FiniteSpace& space);

Allocation cmrs_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                      const FiniteSpace& space, const Measure& q);
Allocation robust_cmrs(const EndowmentProfile& profile, const InfoPartition& g,
                       const std::vector<Measure>& measures, const FiniteSpace& space);
Allocation left_es_alloc(const EndowmentProfile& profile, const InfoPartition& g, double lambda,
                         const FiniteSpace& space);
Allocation mean_dev_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                          Deviation dev, double theta, const FiniteSpace& space);
Allocation qbrs_alloc(const EndowmentProfile& profile, const FiniteSpace& space);
Allocation proportional_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                              const FiniteSpace& space);

/// Slack allowed when checking sum(H) <= S^X at one outcome.
inline double feasibility_slack(double aggregate) {
  return 1e-9 * (1.0 + (aggregate < 0 ? -aggregate : aggregate));
}

/// Global and pairwise frictional costs. Throws when the allocation
/// over-allocates the aggregate beyond the feasibility slack.
CostReport frictional_costs(const EndowmentProfile& profile, const Allocation& alloc);

}  // namespace fricshare::mech
