#include "fricshare/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fricshare/error.hpp"
#include "fricshare/quantile.hpp"

namespace fricshare::mech {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_shapes(const EndowmentProfile& profile, const InfoPartition& g,
                  const FiniteSpace& space) {
  if (profile.outcome_count() != space.size() || g.outcome_count() != space.size())
    throw DomainError("profile, information set and space disagree on the outcome count");
}

void check_feasible(const EndowmentProfile& profile, const Allocation& alloc) {
  const RandVar s = profile.aggregate();
  const RandVar total = alloc.total();
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (total[w] > s[w] + feasibility_slack(s[w])) {
      std::ostringstream os;
      os.precision(17);
      os << "allocation exceeds the aggregate at outcome " << w << " (sum " << total[w]
         << " > S " << s[w] << ")";
      throw DomainError(os.str());
    }
  }
}

/// Index of the first block on which q's mass differs from the base mass.
std::ptrdiff_t first_unmatched_block(const Measure& q, const InfoPartition& part,
                                     const FiniteSpace& space, double tol) {
  for (std::size_t b = 0; b < part.block_count(); ++b) {
    double mq = 0.0;
    double mp = 0.0;
    for (std::size_t w : part.block(b)) {
      mq += q[w];
      mp += space.prob(w);
    }
    if (std::abs(mq - mp) > tol) return static_cast<std::ptrdiff_t>(b);
  }
  return -1;
}

}  // namespace

std::string deviation_name(Deviation dev) {
  switch (dev) {
    case Deviation::CondStdDev: return "std";
    case Deviation::CondMeanAbsDev: return "mad";
    case Deviation::CondLowerSemiDev: return "lsd";
  }
  return "?";
}

std::string spec_name(const MechanismSpec& spec) {
  return std::visit(
      overloaded{
          [](const Cmrs&) -> std::string { return "cmrs"; },
          [](const SubjectiveCmrs&) -> std::string { return "subjective_cmrs"; },
          [](const RobustCmrs& r) -> std::string {
            return "robust_cmrs[" + std::to_string(r.measures.size()) + "]";
          },
          [](const LeftEs& r) -> std::string { return "left_es:" + format_param(r.lambda); },
          [](const MeanDeviation& r) -> std::string {
            return "mean_deviation:" + deviation_name(r.dev) + ":" + format_param(r.theta);
          },
          [](const Qbrs&) -> std::string { return "qbrs"; },
          [](const Proportional&) -> std::string { return "proportional"; },
      },
      spec);
}

void validate(const MechanismSpec& spec) {
  std::visit(overloaded{
                 [](const LeftEs& r) {
                   if (!(r.lambda > 0.0 && r.lambda <= 1.0))
                     throw DomainError("left_es lambda must lie in (0,1]");
                 },
                 [](const MeanDeviation& r) {
                   if (!(r.theta >= 0.0) || !std::isfinite(r.theta))
                     throw DomainError("mean_deviation theta must be finite and >= 0");
                 },
                 [](const RobustCmrs& r) {
                   if (r.measures.empty())
                     throw DomainError("robust_cmrs needs a nonempty measure set");
                 },
                 [](const auto&) {},
             },
             spec);
}

bool is_full_allocation(const MechanismSpec& spec) {
  return std::holds_alternative<Cmrs>(spec) || std::holds_alternative<SubjectiveCmrs>(spec) ||
         std::holds_alternative<Qbrs>(spec) || std::holds_alternative<Proportional>(spec);
}

RandVar Allocation::total() const {
  RandVar t = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) t += parts[i];
  return t;
}

// ------------------------------------------------------------------- rules

Allocation cmrs_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                      const FiniteSpace& space, const Measure& q) {
  check_shapes(profile, g, space);
  Allocation out{{}, prob::augmented_info(g, profile, space)};
  out.parts.reserve(profile.agent_count());
  for (const auto& x : profile.agents())
    out.parts.push_back(prob::cond_expect(x, out.info_used, q));
  return out;
}

Allocation robust_cmrs(const EndowmentProfile& profile, const InfoPartition& g,
                       const std::vector<Measure>& measures, const FiniteSpace& space) {
  check_shapes(profile, g, space);
  if (measures.empty()) throw DomainError("robust_cmrs needs a nonempty measure set");
  InfoPartition info = prob::augmented_info(g, profile, space);
  for (std::size_t k = 0; k < measures.size(); ++k) {
    if (measures[k].size() != space.size())
      throw DomainError("measure " + std::to_string(k) + " lives on a different space");
    const auto bad = first_unmatched_block(measures[k], info, space, 1e-9);
    if (bad >= 0) {
      std::ostringstream os;
      os << "measure " << k << " does not agree with the base measure on block " << bad
         << " of G^X {";
      const auto& block = info.block(static_cast<std::size_t>(bad));
      for (std::size_t t = 0; t < block.size(); ++t) os << (t ? "," : "") << block[t];
      os << "}";
      throw DomainError(os.str());
    }
  }
  Allocation out{{}, info};
  for (const auto& x : profile.agents()) {
    RandVar h = prob::cond_expect(x, info, measures.front());
    for (std::size_t k = 1; k < measures.size(); ++k) {
      const RandVar alt = prob::cond_expect(x, info, measures[k]);
      for (std::size_t w = 0; w < h.size(); ++w) h[w] = std::min(h[w], alt[w]);
    }
    out.parts.push_back(std::move(h));
  }
  return out;
}

RandVar cond_left_es(const RandVar& x, const InfoPartition& part, double lambda,
                     const Measure& q) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("left_es lambda must lie in (0,1]");
  if (x.size() != part.outcome_count() || q.size() != part.outcome_count())
    throw DomainError("expected shortfall inputs disagree on the outcome count");
  std::vector<double> out(x.size());
  std::vector<std::size_t> order;
  for (std::size_t b = 0; b < part.block_count(); ++b) {
    const auto& block = part.block(b);
    order.assign(block.begin(), block.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return x[a] < x[c]; });
    double mass = 0.0;
    for (std::size_t w : order) mass += q[w];
    if (!(mass > 0.0))
      throw DomainError("measure assigns zero mass to block " + std::to_string(b));
    // Fill the cheapest outcomes first until the tail holds lambda of the
    // block mass; the boundary atom contributes fractionally.
    const double target = lambda * mass;
    double taken = 0.0;
    double weighted = 0.0;
    for (std::size_t w : order) {
      const double room = target - taken;
      if (room <= 0.0) break;
      const double part_mass = std::min(q[w], room);
      taken += part_mass;
      weighted += part_mass * x[w];
    }
    const double value = weighted / taken;
    for (std::size_t w : block) out[w] = value;
  }
  return RandVar(std::move(out));
}

Allocation left_es_alloc(const EndowmentProfile& profile, const InfoPartition& g, double lambda,
                         const FiniteSpace& space) {
  check_shapes(profile, g, space);
  Allocation out{{}, prob::augmented_info(g, profile, space)};
  const Measure base = Measure::base(space);
  for (const auto& x : profile.agents())
    out.parts.push_back(cond_left_es(x, out.info_used, lambda, base));
  return out;
}

RandVar cond_deviation(const RandVar& x, const InfoPartition& part, Deviation dev,
                       const FiniteSpace& space) {
  const RandVar mean = prob::cond_expect(x, part, space);
  std::vector<double> out(x.size());
  for (const auto& block : part.blocks()) {
    double mass = 0.0;
    double acc = 0.0;
    for (std::size_t w : block) {
      const double d = x[w] - mean[w];
      mass += space.prob(w);
      switch (dev) {
        case Deviation::CondStdDev: acc += space.prob(w) * d * d; break;
        case Deviation::CondMeanAbsDev: acc += space.prob(w) * std::abs(d); break;
        case Deviation::CondLowerSemiDev: acc += space.prob(w) * std::max(-d, 0.0); break;
      }
    }
    double value = acc / mass;
    if (dev == Deviation::CondStdDev) value = std::sqrt(value);
    for (std::size_t w : block) out[w] = value;
  }
  return RandVar(std::move(out));
}

Allocation mean_dev_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                          Deviation dev, double theta, const FiniteSpace& space) {
  check_shapes(profile, g, space);
  if (!(theta >= 0.0)) throw DomainError("mean_deviation theta must be >= 0");
  Allocation out{{}, prob::augmented_info(g, profile, space)};
  for (const auto& x : profile.agents()) {
    RandVar h = prob::cond_expect(x, out.info_used, space);
    if (theta > 0.0) h -= theta * cond_deviation(x, out.info_used, dev, space);
    out.parts.push_back(std::move(h));
  }
  return out;
}

Allocation qbrs_alloc(const EndowmentProfile& profile, const FiniteSpace& space) {
  if (profile.outcome_count() != space.size())
    throw DomainError("profile and space disagree on the outcome count");
  const std::size_t n = profile.agent_count();
  const auto probs = space.probs();

  std::vector<DiscreteDist> marginals;
  marginals.reserve(n);
  std::vector<double> levels;
  for (const auto& x : profile.agents()) {
    marginals.push_back(DiscreteDist::from_values(x.values(), probs));
    const auto& cum = marginals.back().cumulative();
    levels.insert(levels.end(), cum.begin(), cum.end());
  }
  // Shared uniform grid: every CDF level of every marginal, merged when two
  // agents reach the same level through differently ordered sums.
  std::sort(levels.begin(), levels.end());
  std::vector<double> grid;
  for (double u : levels) {
    if (grid.empty() || u - grid.back() > DiscreteDist::kLevelTol) grid.push_back(u);
  }
  grid.back() = 1.0;
  const std::size_t K = grid.size();

  // Comonotone counterpart: on the k-th grid interval every agent sits at a
  // fixed quantile, and the comonotone sum takes the value comono[k].
  std::vector<std::vector<double>> quant(n, std::vector<double>(K));
  std::vector<double> comono(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      quant[i][k] = marginals[i].quantile_lower(grid[k]);
      comono[k] += quant[i][k];
    }
  }

  const RandVar s = profile.aggregate();
  Allocation out{std::vector<RandVar>(n, RandVar::zeros(space.size())),
                 InfoPartition::trivial(space.size())};
  out.info_used = prob::augmented_info(out.info_used, profile, space);
  for (std::size_t w = 0; w < space.size(); ++w) {
    const double sw = s[w];
    const double eps = 1e-12 * std::max(1.0, std::abs(sw));
    // p = F_{S^c}(s) = grid[kstar] where kstar is the last comonotone value <= s.
    auto it = std::upper_bound(comono.begin(), comono.end(), sw + eps);
    if (it == comono.begin()) {
      std::ostringstream os;
      os.precision(17);
      os << "qbrs: no alpha in [0,1] solves the implicit equation at s=" << sw
         << ", p=0 (below the comonotone support)";
      throw DomainError(os.str());
    }
    const std::size_t kstar = static_cast<std::size_t>(it - comono.begin()) - 1;
    double alpha = 1.0;
    std::size_t upper = kstar;
    if (kstar + 1 < K) {
      upper = kstar + 1;
      const double lo = comono[kstar];
      const double hi = comono[upper];
      if (std::abs(sw - lo) > eps && hi > lo) alpha = std::clamp((hi - sw) / (hi - lo), 0.0, 1.0);
    } else if (std::abs(sw - comono[kstar]) > 1e-9 * (1.0 + std::abs(sw))) {
      std::ostringstream os;
      os.precision(17);
      os << "qbrs: no alpha in [0,1] solves the implicit equation at s=" << sw
         << ", p=1 (above the comonotone support)";
      throw DomainError(os.str());
    }
    for (std::size_t i = 0; i < n; ++i)
      out.parts[i][w] = alpha * quant[i][kstar] + (1.0 - alpha) * quant[i][upper];
  }
  return out;
}

Allocation proportional_alloc(const EndowmentProfile& profile, const InfoPartition& g,
                              const FiniteSpace& space) {
  check_shapes(profile, g, space);
  const RandVar share = (1.0 / static_cast<double>(profile.agent_count())) * profile.aggregate();
  return Allocation{std::vector<RandVar>(profile.agent_count(), share),
                    prob::augmented_info(g, profile, space)};
}

Allocation apply(const MechanismSpec& spec, const EndowmentProfile& profile,
                 const InfoPartition& g, const FiniteSpace& space) {
  validate(spec);
  check_shapes(profile, g, space);
  Allocation out = std::visit(
      overloaded{
          [&](const Cmrs&) { return cmrs_alloc(profile, g, space, Measure::base(space)); },
          [&](const SubjectiveCmrs& r) { return cmrs_alloc(profile, g, space, r.q); },
          [&](const RobustCmrs& r) { return robust_cmrs(profile, g, r.measures, space); },
          [&](const LeftEs& r) { return left_es_alloc(profile, g, r.lambda, space); },
          [&](const MeanDeviation& r) {
            return mean_dev_alloc(profile, g, r.dev, r.theta, space);
          },
          [&](const Qbrs&) {
            if (!g.is_trivial())
              throw DomainError("qbrs is only defined for the trivial information set");
            return qbrs_alloc(profile, space);
          },
          [&](const Proportional&) { return proportional_alloc(profile, g, space); },
      },
      spec);
  check_feasible(profile, out);
  return out;
}

CostReport frictional_costs(const EndowmentProfile& profile, const Allocation& alloc) {
  const std::size_t n = profile.agent_count();
  if (alloc.parts.size() != n)
    throw DomainError("allocation and profile have different agent counts");
  for (const auto& h : alloc.parts)
    if (h.size() != profile.outcome_count())
      throw DomainError("allocation and profile live on different spaces");

  const RandVar s = profile.aggregate();
  RandVar global = s - alloc.total();
  std::ptrdiff_t worst = -1;
  for (std::size_t w = 0; w < global.size(); ++w) {
    if (global[w] < -feasibility_slack(s[w])) {
      if (worst < 0 || global[w] < global[static_cast<std::size_t>(worst)])
        worst = static_cast<std::ptrdiff_t>(w);
    } else if (global[w] < 0.0) {
      global[w] = 0.0;
    }
  }
  if (worst >= 0) {
    std::ostringstream os;
    os.precision(17);
    os << "allocation is infeasible; worst outcome " << worst << " has cost "
       << global[static_cast<std::size_t>(worst)];
    throw DomainError(os.str());
  }

  CostReport report{std::move(global), {}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      report.pairwise.emplace(std::make_pair(i, j),
                              profile[i] + profile[j] - alloc.parts[i] - alloc.parts[j]);
  return report;
}

}  // namespace fricshare::mech
