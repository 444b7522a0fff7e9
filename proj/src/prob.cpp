#include "fricshare/prob.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "fricshare/error.hpp"

namespace fricshare::prob {

namespace {

constexpr double kNormTol = 1e-12;

void check_normalized(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double v : p) total += v;
  if (std::abs(total - 1.0) > kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << what << " must sum to 1 (got " << total << ")";
    throw DomainError(os.str());
  }
}

std::string describe_block(const std::vector<std::size_t>& block, std::size_t index) {
  std::ostringstream os;
  os << "block " << index << " {";
  for (std::size_t k = 0; k < block.size(); ++k) os << (k ? "," : "") << block[k];
  os << "}";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- FiniteSpace

FiniteSpace::FiniteSpace(std::vector<double> base_probs, double tie_tol)
    : probs_(std::move(base_probs)), tie_tol_(tie_tol) {
  if (probs_.empty()) throw DomainError("finite space needs at least one outcome");
  for (std::size_t w = 0; w < probs_.size(); ++w) {
    if (!(probs_[w] > 0.0) || !std::isfinite(probs_[w]))
      throw DomainError("base probability of outcome " + std::to_string(w) +
                        " must be strictly positive");
  }
  check_normalized(probs_, "base probabilities");
  if (!(tie_tol_ >= 0.0)) throw DomainError("tie tolerance must be nonnegative");
}

FiniteSpace FiniteSpace::uniform(std::size_t outcome_count, double tie_tol) {
  if (outcome_count == 0) throw DomainError("finite space needs at least one outcome");
  return FiniteSpace(std::vector<double>(outcome_count, 1.0 / static_cast<double>(outcome_count)),
                     tie_tol);
}

// ------------------------------------------------------------------- RandVar

RandVar::RandVar(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t w = 0; w < values_.size(); ++w) {
    if (!std::isfinite(values_[w]))
      throw DomainError("random variable has a non-finite value at outcome " + std::to_string(w));
  }
}

RandVar::RandVar(std::initializer_list<double> values) : RandVar(std::vector<double>(values)) {}

RandVar RandVar::constant(std::size_t outcome_count, double value) {
  return RandVar(std::vector<double>(outcome_count, value));
}

double RandVar::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RandVar::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool RandVar::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

RandVar& RandVar::operator+=(const RandVar& other) {
  if (other.size() != size()) throw DomainError("random variables live on different spaces");
  for (std::size_t w = 0; w < values_.size(); ++w) values_[w] += other.values_[w];
  return *this;
}

RandVar& RandVar::operator-=(const RandVar& other) {
  if (other.size() != size()) throw DomainError("random variables live on different spaces");
  for (std::size_t w = 0; w < values_.size(); ++w) values_[w] -= other.values_[w];
  return *this;
}

RandVar& RandVar::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

RandVar& RandVar::operator+=(double shift) {
  for (double& v : values_) v += shift;
  return *this;
}

// ------------------------------------------------------------- InfoPartition

InfoPartition::InfoPartition(std::vector<std::vector<std::size_t>> blocks,
                             std::size_t outcome_count)
    : blocks_(std::move(blocks)), block_of_(outcome_count, outcome_count) {
  for (auto& b : blocks_) {
    if (b.empty()) throw DomainError("partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    for (std::size_t w : blocks_[k]) {
      if (w >= outcome_count)
        throw DomainError("partition references outcome " + std::to_string(w) +
                          " outside the space");
      if (block_of_[w] != outcome_count)
        throw DomainError("partition blocks overlap at outcome " + std::to_string(w));
      block_of_[w] = k;
    }
  }
  for (std::size_t w = 0; w < outcome_count; ++w) {
    if (block_of_[w] == outcome_count)
      throw DomainError("partition does not cover outcome " + std::to_string(w));
  }
}

InfoPartition InfoPartition::trivial(std::size_t outcome_count) {
  std::vector<std::size_t> all(outcome_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return InfoPartition({std::move(all)}, outcome_count);
}

InfoPartition InfoPartition::discrete(std::size_t outcome_count) {
  std::vector<std::vector<std::size_t>> blocks(outcome_count);
  for (std::size_t w = 0; w < outcome_count; ++w) blocks[w] = {w};
  return InfoPartition(std::move(blocks), outcome_count);
}

InfoPartition InfoPartition::from_labels(std::span<const std::size_t> labels) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t w = 0; w < labels.size(); ++w) groups[labels[w]].push_back(w);
  std::vector<std::vector<std::size_t>> blocks;
  blocks.reserve(groups.size());
  for (auto& [label, members] : groups) blocks.push_back(std::move(members));
  return InfoPartition(std::move(blocks), labels.size());
}

bool InfoPartition::refines(const InfoPartition& coarser) const {
  if (coarser.outcome_count() != outcome_count()) return false;
  for (const auto& b : blocks_) {
    const std::size_t target = coarser.block_of(b.front());
    for (std::size_t w : b)
      if (coarser.block_of(w) != target) return false;
  }
  return true;
}

// ------------------------------------------------------------------- Measure

Measure::Measure(std::vector<double> probs) : probs_(std::move(probs)) {
  for (std::size_t w = 0; w < probs_.size(); ++w) {
    if (!(probs_[w] >= 0.0) || !std::isfinite(probs_[w]))
      throw DomainError("measure has a negative or non-finite mass at outcome " +
                        std::to_string(w));
  }
  check_normalized(probs_, "measure");
}

Measure Measure::base(const FiniteSpace& space) {
  return Measure(std::vector<double>(space.probs().begin(), space.probs().end()));
}

// ---------------------------------------------------------- EndowmentProfile

EndowmentProfile::EndowmentProfile(std::vector<RandVar> agents) : agents_(std::move(agents)) {
  if (agents_.size() < 3)
    throw DomainError("an endowment profile needs at least 3 agents (got " +
                      std::to_string(agents_.size()) + ")");
  const std::size_t m = agents_.front().size();
  if (m == 0) throw DomainError("endowments must have at least one outcome");
  for (std::size_t i = 1; i < agents_.size(); ++i) {
    if (agents_[i].size() != m)
      throw DomainError("agent " + std::to_string(i) + " lives on a different space");
  }
}

RandVar EndowmentProfile::aggregate() const {
  RandVar s = agents_.front();
  for (std::size_t i = 1; i < agents_.size(); ++i) s += agents_[i];
  return s;
}

EndowmentProfile EndowmentProfile::with_agent(std::size_t i, RandVar x) const {
  auto copy = agents_;
  copy.at(i) = std::move(x);
  return EndowmentProfile(std::move(copy));
}

// ---------------------------------------------------------------- operations

InfoPartition sigma_of(const RandVar& x, double tol) {
  const std::size_t m = x.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<std::size_t> label(m, 0);
  std::size_t current = 0;
  for (std::size_t k = 1; k < m; ++k) {
    if (x[order[k]] - x[order[k - 1]] > tol) ++current;
    label[order[k]] = current;
  }
  return InfoPartition::from_labels(label);
}

InfoPartition join(const InfoPartition& p, const InfoPartition& q) {
  if (p.outcome_count() != q.outcome_count())
    throw DomainError("cannot join partitions of different outcome sets");
  const std::size_t m = p.outcome_count();
  std::vector<std::size_t> label(m);
  for (std::size_t w = 0; w < m; ++w) label[w] = p.block_of(w) * q.block_count() + q.block_of(w);
  return InfoPartition::from_labels(label);
}

InfoPartition augmented_info(const InfoPartition& g, const EndowmentProfile& profile,
                             const FiniteSpace& space) {
  if (g.outcome_count() != space.size() || profile.outcome_count() != space.size())
    throw DomainError("information set, profile and space disagree on the outcome count");
  return join(g, sigma_of(profile.aggregate(), space.tie_tol()));
}

RandVar cond_expect(const RandVar& x, const InfoPartition& part, const Measure& q) {
  if (x.size() != part.outcome_count() || q.size() != part.outcome_count())
    throw DomainError("conditional expectation inputs disagree on the outcome count");
  std::vector<double> out(x.size());
  for (std::size_t b = 0; b < part.block_count(); ++b) {
    const auto& block = part.block(b);
    double mass = 0.0;
    double weighted = 0.0;
    for (std::size_t w : block) {
      mass += q[w];
      weighted += q[w] * x[w];
    }
    if (!(mass > 0.0))
      throw DomainError("measure assigns zero mass to " + describe_block(block, b));
    const double value = weighted / mass;
    for (std::size_t w : block) out[w] = value;
  }
  return RandVar(std::move(out));
}

RandVar cond_expect(const RandVar& x, const InfoPartition& part, const FiniteSpace& space) {
  return cond_expect(x, part, Measure::base(space));
}

double expectation(const RandVar& x, const FiniteSpace& space) {
  if (x.size() != space.size()) throw DomainError("random variable lives on a different space");
  double total = 0.0;
  for (std::size_t w = 0; w < x.size(); ++w) total += space.prob(w) * x[w];
  return total;
}

bool is_measurable(const RandVar& x, const InfoPartition& part, double tol) {
  if (x.size() != part.outcome_count())
    throw DomainError("random variable and partition disagree on the outcome count");
  for (const auto& block : part.blocks()) {
    double lo = x[block.front()];
    double hi = lo;
    for (std::size_t w : block) {
      lo = std::min(lo, x[w]);
      hi = std::max(hi, x[w]);
    }
    if (hi - lo > tol) return false;
  }
  return true;
}

bool verify_measure(const Measure& q, const InfoPartition& part, const FiniteSpace& space,
                    double tol) {
  if (q.size() != space.size() || part.outcome_count() != space.size()) return false;
  for (const auto& block : part.blocks()) {
    double mq = 0.0;
    double mp = 0.0;
    for (std::size_t w : block) {
      mq += q[w];
      mp += space.prob(w);
    }
    if (std::abs(mq - mp) > tol) return false;
  }
  return true;
}

Measure block_tilt(const FiniteSpace& space, const InfoPartition& part,
                   std::span<const double> weights) {
  if (weights.size() != space.size() || part.outcome_count() != space.size())
    throw DomainError("tilt weights, partition and space disagree on the outcome count");
  std::vector<double> out(space.size());
  for (const auto& block : part.blocks()) {
    double base_mass = 0.0;
    double tilted = 0.0;
    for (std::size_t w : block) {
      if (!(weights[w] >= 0.0)) throw DomainError("tilt weights must be nonnegative");
      base_mass += space.prob(w);
      tilted += space.prob(w) * weights[w];
    }
    if (!(tilted > 0.0)) {
      for (std::size_t w : block) out[w] = space.prob(w);
      continue;
    }
    for (std::size_t w : block) out[w] = base_mass * space.prob(w) * weights[w] / tilted;
  }
  // Renormalize away accumulated rounding so the Measure invariant holds.
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return Measure(std::move(out));
}

}  // namespace fricshare::prob
