#pragma once

// Finite probability spaces and the exact conditioning machinery every
// allocation rule is evaluated on. Sub-sigma-algebras are represented by
// the partitions that generate them, which is lossless on a finite outcome
// set.

#include <cstddef>
#include <span>
#include <vector>

namespace fricshare::prob {

/// Outcome set {0, ..., n-1} with strictly positive base probabilities.
///
/// `tie_tol` is the gap below which two values of the aggregate endowment are
/// treated as the same event when the rules build sigma(S). Zero means exact
/// equality.
class FiniteSpace {
 public:
  explicit FiniteSpace(std::vector<double> base_probs, double tie_tol = 0.0);

  static FiniteSpace uniform(std::size_t outcome_count, double tie_tol = 0.0);

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t omega) const { return probs_[omega]; }
  double tie_tol() const { return tie_tol_; }

 private:
  std::vector<double> probs_;
  double tie_tol_ = 0.0;
};

/// A real-valued random variable on a finite space, stored outcome by outcome.
class RandVar {
 public:
  RandVar() = default;
  explicit RandVar(std::vector<double> values);
  RandVar(std::initializer_list<double> values);

  static RandVar constant(std::size_t outcome_count, double value);
  static RandVar zeros(std::size_t outcome_count) { return constant(outcome_count, 0.0); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t omega) const { return values_[omega]; }
  double& operator[](std::size_t omega) { return values_[omega]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  double min() const;
  double max() const;
  bool is_zero() const;

  RandVar& operator+=(const RandVar& other);
  RandVar& operator-=(const RandVar& other);
  RandVar& operator*=(double scale);
  RandVar& operator+=(double shift);

  friend RandVar operator+(RandVar a, const RandVar& b) { return a += b; }
  friend RandVar operator-(RandVar a, const RandVar& b) { return a -= b; }
  friend RandVar operator*(double s, RandVar a) { return a *= s; }
  friend RandVar operator*(RandVar a, double s) { return a *= s; }
  friend bool operator==(const RandVar&, const RandVar&) = default;

 private:
  std::vector<double> values_;
};

/// Partition of the outcome set in canonical form: members ascending inside
/// each block, blocks ordered by their smallest member.
class InfoPartition {
 public:
  InfoPartition() = default;
  InfoPartition(std::vector<std::vector<std::size_t>> blocks, std::size_t outcome_count);

  static InfoPartition trivial(std::size_t outcome_count);
  static InfoPartition discrete(std::size_t outcome_count);
  /// Groups outcomes sharing the same label; labels are arbitrary integers.
  static InfoPartition from_labels(std::span<const std::size_t> labels);

  std::size_t outcome_count() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  const std::vector<std::size_t>& block(std::size_t b) const { return blocks_[b]; }
  std::size_t block_of(std::size_t omega) const { return block_of_[omega]; }

  bool is_trivial() const { return blocks_.size() == 1; }
  /// True when every block of *this lies inside one block of `coarser`.
  bool refines(const InfoPartition& coarser) const;

  friend bool operator==(const InfoPartition& a, const InfoPartition& b) {
    return a.blocks_ == b.blocks_;
  }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Probability measure on the outcome set. Absolute continuity with respect
/// to the base measure is automatic because base probabilities are positive.
class Measure {
 public:
  explicit Measure(std::vector<double> probs);
  static Measure base(const FiniteSpace& space);

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t omega) const { return probs_[omega]; }
  /// dQ/dP at `omega`.
  double density(const FiniteSpace& space, std::size_t omega) const {
    return probs_[omega] / space.prob(omega);
  }

 private:
  std::vector<double> probs_;
};

/// Initial endowments of n >= 3 agents on a common outcome set.
class EndowmentProfile {
 public:
  explicit EndowmentProfile(std::vector<RandVar> agents);

  std::size_t agent_count() const { return agents_.size(); }
  std::size_t outcome_count() const { return agents_.front().size(); }
  const RandVar& operator[](std::size_t i) const { return agents_[i]; }
  const std::vector<RandVar>& agents() const { return agents_; }

  /// S^X, summed in agent order.
  RandVar aggregate() const;

  EndowmentProfile with_agent(std::size_t i, RandVar x) const;

 private:
  std::vector<RandVar> agents_;
};

/// Partition generated by `x`, where values linked by a chain of gaps <= tol
/// share a block.
InfoPartition sigma_of(const RandVar& x, double tol = 0.0);

/// Common refinement of two partitions of the same outcome set.
InfoPartition join(const InfoPartition& p, const InfoPartition& q);

/// G^X: the information set joined with sigma(S^X), using the space's tie
/// tolerance.
InfoPartition augmented_info(const InfoPartition& g, const EndowmentProfile& profile,
                             const FiniteSpace& space);

RandVar cond_expect(const RandVar& x, const InfoPartition& part, const Measure& q);
RandVar cond_expect(const RandVar& x, const InfoPartition& part, const FiniteSpace& space);

double expectation(const RandVar& x, const FiniteSpace& space);

/// True iff x varies by at most `tol` inside every block.
bool is_measurable(const RandVar& x, const InfoPartition& part, double tol = 0.0);

/// True iff q agrees with the base measure on every block, i.e. Q|_G = P|_G.
bool verify_measure(const Measure& q, const InfoPartition& part, const FiniteSpace& space,
                    double tol);

/// Reweights the base measure by `weights` inside each block while keeping
/// every block's base mass, which always yields a measure agreeing with the
/// base on `part`.
Measure block_tilt(const FiniteSpace& space, const InfoPartition& part,
                   std::span<const double> weights);

}  // namespace fricshare::prob
