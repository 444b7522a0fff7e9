#pragma once

// Randomized verification of allocation axioms and risk-sharing properties.
//
// Each check draws inputs that satisfy the hypothesis of the property,
// evaluates both sides and stops at the first violation beyond `tol`. A
// failed check therefore certifies the violation with a stored, replayable
// instance; a passed check only means that no violation was found.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fricshare/mechanisms.hpp"

namespace fricshare::axioms {

enum class AxiomId { IF, AA, OA, FP, SI, ZP, IA, IB, FPstar, Com, RF, AF, UI, CostConvexity };

std::string axiom_name(AxiomId id);
std::optional<AxiomId> parse_axiom(const std::string& name);
const std::vector<AxiomId>& all_axioms();

struct CheckConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  std::size_t space_size = 8;
  std::size_t n_agents = 3;
  double value_lo = -5.0;
  double value_hi = 5.0;
  double tol = 1e-9;
  /// Draw non-trivial information sets for rules that accept them.
  bool random_information = true;
};

/// An allocation rule as seen by the harness. Wraps a MechanismSpec or any
/// custom callable (test fixtures, counterexample rules).
struct Rule {
  std::string name;
  std::function<mech::Allocation(const prob::EndowmentProfile&, const prob::InfoPartition&,
                                 const prob::FiniteSpace&)>
      eval;
  bool trivial_info_only = false;
};

/// Harness view of a spec. Robust rules receive their measure set projected
/// onto each drawn G^X by block renormalization, which leaves measures that
/// already agree with the base on G^X untouched.
Rule make_rule(const mech::MechanismSpec& spec);

/// Everything needed to replay one trial.
struct Instance {
  std::vector<double> probs;
  std::vector<std::vector<double>> x;  ///< profile the property is stated for
  std::vector<std::vector<double>> y;  ///< transformed/companion profile, if any
  std::vector<std::vector<std::size_t>> g;
  std::size_t i = 0;
  std::size_t j = 0;
  double alpha = 0.0;  ///< SI share or convex-combination weight
  std::vector<std::size_t> perm;
};

struct Witness {
  std::size_t agent = 0;
  std::size_t outcome = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

struct Counterexample {
  AxiomId axiom = AxiomId::IF;
  std::string rule;
  double tol = 0.0;
  Instance instance;
  Witness witness;
};

struct CheckResult {
  AxiomId axiom = AxiomId::IF;
  bool passed = true;
  std::size_t trials_run = 0;
  std::optional<Counterexample> counterexample;
};

/// Evaluates one trial. Returns a witness when the property is violated by
/// more than `tol`.
std::optional<Witness> evaluate(const Rule& rule, AxiomId axiom, const Instance& inst,
                                double tol, double tie_tol);

/// Replays a stored counterexample; true when the violation reproduces.
bool reverify(const Rule& rule, const Counterexample& cex);

CheckResult check(const Rule& rule, AxiomId axiom, const CheckConfig& cfg);
CheckResult check(const mech::MechanismSpec& spec, AxiomId axiom, const CheckConfig& cfg);
CheckResult check_cost_convexity(const Rule& rule, const CheckConfig& cfg);

struct Matrix {
  std::vector<std::string> rows;
  std::vector<AxiomId> cols;
  std::vector<std::vector<CheckResult>> cells;
};

Matrix comparison_matrix(const std::vector<Rule>& rules, const std::vector<AxiomId>& axioms,
                         const CheckConfig& cfg);
Matrix comparison_matrix(const std::vector<mech::MechanismSpec>& specs,
                         const std::vector<AxiomId>& axioms, const CheckConfig& cfg);

/// Human-readable grid: a check mark for survived trials, a cross for a
/// certified counterexample.
std::string render_table(const Matrix& m);

// Generators, exposed for tests that build their own properties.
namespace gen {

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial);

/// Values on a 1/4 lattice inside [lo, hi] so that sums are exact; about a
/// quarter of the agents are identically zero and about a quarter of the
/// outcomes repeat an earlier outcome's values in permuted agent order, which
/// produces ties in S with distinct individual values.
std::vector<std::vector<double>> profile(std::mt19937_64& rng, const CheckConfig& cfg);
std::vector<double> probabilities(std::mt19937_64& rng, std::size_t m);
std::vector<std::vector<std::size_t>> partition(std::mt19937_64& rng, std::size_t m);

}  // namespace gen

}  // namespace fricshare::axioms
