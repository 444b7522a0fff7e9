#include "fricshare/axioms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fricshare/error.hpp"

namespace fricshare::axioms {

using mech::Allocation;
using prob::EndowmentProfile;
using prob::FiniteSpace;
using prob::InfoPartition;
using prob::RandVar;

namespace {

constexpr std::array<std::pair<AxiomId, const char*>, 14> kNames{{
    {AxiomId::IF, "IF"},
    {AxiomId::AA, "AA"},
    {AxiomId::OA, "OA"},
    {AxiomId::FP, "FP"},
    {AxiomId::SI, "SI"},
    {AxiomId::ZP, "ZP"},
    {AxiomId::IA, "IA"},
    {AxiomId::IB, "IB"},
    {AxiomId::FPstar, "FP*"},
    {AxiomId::Com, "Com"},
    {AxiomId::RF, "RF"},
    {AxiomId::AF, "AF"},
    {AxiomId::UI, "UI"},
    {AxiomId::CostConvexity, "CostConvexity"},
}};

constexpr double kLatticeStep = 0.25;
constexpr int kAlphaDenominator = 64;

EndowmentProfile to_profile(const std::vector<std::vector<double>>& agents) {
  std::vector<RandVar> vars;
  vars.reserve(agents.size());
  for (const auto& a : agents) vars.emplace_back(a);
  return EndowmentProfile(std::move(vars));
}

double expectation(const RandVar& x, std::span<const double> probs) {
  double e = 0.0;
  for (std::size_t w = 0; w < x.size(); ++w) e += probs[w] * x[w];
  return e;
}

double stop_loss(const RandVar& x, std::span<const double> probs, double t) {
  double e = 0.0;
  for (std::size_t w = 0; w < x.size(); ++w) e += probs[w] * std::max(x[w] - t, 0.0);
  return e;
}

/// Outcome with the largest |a - b|, reported only when that gap exceeds tol.
std::optional<Witness> worst_gap(const RandVar& a, const RandVar& b, std::size_t agent,
                                 double tol, const char* detail) {
  std::optional<Witness> out;
  double worst = tol;
  for (std::size_t w = 0; w < a.size(); ++w) {
    const double gap = std::abs(a[w] - b[w]);
    if (gap > worst) {
      worst = gap;
      out = Witness{agent, w, a[w], b[w], detail};
    }
  }
  return out;
}

/// Outcome with the largest excess a - b above tol.
std::optional<Witness> worst_excess(const RandVar& a, const RandVar& b, std::size_t agent,
                                    double tol, const char* detail) {
  std::optional<Witness> out;
  double worst = tol;
  for (std::size_t w = 0; w < a.size(); ++w) {
    const double excess = a[w] - b[w];
    if (excess > worst) {
      worst = excess;
      out = Witness{agent, w, a[w], b[w], detail};
    }
  }
  return out;
}

std::vector<std::vector<double>> merged(const std::vector<std::vector<double>>& y, std::size_t i,
                                        std::size_t j) {
  auto x = y;
  for (std::size_t w = 0; w < x[i].size(); ++w) x[i][w] = y[i][w] + y[j][w];
  std::fill(x[j].begin(), x[j].end(), 0.0);
  return x;
}

std::vector<std::vector<double>> split_share(const std::vector<std::vector<double>>& x,
                                             std::size_t i, std::size_t j, double alpha) {
  auto y = x;
  for (std::size_t w = 0; w < x[i].size(); ++w) {
    y[j][w] = alpha * x[i][w];
    y[i][w] = x[i][w] - alpha * x[i][w];
  }
  return y;
}

std::vector<std::vector<double>> convex_mix(const std::vector<std::vector<double>>& x,
                                            const std::vector<std::vector<double>>& y,
                                            double lambda) {
  auto z = x;
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t w = 0; w < x[k].size(); ++w)
      z[k][w] = lambda * x[k][w] + (1.0 - lambda) * y[k][w];
  return z;
}

double lattice_value(std::mt19937_64& rng, double lo, double hi) {
  const double base = std::ceil(lo / kLatticeStep) * kLatticeStep;
  const auto steps = static_cast<long long>(std::floor((hi - base) / kLatticeStep));
  if (steps < 0) throw DomainError("value range contains no lattice point");
  std::uniform_int_distribution<long long> pick(0, steps);
  return base + kLatticeStep * static_cast<double>(pick(rng));
}

void validate(const CheckConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("trials must be at least 1");
  if (cfg.space_size < 4) throw DomainError("space_size must be at least 4");
  if (cfg.n_agents < 3) throw DomainError("n_agents must be at least 3");
  if (!(cfg.value_lo < cfg.value_hi)) throw DomainError("value range must be nonempty");
  if (!(cfg.tol > 0.0)) throw DomainError("tolerance must be positive");
}

Instance draw(AxiomId axiom, const Rule& rule, const CheckConfig& cfg, std::mt19937_64& rng) {
  const std::size_t m = cfg.space_size;
  const std::size_t n = cfg.n_agents;
  Instance inst;
  inst.probs = gen::probabilities(rng, m);
  if (!rule.trivial_info_only && cfg.random_information) {
    inst.g = gen::partition(rng, m);
  } else {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    inst.g = {all};
  }
  inst.x = gen::profile(rng, cfg);

  std::uniform_int_distribution<std::size_t> agent(0, n - 1);
  inst.i = agent(rng);
  do {
    inst.j = agent(rng);
  } while (inst.j == inst.i);

  auto& x = inst.x;
  const std::size_t i = inst.i;
  const std::size_t j = inst.j;
  switch (axiom) {
    case AxiomId::IF:
      if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
        x[i] = x[j];
      } else {
        for (std::size_t w = 0; w < m; ++w) x[i][w] = std::max(x[i][w], x[j][w]);
      }
      break;
    case AxiomId::AA:
      inst.perm.resize(n);
      std::iota(inst.perm.begin(), inst.perm.end(), std::size_t{0});
      std::shuffle(inst.perm.begin(), inst.perm.end(), rng);
      break;
    case AxiomId::OA:
      inst.y = x;
      for (std::size_t w = 0; w < m; ++w) inst.y[i][w] += x[j][w];
      std::fill(inst.y[j].begin(), inst.y[j].end(), 0.0);
      break;
    case AxiomId::FP:
    case AxiomId::FPstar:
      inst.y = x;
      x = merged(inst.y, i, j);
      break;
    case AxiomId::SI:
      std::fill(x[j].begin(), x[j].end(), 0.0);
      inst.alpha =
          std::uniform_int_distribution<int>(0, kAlphaDenominator)(rng) / double(kAlphaDenominator);
      inst.y = split_share(x, i, j, inst.alpha);
      break;
    case AxiomId::ZP:
      std::fill(x[j].begin(), x[j].end(), 0.0);
      break;
    case AxiomId::IB: {
      const InfoPartition g(inst.g, m);
      for (const auto& block : g.blocks()) {
        const double v = lattice_value(rng, cfg.value_lo, cfg.value_hi);
        for (std::size_t w : block) x[i][w] = v;
      }
      break;
    }
    case AxiomId::CostConvexity: {
      inst.y.assign(n, std::vector<double>(m, 0.0));
      for (std::size_t w = 0; w < m; ++w) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += x[k][w];
        double rest = s;
        for (std::size_t k = 0; k + 1 < n; ++k) {
          inst.y[k][w] = lattice_value(rng, cfg.value_lo, cfg.value_hi);
          rest -= inst.y[k][w];
        }
        inst.y[n - 1][w] = rest;
      }
      inst.alpha =
          std::uniform_int_distribution<int>(0, kAlphaDenominator)(rng) / double(kAlphaDenominator);
      break;
    }
    case AxiomId::IA:
    case AxiomId::Com:
    case AxiomId::RF:
    case AxiomId::AF:
    case AxiomId::UI:
      break;
  }
  return inst;
}

CheckResult run_checks(const Rule& rule, AxiomId axiom, const CheckConfig& cfg) {
  validate(cfg);
  CheckResult result;
  result.axiom = axiom;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    auto rng = gen::trial_engine(cfg.seed, t);
    Instance inst = draw(axiom, rule, cfg, rng);
    if (auto w = evaluate(rule, axiom, inst, cfg.tol, cfg.tol)) {
      result.passed = false;
      result.trials_run = t + 1;
      result.counterexample = Counterexample{axiom, rule.name, cfg.tol, std::move(inst), *w};
      return result;
    }
  }
  result.trials_run = cfg.trials;
  return result;
}

}  // namespace

std::string axiom_name(AxiomId id) {
  for (const auto& [k, name] : kNames)
    if (k == id) return name;
  return "?";
}

std::optional<AxiomId> parse_axiom(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  if (name == "FPstar") return AxiomId::FPstar;
  return std::nullopt;
}

const std::vector<AxiomId>& all_axioms() {
  static const std::vector<AxiomId> ids = [] {
    std::vector<AxiomId> v;
    for (const auto& [k, name] : kNames) v.push_back(k);
    return v;
  }();
  return ids;
}

Rule make_rule(const mech::MechanismSpec& spec) {
  mech::validate(spec);
  Rule rule;
  rule.name = mech::spec_name(spec);
  rule.trivial_info_only = std::holds_alternative<mech::Qbrs>(spec);
  if (const auto* robust = std::get_if<mech::RobustCmrs>(&spec)) {
    const auto measures = robust->measures;
    rule.eval = [measures](const EndowmentProfile& profile, const InfoPartition& g,
                           const FiniteSpace& space) {
      const InfoPartition gx = prob::augmented_info(g, profile, space);
      std::vector<prob::Measure> projected;
      projected.reserve(measures.size());
      for (const auto& q : measures) {
        if (q.size() != space.size()) throw DomainError("measure size does not match the space");
        std::vector<double> density(space.size());
        for (std::size_t w = 0; w < space.size(); ++w) density[w] = q.density(space, w);
        projected.push_back(prob::block_tilt(space, gx, density));
      }
      return mech::robust_cmrs(profile, g, projected, space);
    };
  } else {
    rule.eval = [spec](const EndowmentProfile& profile, const InfoPartition& g,
                       const FiniteSpace& space) { return mech::apply(spec, profile, g, space); };
  }
  return rule;
}

std::optional<Witness> evaluate(const Rule& rule, AxiomId axiom, const Instance& inst, double tol,
                                double tie_tol) {
  const FiniteSpace space(inst.probs, tie_tol);
  const std::size_t m = space.size();
  const InfoPartition g(inst.g, m);
  const EndowmentProfile x = to_profile(inst.x);
  const std::size_t n = x.agent_count();
  const std::size_t i = inst.i;
  const std::size_t j = inst.j;
  auto run = [&](const EndowmentProfile& p) { return rule.eval(p, g, space); };

  switch (axiom) {
    case AxiomId::IF: {
      const Allocation h = run(x);
      return worst_excess(h.parts[j], h.parts[i], i, tol, "H_j exceeds H_i although X_i >= X_j");
    }
    case AxiomId::AA: {
      std::vector<RandVar> permuted;
      for (std::size_t k = 0; k < n; ++k) permuted.push_back(x[inst.perm[k]]);
      const Allocation h = run(x);
      const Allocation hp = run(EndowmentProfile(std::move(permuted)));
      for (std::size_t k = 0; k < n; ++k)
        if (auto w = worst_gap(hp.parts[k], h.parts[inst.perm[k]], k, tol,
                               "H_k(permuted X) differs from H_perm(k)(X)"))
          return w;
      return std::nullopt;
    }
    case AxiomId::OA: {
      const Allocation h = run(x);
      auto y = x.with_agent(i, x[i] + x[j]).with_agent(j, RandVar::zeros(m));
      const Allocation hy = run(y);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (auto w = worst_gap(hy.parts[k], h.parts[k], k, tol,
                               "third-party allocation changed after a full transfer"))
          return w;
      }
      std::vector<RandVar> z(n, RandVar::zeros(m));
      z[i] = x[i];
      z[j] = x.aggregate() - x[i];
      const Allocation hz = run(EndowmentProfile(std::move(z)));
      return worst_gap(hz.parts[i], h.parts[i], i, tol,
                       "H_i depends on how the others split S - X_i");
    }
    case AxiomId::FP:
    case AxiomId::FPstar: {
      const EndowmentProfile y = to_profile(inst.y);
      const Allocation hx = run(x);
      const Allocation hy = run(y);
      const RandVar merged_side = hx.parts[i] + hx.parts[j];
      const RandVar split_side = hy.parts[i] + hy.parts[j];
      if (axiom == AxiomId::FP)
        return worst_excess(split_side, merged_side, i, tol,
                            "separate pair receives more than the merged agent");
      return worst_gap(merged_side, split_side, i, tol, "pairwise cost changes after merging");
    }
    case AxiomId::SI: {
      const Allocation hx = run(x);
      const EndowmentProfile y = to_profile(split_share(inst.x, i, j, inst.alpha));
      const Allocation hy = run(y);
      return worst_gap(hy.parts[j], inst.alpha * hx.parts[i], j, tol,
                       "received share is not alpha times the original allocation");
    }
    case AxiomId::ZP: {
      const Allocation h = run(x);
      return worst_gap(h.parts[j], RandVar::zeros(m), j, tol, "zero endowment receives nonzero");
    }
    case AxiomId::IA: {
      const Allocation h = run(x);
      const InfoPartition gx = prob::augmented_info(g, x, space);
      for (std::size_t k = 0; k < n; ++k) {
        for (const auto& block : gx.blocks()) {
          for (std::size_t w : block) {
            if (std::abs(h.parts[k][w] - h.parts[k][block.front()]) > tol)
              return Witness{k, w, h.parts[k][w], h.parts[k][block.front()],
                             "allocation varies inside a block of G^X"};
          }
        }
      }
      return std::nullopt;
    }
    case AxiomId::IB: {
      const Allocation h = run(x);
      return worst_gap(h.parts[i], x[i], i, tol, "G^X-measurable endowment is not passed through");
    }
    case AxiomId::Com: {
      const Allocation h = run(x);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          for (std::size_t w = 0; w < m; ++w)
            for (std::size_t v = w + 1; v < m; ++v) {
              const double prod =
                  (h.parts[a][w] - h.parts[a][v]) * (h.parts[b][w] - h.parts[b][v]);
              if (prod < -tol)
                return Witness{a, w, prod, 0.0,
                               "agents " + std::to_string(a) + " and " + std::to_string(b) +
                                   " move in opposite directions between outcomes " +
                                   std::to_string(w) + " and " + std::to_string(v)};
            }
      return std::nullopt;
    }
    case AxiomId::RF: {
      const Allocation h = run(x);
      for (std::size_t k = 0; k < n; ++k)
        if (auto w = worst_excess(h.parts[k], RandVar::constant(m, x[k].max()), k, tol,
                                  "allocation exceeds the largest endowment value"))
          return w;
      return std::nullopt;
    }
    case AxiomId::AF: {
      const Allocation h = run(x);
      for (std::size_t k = 0; k < n; ++k) {
        const double eh = expectation(h.parts[k], space.probs());
        const double ex = expectation(x[k], space.probs());
        if (std::abs(eh - ex) > tol) return Witness{k, 0, eh, ex, "mean allocation != mean endowment"};
      }
      return std::nullopt;
    }
    case AxiomId::UI: {
      const Allocation h = run(x);
      for (std::size_t k = 0; k < n; ++k) {
        const double eh = expectation(h.parts[k], space.probs());
        const double ex = expectation(x[k], space.probs());
        if (std::abs(eh - ex) > tol)
          return Witness{k, 0, eh, ex, "means differ, so no convex-order improvement"};
        const double lo = std::min(x[k].min(), h.parts[k].min());
        const double hi = std::max(x[k].max(), h.parts[k].max());
        for (int s = 0; s <= 40; ++s) {
          const double t = lo + (hi - lo) * s / 40.0;
          const double sh = stop_loss(h.parts[k], space.probs(), t);
          const double sx = stop_loss(x[k], space.probs(), t);
          if (sh > sx + tol)
            return Witness{k, static_cast<std::size_t>(s), sh, sx,
                           "stop-loss of allocation exceeds stop-loss of endowment at t = " +
                               std::to_string(t)};
        }
      }
      return std::nullopt;
    }
    case AxiomId::CostConvexity: {
      const EndowmentProfile y = to_profile(inst.y);
      const EndowmentProfile z = to_profile(convex_mix(inst.x, inst.y, inst.alpha));
      const auto cx = mech::frictional_costs(x, run(x));
      const auto cy = mech::frictional_costs(y, run(y));
      const auto cz = mech::frictional_costs(z, run(z));
      const double lam = inst.alpha;
      if (auto w = worst_excess(cz.global, lam * cx.global + (1.0 - lam) * cy.global, 0, tol,
                                "global cost of the mixture exceeds the mixture of costs"))
        return w;
      for (const auto& [key, c] : cz.pairwise) {
        const RandVar bound = lam * cx.pairwise.at(key) + (1.0 - lam) * cy.pairwise.at(key);
        if (auto w = worst_excess(c, bound, key.first, tol,
                                  "pairwise cost of the mixture exceeds the mixture of costs")) {
          w->detail += " (pair " + std::to_string(key.first) + "," + std::to_string(key.second) + ")";
          return w;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool reverify(const Rule& rule, const Counterexample& cex) {
  return evaluate(rule, cex.axiom, cex.instance, cex.tol, cex.tol).has_value();
}

CheckResult check(const Rule& rule, AxiomId axiom, const CheckConfig& cfg) {
  return run_checks(rule, axiom, cfg);
}

CheckResult check(const mech::MechanismSpec& spec, AxiomId axiom, const CheckConfig& cfg) {
  return run_checks(make_rule(spec), axiom, cfg);
}

CheckResult check_cost_convexity(const Rule& rule, const CheckConfig& cfg) {
  return run_checks(rule, AxiomId::CostConvexity, cfg);
}

Matrix comparison_matrix(const std::vector<Rule>& rules, const std::vector<AxiomId>& axioms,
                         const CheckConfig& cfg) {
  Matrix m;
  m.cols = axioms;
  for (const auto& rule : rules) {
    m.rows.push_back(rule.name);
    std::vector<CheckResult> row;
    for (AxiomId a : axioms) row.push_back(run_checks(rule, a, cfg));
    m.cells.push_back(std::move(row));
  }
  return m;
}

Matrix comparison_matrix(const std::vector<mech::MechanismSpec>& specs,
                         const std::vector<AxiomId>& axioms, const CheckConfig& cfg) {
  std::vector<Rule> rules;
  for (const auto& s : specs) rules.push_back(make_rule(s));
  return comparison_matrix(rules, axioms, cfg);
}

std::string render_table(const Matrix& m) {
  std::size_t name_width = 4;
  for (const auto& r : m.rows) name_width = std::max(name_width, r.size());
  std::size_t cell_width = 4;
  for (AxiomId a : m.cols) cell_width = std::max(cell_width, axiom_name(a).size() + 2);

  std::ostringstream os;
  os << std::string(name_width + 2, ' ');
  for (AxiomId a : m.cols) {
    const std::string name = axiom_name(a);
    os << name << std::string(cell_width - name.size(), ' ');
  }
  os << '\n';
  std::size_t trials = 0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    os << m.rows[r] << std::string(name_width + 2 - m.rows[r].size(), ' ');
    for (const auto& cell : m.cells[r]) {
      os << (cell.passed ? "✓" : "✗") << std::string(cell_width - 1, ' ');
      if (cell.passed) trials = std::max(trials, cell.trials_run);
    }
    os << '\n';
  }
  os << "✓ = no violation in " << trials << " seeded trials; "
     << "✗ = stored counterexample\n";
  return os.str();
}

namespace gen {

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

std::vector<std::vector<double>> profile(std::mt19937_64& rng, const CheckConfig& cfg) {
  const std::size_t n = cfg.n_agents;
  const std::size_t m = cfg.space_size;
  std::vector<std::vector<double>> x(n, std::vector<double>(m));
  for (auto& agent : x)
    for (double& v : agent) v = lattice_value(rng, cfg.value_lo, cfg.value_hi);

  std::bernoulli_distribution quarter(0.25);
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < n; ++k) {
    if (quarter(rng)) {
      std::fill(x[k].begin(), x[k].end(), 0.0);
    } else {
      live.push_back(k);
    }
  }
  for (std::size_t w = 1; w < m; ++w) {
    if (!quarter(rng)) continue;
    const std::size_t src = std::uniform_int_distribution<std::size_t>(0, w - 1)(rng);
    auto order = live;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t a = 0; a < live.size(); ++a) x[live[a]][w] = x[order[a]][src];
  }
  return x;
}

std::vector<double> probabilities(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::vector<double> p(m);
  double total = 0.0;
  for (double& v : p) total += (v = weight(rng));
  for (double& v : p) v /= total;
  return p;
}

std::vector<std::vector<std::size_t>> partition(std::mt19937_64& rng, std::size_t m) {
  const std::size_t labels = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, labels - 1);
  std::vector<std::size_t> label(m);
  for (auto& l : label) l = pick(rng);
  return InfoPartition::from_labels(label).blocks();
}

}  // namespace gen

}  // namespace fricshare::axioms
