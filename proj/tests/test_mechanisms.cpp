#include <doctest.h>

#include <random>

#include "fricshare/error.hpp"
#include "fricshare/mechanisms.hpp"
#include "fricshare/quantile.hpp"
#include "oracles.hpp"

using namespace fricshare;
using namespace fricshare::mech;
using prob::augmented_info;
using prob::cond_expect;

namespace {

using Blocks = std::vector<std::vector<std::size_t>>;

struct Case {
  FiniteSpace space;
  EndowmentProfile profile;
  InfoPartition g;
};

/// Random profile with rounded values so that the aggregate has ties.
Case random_case(std::mt19937_64& rng, std::size_t m = 8, std::size_t n = 3,
                 bool info = true) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> p(m);
  double t = 0.0;
  for (auto& v : p) t += (v = u(rng));
  for (auto& v : p) v /= t;
  std::uniform_int_distribution<int> val(-8, 8);
  std::vector<RandVar> agents;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(m);
    for (auto& v : x) v = 0.5 * val(rng);
    agents.emplace_back(x);
  }
  std::vector<std::size_t> lab(m, 0);
  if (info) {
    std::uniform_int_distribution<std::size_t> pick(0, 2);
    for (auto& l : lab) l = pick(rng);
  }
  return {FiniteSpace(p, 1e-9), EndowmentProfile(agents), InfoPartition::from_labels(lab)};
}

void check_close(const RandVar& a, const RandVar& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t w = 0; w < a.size(); ++w) CHECK(std::abs(a[w] - b[w]) <= tol);
}

}  // namespace

TEST_CASE("CMRS averages over sigma(S) blocks") {
  const auto space = FiniteSpace::uniform(4);
  const EndowmentProfile x({RandVar{1, 0, 1, 0}, RandVar{0, 1, 1, 2}, RandVar::zeros(4)});
  const auto h = apply(Cmrs{}, x, InfoPartition::trivial(4), space);
  CHECK(h.parts[0] == RandVar{0.5, 0.5, 0.5, 0.5});
  CHECK(h.parts[1] == RandVar{0.5, 0.5, 1.5, 1.5});
  CHECK(h.parts[2] == RandVar::zeros(4));
  CHECK(h.info_used.blocks() == Blocks{{0, 1}, {2, 3}});
  const auto costs = frictional_costs(x, h);
  CHECK(costs.global == RandVar::zeros(4));
}

TEST_CASE("subjective CMRS with the base measure equals CMRS; proportional splits evenly") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_case(rng);
    const auto a = apply(Cmrs{}, c.profile, c.g, c.space);
    const auto b = apply(SubjectiveCmrs{Measure::base(c.space)}, c.profile, c.g, c.space);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.parts[i] == b.parts[i]);
    const auto p = apply(Proportional{}, c.profile, c.g, c.space);
    const RandVar s = c.profile.aggregate();
    for (std::size_t i = 0; i < 3; ++i) check_close(p.parts[i], (1.0 / 3.0) * s, 1e-15);
    CHECK(frictional_costs(c.profile, p).global.max() <= 1e-9);
  }
}

TEST_CASE("conditional left expected shortfall examples") {
  const auto space = FiniteSpace::uniform(4);
  const Measure base = Measure::base(space);
  const InfoPartition halves({{0, 1}, {2, 3}}, 4);
  const RandVar es = cond_left_es(RandVar{0, 1, 5, 7}, halves, 0.5, base);
  CHECK(es[0] == 0.0);
  CHECK(es[1] == 0.0);
  CHECK(es[2] == 5.0);
  const RandVar tail = cond_left_es(RandVar{1, 2, 3, 4}, InfoPartition::trivial(4), 0.5, base);
  for (std::size_t w = 0; w < 4; ++w) CHECK(tail[w] == doctest::Approx(1.5).epsilon(1e-15));
  // Fractional boundary atom: worst 30% of (1,2,3,4) is 1 with weight .25 and 2 with .05.
  const RandVar frac = cond_left_es(RandVar{4, 3, 2, 1}, InfoPartition::trivial(4), 0.3, base);
  CHECK(frac[0] == doctest::Approx((0.25 * 1 + 0.05 * 2) / 0.3).epsilon(1e-14));
  CHECK_THROWS_AS(cond_left_es(RandVar{1, 2, 3, 4}, halves, 0.0, base), DomainError);
  CHECK_THROWS_AS(cond_left_es(RandVar{1, 2, 3, 4}, halves, 1.5, base), DomainError);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto c = random_case(rng);
    const auto gx = augmented_info(c.g, c.profile, c.space);
    for (std::size_t i = 0; i < 3; ++i)
      check_close(cond_left_es(c.profile[i], gx, 1.0, Measure::base(c.space)),
                  cond_expect(c.profile[i], gx, c.space), 1e-12);
  }
}

TEST_CASE("robust CMRS takes the entrywise minimum over admissible measures") {
  const auto space = FiniteSpace::uniform(4);
  const EndowmentProfile x({RandVar{1, 3, 2, 6}, RandVar{0, -2, 1, -3}, RandVar::zeros(4)});
  const auto g = InfoPartition::trivial(4);
  REQUIRE(augmented_info(g, x, space).blocks() == Blocks{{0, 1}, {2, 3}});

  const auto single = robust_cmrs(x, g, {Measure::base(space)}, space);
  const auto cm = apply(Cmrs{}, x, g, space);
  for (std::size_t i = 0; i < 3; ++i) CHECK(single.parts[i] == cm.parts[i]);

  const Measure q1({0.3, 0.2, 0.25, 0.25});
  const Measure q2({0.25, 0.25, 0.1, 0.4});
  const auto h = robust_cmrs(x, g, {q1, q2}, space);
  check_close(h.parts[0], RandVar{1.8, 1.8, 4.0, 4.0}, 1e-12);
  check_close(h.parts[1], RandVar{-1.0, -1.0, -2.2, -2.2}, 1e-12);
  CHECK(h.parts[2] == RandVar::zeros(4));

  const Measure bad({0.4, 0.2, 0.2, 0.2});
  try {
    robust_cmrs(x, g, {q1, bad}, space);
    FAIL("expected an inadmissible-measure error");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("measure 1") != std::string::npos);
    CHECK(msg.find("block 0") != std::string::npos);
  }
  CHECK_THROWS_AS(robust_cmrs(x, g, {}, space), DomainError);
}

TEST_CASE("robust CMRS never exceeds CMRS when the base measure is admissible") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_case(rng);
    const auto gx = augmented_info(c.g, c.profile, c.space);
    std::vector<Measure> ms{Measure::base(c.space)};
    for (int k = 0; k < 3; ++k) {
      std::vector<double> w(c.space.size());
      for (auto& v : w) v = u(rng);
      ms.push_back(prob::block_tilt(c.space, gx, w));
    }
    const auto r = robust_cmrs(c.profile, c.g, ms, c.space);
    const auto cm = apply(Cmrs{}, c.profile, c.g, c.space);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t w = 0; w < c.space.size(); ++w) CHECK(r.parts[i][w] <= cm.parts[i][w] + 1e-12);
  }
}

TEST_CASE("left ES equals the minimum over density-cap vertices on small blocks") {
  std::mt19937_64 rng(4);
  const std::vector<double> lambdas{0.1, 0.3, 0.5, 0.8, 0.95};
  for (int t = 0; t < 300; ++t) {
    const auto c = random_case(rng, 8, 3, true);
    const auto gx = augmented_info(c.g, c.profile, c.space);
    const double lambda = lambdas[static_cast<std::size_t>(t) % lambdas.size()];
    for (std::size_t i = 0; i < 3; ++i) {
      const RandVar es = cond_left_es(c.profile[i], gx, lambda, Measure::base(c.space));
      for (const auto& block : gx.blocks()) {
        if (block.size() > 6) continue;
        double mass = 0.0;
        for (std::size_t w : block) mass += c.space.prob(w);
        std::vector<double> xs, pt;
        for (std::size_t w : block) {
          xs.push_back(c.profile[i][w]);
          pt.push_back(c.space.prob(w) / mass);
        }
        CHECK(std::abs(es[block.front()] - oracle::density_cap_min(xs, pt, lambda)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("mean-deviation examples") {
  const auto space = FiniteSpace::uniform(4);
  const auto g = InfoPartition::trivial(4);
  const EndowmentProfile x({RandVar{0, 2, 1, 1}, RandVar{1, 1, 0, 2}, RandVar::zeros(4)});
  const auto h = apply(MeanDeviation{Deviation::CondStdDev, 1.0}, x, g, space);
  check_close(h.parts[0], RandVar{0.0, 1.0, 0.0, 1.0}, 1e-15);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_case(rng);
    for (Deviation d : {Deviation::CondStdDev, Deviation::CondMeanAbsDev, Deviation::CondLowerSemiDev}) {
      const auto zero = apply(MeanDeviation{d, 0.0}, c.profile, c.g, c.space);
      const auto cm = apply(Cmrs{}, c.profile, c.g, c.space);
      for (std::size_t i = 0; i < 3; ++i) CHECK(zero.parts[i] == cm.parts[i]);
      // A G^X-measurable endowment passes through unchanged.
      const auto gx = augmented_info(c.g, c.profile, c.space);
      const RandVar meas = cond_expect(c.profile[0], gx, c.space);
      const auto prof = c.profile.with_agent(0, meas).with_agent(1, c.profile[1] + c.profile[0] - meas);
      REQUIRE(augmented_info(c.g, prof, c.space) == gx);
      const auto hm = apply(MeanDeviation{d, 2.0}, prof, c.g, c.space);
      check_close(hm.parts[0], meas, 1e-12);
    }
  }
}

TEST_CASE("deviation measures against the four deviation conditions") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> pos(0.0, 5.0);
  const std::size_t m = 8;
  for (Deviation d : {Deviation::CondStdDev, Deviation::CondMeanAbsDev, Deviation::CondLowerSemiDev}) {
    for (int t = 0; t < 200; ++t) {
      const auto c = random_case(rng, m);
      const auto part = augmented_info(c.g, c.profile, c.space);
      std::vector<double> xv(m), yv(m), gv(part.block_count()), nv(m);
      for (auto& v : xv) v = val(rng);
      for (auto& v : yv) v = val(rng);
      for (auto& v : gv) v = val(rng);
      for (auto& v : nv) v = pos(rng);
      std::vector<double> meas(m);
      for (std::size_t w = 0; w < m; ++w) meas[w] = gv[part.block_of(w)];
      const RandVar x(xv), y(yv), gm(meas), nonneg(nv);
      const double a = pos(rng);
      const RandVar dx = cond_deviation(x, part, d, c.space);
      const RandVar dy = cond_deviation(y, part, d, c.space);
      const RandVar dsum = cond_deviation(x + y, part, d, c.space);
      const RandVar dscaled = cond_deviation(a * x, part, d, c.space);
      const RandVar dshift = cond_deviation(x + gm, part, d, c.space);
      CHECK(prob::is_measurable(dx, part, 0.0));
      for (std::size_t w = 0; w < m; ++w) {
        CHECK(dsum[w] <= dx[w] + dy[w] + 1e-12);
        CHECK(std::abs(dscaled[w] - a * dx[w]) <= 1e-12 * (1.0 + a * dx[w]));
        CHECK(std::abs(dshift[w] - dx[w]) <= 1e-12);
        CHECK(dx[w] >= 0.0);
      }
      if (d == Deviation::CondLowerSemiDev) {
        const RandVar dn = cond_deviation(nonneg, part, d, c.space);
        const RandVar en = cond_expect(nonneg, part, c.space);
        for (std::size_t w = 0; w < m; ++w) CHECK(dn[w] <= en[w] + 1e-12);
      }
    }
  }
  // A nonnegative variable whose spread exceeds its mean: the standard and
  // mean absolute deviations break the mean bound, the lower semideviation
  // does not.
  const auto space = FiniteSpace::uniform(4);
  const auto triv = InfoPartition::trivial(4);
  const RandVar spike{0, 0, 0, 100};
  CHECK(cond_deviation(spike, triv, Deviation::CondStdDev, space)[0] ==
        doctest::Approx(43.30127018922193));
  CHECK(cond_deviation(spike, triv, Deviation::CondMeanAbsDev, space)[0] == doctest::Approx(37.5));
  CHECK(cond_deviation(spike, triv, Deviation::CondLowerSemiDev, space)[0] ==
        doctest::Approx(18.75));
  CHECK(cond_deviation(spike, triv, Deviation::CondStdDev, space)[0] > 25.0);
  CHECK(cond_deviation(spike, triv, Deviation::CondMeanAbsDev, space)[0] > 25.0);
}

TEST_CASE("mixed quantile definitions") {
  const DiscreteDist d({1.0, 3.0}, {0.5, 0.5});
  CHECK(d.quantile_lower(0.5) == 1.0);
  CHECK(d.quantile_upper(0.5) == 3.0);
  CHECK(quantile_mixed(d, 0.5, 0.5) == 2.0);
  CHECK(quantile_mixed(d, 1.0, 0.3) == 3.0);
  CHECK(quantile_mixed(d, 0.0, 0.3) == 1.0);
  CHECK(d.cdf(0.5) == 0.0);
  CHECK(d.cdf(2.0) == 0.5);
  CHECK_THROWS_AS(DiscreteDist({1.0, 1.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(DiscreteDist({1.0, 2.0}, {0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(quantile_mixed(d, 1.5, 0.5), DomainError);
  const double vals[] = {3.0, 1.0, 3.0, 2.0};
  const double probs[] = {0.25, 0.25, 0.25, 0.25};
  const auto e = DiscreteDist::from_values(vals, probs);
  CHECK(e.support() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(e.weights() == std::vector<double>{0.25, 0.25, 0.5});
}

TEST_CASE("QBRS fixed points and restrictions") {
  const auto space2 = FiniteSpace::uniform(2);
  const EndowmentProfile como({RandVar{1, 2}, RandVar{10, 20}, RandVar::zeros(2)});
  const auto h = apply(Qbrs{}, como, InfoPartition::trivial(2), space2);
  for (std::size_t i = 0; i < 3; ++i) check_close(h.parts[i], como[i], 1e-12);

  const auto space = FiniteSpace::uniform(4);
  const EndowmentProfile consts({RandVar::constant(4, 2.0), RandVar::constant(4, -1.0),
                                 RandVar::constant(4, 0.5)});
  const auto hc = apply(Qbrs{}, consts, InfoPartition::trivial(4), space);
  for (std::size_t i = 0; i < 3; ++i) check_close(hc.parts[i], consts[i], 1e-12);

  CHECK_THROWS_AS(apply(Qbrs{}, consts, InfoPartition({{0, 1}, {2, 3}}, 4), space), DomainError);
}

TEST_CASE("QBRS is a comonotone full allocation") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    const auto c = random_case(rng, 8, 3, false);
    const auto h = apply(Qbrs{}, c.profile, c.g, c.space);
    check_close(h.total(), c.profile.aggregate(), 1e-9);
    const RandVar s = c.profile.aggregate();
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t w = 0; w < 8; ++w)
        for (std::size_t v = 0; v < 8; ++v)
          if (s[w] < s[v]) CHECK(h.parts[i][w] <= h.parts[i][v] + 1e-12);
  }
}

TEST_CASE("frictional costs") {
  const auto space = FiniteSpace::uniform(4);
  const EndowmentProfile x({RandVar{1, 0, 1, 0}, RandVar{0, 1, 1, 2}, RandVar::zeros(4)});
  const auto g = InfoPartition::trivial(4);
  const auto h = apply(LeftEs{0.5}, x, g, space);
  const auto c = frictional_costs(x, h);
  CHECK(c.global.min() >= 0.0);
  CHECK(c.global.max() > 0.0);
  check_close(c.global, x.aggregate() - h.total(), 0.0);
  REQUIRE(c.pairwise.size() == 3);
  check_close(c.pairwise.at({0, 1}), x[0] + x[1] - h.parts[0] - h.parts[1], 1e-15);

  Allocation over{{x[0] + RandVar::constant(4, 1.0), x[1], x[2]}, InfoPartition::trivial(4)};
  over.parts[0][2] += 1.0;
  try {
    frictional_costs(x, over);
    FAIL("expected an infeasibility error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("worst outcome 2") != std::string::npos);
  }
  // Rounding-level overshoot is clamped to zero cost.
  Allocation tiny{{x[0] + RandVar::constant(4, 1e-12), x[1], x[2]}, InfoPartition::trivial(4)};
  CHECK(frictional_costs(x, tiny).global == RandVar::zeros(4));
}

TEST_CASE("feasibility for every rule and exactness for full allocations") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_case(rng);
    const auto triv = random_case(rng, 8, 3, false);
    const auto gx = augmented_info(c.g, c.profile, c.space);
    std::vector<double> w(8);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& v : w) v = u(rng);
    const std::vector<MechanismSpec> specs{
        Cmrs{}, SubjectiveCmrs{prob::block_tilt(c.space, gx, w)},
        RobustCmrs{{Measure::base(c.space), prob::block_tilt(c.space, gx, w)}}, LeftEs{0.3},
        MeanDeviation{Deviation::CondStdDev, 0.7}, MeanDeviation{Deviation::CondMeanAbsDev, 1.3},
        MeanDeviation{Deviation::CondLowerSemiDev, 0.4}, Proportional{}};
    for (const auto& spec : specs) {
      const auto h = apply(spec, c.profile, c.g, c.space);
      const RandVar s = c.profile.aggregate();
      const RandVar tot = h.total();
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(tot[k] <= s[k] + feasibility_slack(s[k]));
        if (is_full_allocation(spec)) CHECK(std::abs(tot[k] - s[k]) <= 1e-9);
      }
    }
    const auto q = apply(Qbrs{}, triv.profile, triv.g, triv.space);
    check_close(q.total(), triv.profile.aggregate(), 1e-9);
  }
}

TEST_CASE("left ES at level one is CMRS and its cost shrinks as lambda grows") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_case(rng);
    const auto one = apply(LeftEs{1.0}, c.profile, c.g, c.space);
    const auto cm = apply(Cmrs{}, c.profile, c.g, c.space);
    for (std::size_t i = 0; i < 3; ++i) check_close(one.parts[i], cm.parts[i], 1e-12);
    RandVar prev;
    for (int k = 1; k <= 10; ++k) {
      const auto cost =
          frictional_costs(c.profile, apply(LeftEs{k / 10.0}, c.profile, c.g, c.space)).global;
      if (k > 1)
        for (std::size_t w = 0; w < 8; ++w) CHECK(cost[w] <= prev[w] + 1e-9);
      prev = cost;
    }
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(validate(LeftEs{0.0}), DomainError);
  CHECK_THROWS_AS(validate(LeftEs{1.01}), DomainError);
  CHECK_THROWS_AS(validate(MeanDeviation{Deviation::CondStdDev, -1.0}), DomainError);
  CHECK_THROWS_AS(validate(RobustCmrs{}), DomainError);
  CHECK(spec_name(LeftEs{0.9}) == "left_es:0.9");
  CHECK(spec_name(MeanDeviation{Deviation::CondMeanAbsDev, 2}) == "mean_deviation:mad:2");
}
