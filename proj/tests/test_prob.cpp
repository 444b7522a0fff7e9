#include <doctest.h>

#include <random>

#include "fricshare/error.hpp"
#include "fricshare/prob.hpp"
#include "oracles.hpp"

using namespace fricshare;
using namespace fricshare::prob;

namespace {

using Blocks = std::vector<std::vector<std::size_t>>;

InfoPartition random_partition(std::mt19937_64& rng, std::size_t m, std::size_t labels) {
  std::uniform_int_distribution<std::size_t> pick(0, labels - 1);
  std::vector<std::size_t> lab(m);
  for (auto& l : lab) l = pick(rng);
  return InfoPartition::from_labels(lab);
}

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> p(m);
  double t = 0.0;
  for (auto& v : p) t += (v = u(rng));
  for (auto& v : p) v /= t;
  return p;
}

}  // namespace

TEST_CASE("sigma_of groups values by gap linkage") {
  CHECK(sigma_of(RandVar{1, 1, 2, 2}).blocks() == Blocks{{0, 1}, {2, 3}});
  CHECK(sigma_of(RandVar{3, 3, 3}).blocks() == Blocks{{0, 1, 2}});
  CHECK(sigma_of(RandVar{1.0, 1.0 + 5e-10, 2.0, 3.0}, 1e-9).blocks() == Blocks{{0, 1}, {2}, {3}});
  // Chains link values further apart than tol.
  CHECK(sigma_of(RandVar{0.0, 0.6, 1.2, 5.0}, 0.7).blocks() == Blocks{{0, 1, 2}, {3}});
}

TEST_CASE("join is the common refinement") {
  const InfoPartition a({{0, 1}, {2, 3}}, 4);
  const InfoPartition b({{0, 2}, {1, 3}}, 4);
  CHECK(join(a, b) == InfoPartition::discrete(4));
  CHECK(join(a, InfoPartition::trivial(4)) == a);
  const InfoPartition c({{0, 1, 2}, {3}}, 4);
  const InfoPartition d({{0}, {1, 2, 3}}, 4);
  CHECK(join(c, d).blocks() == Blocks{{0}, {1, 2}, {3}});
  CHECK_THROWS_AS(join(a, InfoPartition::trivial(5)), DomainError);
}

TEST_CASE("partitions are validated and canonical") {
  CHECK_THROWS_AS(InfoPartition({{0, 1}, {1, 2}}, 3), DomainError);
  CHECK_THROWS_AS(InfoPartition({{0, 1}}, 3), DomainError);
  CHECK_THROWS_AS(InfoPartition({{0}, {}, {1}}, 2), DomainError);
  CHECK(InfoPartition({{3, 1}, {2, 0}}, 4).blocks() == Blocks{{0, 2}, {1, 3}});
}

TEST_CASE("finite space and measure preconditions") {
  CHECK_THROWS_AS(FiniteSpace({0.5, 0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(FiniteSpace({0.5, 0.6}), DomainError);
  CHECK_NOTHROW(FiniteSpace({0.25, 0.25, 0.5}));
  CHECK_THROWS_AS(Measure({0.5, -0.1, 0.6}), DomainError);
  CHECK_THROWS_AS(RandVar({1.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(EndowmentProfile({RandVar{1, 2}, RandVar{1, 2}}), DomainError);
  CHECK_THROWS_AS(EndowmentProfile({RandVar{1, 2}, RandVar{1, 2}, RandVar{1}}), DomainError);
}

TEST_CASE("cond_expect examples") {
  const auto uni = FiniteSpace::uniform(4);
  const InfoPartition halves({{0, 1}, {2, 3}}, 4);
  CHECK(cond_expect(RandVar{1, 0, 1, 0}, halves, uni) == RandVar{0.5, 0.5, 0.5, 0.5});
  const RandVar x{3, -1, 2.5, 7};
  CHECK(cond_expect(x, InfoPartition::discrete(4), uni) == x);
  const FiniteSpace p({0.1, 0.2, 0.3, 0.4});
  const RandVar e = cond_expect(RandVar{1, 2, 3, 4}, InfoPartition::trivial(4), p);
  for (std::size_t w = 0; w < 4; ++w) CHECK(e[w] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("cond_expect rejects zero-mass blocks and names them") {
  const Measure q({0.5, 0.5, 0.0, 0.0});
  const InfoPartition halves({{0, 1}, {2, 3}}, 4);
  try {
    cond_expect(RandVar{1, 2, 3, 4}, halves, q);
    FAIL("expected a zero-mass error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("block 1") != std::string::npos);
  }
}

TEST_CASE("is_measurable and verify_measure examples") {
  const InfoPartition halves({{0, 1}, {2, 3}}, 4);
  CHECK(is_measurable(RandVar{1, 1, 2, 2}, halves));
  CHECK_FALSE(is_measurable(RandVar{1, 2, 2, 2}, halves));
  CHECK(is_measurable(RandVar{1.0, 1.0 + 1e-10, 2, 2}, halves, 1e-9));
  const auto uni = FiniteSpace::uniform(4);
  CHECK(verify_measure(Measure::base(uni), halves, uni, 1e-12));
  CHECK(verify_measure(Measure({0.3, 0.2, 0.25, 0.25}), halves, uni, 1e-12));
  CHECK_FALSE(verify_measure(Measure({0.6, 0.1, 0.15, 0.15}), halves, uni, 1e-12));
}

TEST_CASE("block_tilt keeps block masses") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 8;
    const FiniteSpace space(random_probs(rng, m));
    const auto part = random_partition(rng, m, 3);
    std::vector<double> weights(m);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (auto& w : weights) w = u(rng);
    const Measure q = block_tilt(space, part, weights);
    CHECK(verify_measure(q, part, space, 1e-12));
  }
}

TEST_CASE("conditional expectation is linear, idempotent and satisfies the tower rule") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 10;
    const FiniteSpace space(random_probs(rng, m));
    const Measure q(random_probs(rng, m));
    const auto fine = random_partition(rng, m, 5);
    // Coarsen by merging block labels pairwise.
    std::vector<std::size_t> coarse_lab(m);
    for (std::size_t w = 0; w < m; ++w) coarse_lab[w] = fine.block_of(w) / 2;
    const auto coarse = InfoPartition::from_labels(coarse_lab);
    REQUIRE(fine.refines(coarse));

    std::vector<double> xv(m), yv(m);
    for (std::size_t w = 0; w < m; ++w) {
      xv[w] = val(rng);
      yv[w] = val(rng);
    }
    const RandVar x(xv), y(yv);
    const double a = val(rng);
    const RandVar lhs = cond_expect(a * x + y, fine, q);
    const RandVar rhs = a * cond_expect(x, fine, q) + cond_expect(y, fine, q);
    const RandVar once = cond_expect(x, coarse, q);
    const RandVar twice = cond_expect(once, coarse, q);
    const RandVar tower = cond_expect(cond_expect(x, fine, q), coarse, q);
    for (std::size_t w = 0; w < m; ++w) {
      CHECK(std::abs(lhs[w] - rhs[w]) <= 1e-12 * (1.0 + std::abs(lhs[w])));
      CHECK(std::abs(twice[w] - once[w]) <= 1e-12);
      CHECK(std::abs(tower[w] - once[w]) <= 1e-12);
    }
  }
}

TEST_CASE("join laws on canonical forms") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 9;
    const auto a = random_partition(rng, m, 3);
    const auto b = random_partition(rng, m, 4);
    const auto c = random_partition(rng, m, 2);
    CHECK(join(a, b) == join(b, a));
    CHECK(join(join(a, b), c) == join(a, join(b, c)));
    CHECK(join(a, a) == a);
  }
}

TEST_CASE("verify_measure on the trivial partition accepts every normalized measure") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const FiniteSpace space(random_probs(rng, 6));
    CHECK(verify_measure(Measure(random_probs(rng, 6)), InfoPartition::trivial(6), space, 1e-12));
  }
}

TEST_CASE("augmented information joins g with sigma of the aggregate") {
  const auto space = FiniteSpace::uniform(4);
  const EndowmentProfile x({RandVar{1, 0, 1, 0}, RandVar{0, 1, 1, 2}, RandVar{0, 0, 0, 0}});
  CHECK(augmented_info(InfoPartition::trivial(4), x, space).blocks() == Blocks{{0, 1}, {2, 3}});
  CHECK(augmented_info(InfoPartition({{0, 2}, {1, 3}}, 4), x, space) == InfoPartition::discrete(4));
}

TEST_CASE("conditional expectation matches per-block brute force on 16-outcome spaces") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(-100.0, 100.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 16;
    const auto probs = random_probs(rng, m);
    const FiniteSpace space(probs);
    const auto part = random_partition(rng, m, 1 + t % 6);
    std::vector<double> x(m);
    for (auto& v : x) v = val(rng);
    std::vector<std::size_t> label(m);
    for (std::size_t w = 0; w < m; ++w) label[w] = part.block_of(w);
    const auto expect = oracle::block_average(x, label, probs);
    const RandVar got = cond_expect(RandVar(x), part, space);
    for (std::size_t w = 0; w < m; ++w) CHECK(std::abs(got[w] - expect[w]) <= 1e-12);
  }
}
