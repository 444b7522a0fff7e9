#include "fricshare/crra.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "fricshare/error.hpp"

namespace fricshare::crra {

namespace {

std::vector<double> parse_fields(const std::string& text, std::string& head) {
  std::stringstream ss(text);
  std::string part;
  std::getline(ss, head, ':');
  std::vector<double> out;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw DomainError("sampler parameter is not a number: " + part);
    }
  }
  return out;
}

struct Draw {
  std::mt19937_64& rng;
  double operator()(const Lognormal& d) const {
    return std::exp(d.mu + d.sigma * std::normal_distribution<double>(0.0, 1.0)(rng));
  }
  double operator()(const Constant& d) const { return d.value; }
  double operator()(const Uniform& d) const {
    return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
  }
};

void check_positive(const Sampler& s) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          if (!(d.value > 0.0)) throw DomainError("constant sampler must be positive");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!(d.lo > 0.0 && d.hi > d.lo))
            throw DomainError("uniform sampler needs 0 < lo < hi");
        } else {
          if (!(d.sigma >= 0.0) || !std::isfinite(d.mu))
            throw DomainError("lognormal sampler needs finite mu and sigma >= 0");
        }
      },
      s);
}

/// Sample-major matrix: row k holds the n endowments of sample k.
std::vector<double> simulate(const Sampler& sampler, std::size_t n, const McConfig& mc) {
  std::vector<double> xs(mc.samples * n);
  const std::size_t blocks = (mc.samples + kBlock - 1) / kBlock;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(mc.seed), static_cast<std::uint32_t>(mc.seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t end = std::min(mc.samples, (b + 1) * kBlock);
    for (std::size_t k = b * kBlock; k < end; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const double v = std::visit(Draw{rng}, sampler);
        if (!(v > 0.0) || !std::isfinite(v))
          throw DomainError("sampler produced a nonpositive or non-finite endowment");
        xs[k * n + i] = v;
      }
  }
  return xs;
}

/// Solves mean u(scale (1 - e) S/n) = target for e in [0,1) by bisection;
/// the left side decreases in e.
double solve(const std::vector<double>& means, double scale, double target, double gamma) {
  auto side = [&](double e) {
    double acc = 0.0;
    for (double m : means) acc += utility(scale * (1.0 - e) * m, gamma);
    return acc / static_cast<double>(means.size());
  };
  const double at_zero = side(0.0);
  if (!std::isfinite(at_zero) || !std::isfinite(target))
    throw DomainError("utility estimate is not finite");
  if (at_zero <= target + 1e-12 * std::max(1.0, std::abs(target))) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kEpsilonTol) {
    const double mid = 0.5 * (lo + hi);
    if (side(mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Estimate {
  double eps0;
  double merged;
};

Estimate estimate(const std::vector<double>& xs, std::size_t n, std::size_t begin,
                  std::size_t end, double gamma) {
  std::vector<double> means;
  means.reserve(end - begin);
  double single = 0.0;
  double pair = 0.0;
  std::size_t pair_count = 0;
  for (std::size_t k = begin; k < end; ++k) {
    const double* row = &xs[k * n];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += row[i];
      single += utility(row[i], gamma);
      for (std::size_t j = i + 1; j < n; ++j) {
        pair += utility(row[i] + row[j], gamma);
        ++pair_count;
      }
    }
    means.push_back(s / static_cast<double>(n));
  }
  const double rows = static_cast<double>(end - begin);
  return {solve(means, 1.0, single / (rows * static_cast<double>(n)), gamma),
          solve(means, 2.0, pair / static_cast<double>(pair_count), gamma)};
}

double batch_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

Sampler parse_sampler(const std::string& text) {
  std::string head;
  const auto p = parse_fields(text, head);
  Sampler s;
  if (head == "lognormal" && p.size() == 2) {
    s = Lognormal{p[0], p[1]};
  } else if (head == "constant" && p.size() == 1) {
    s = Constant{p[0]};
  } else if (head == "uniform" && p.size() == 2) {
    s = Uniform{p[0], p[1]};
  } else {
    throw DomainError("unknown sampler '" + text +
                      "' (expected lognormal:MU:SIGMA, constant:C or uniform:LO:HI)");
  }
  check_positive(s);
  return s;
}

std::string sampler_name(const Sampler& s) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          os << "lognormal:" << d.mu << ':' << d.sigma;
        } else if constexpr (std::is_same_v<T, Constant>) {
          os << "constant:" << d.value;
        } else {
          os << "uniform:" << d.lo << ':' << d.hi;
        }
      },
      s);
  return os.str();
}

double utility(double x, double gamma) {
  if (!(x > 0.0)) return gamma >= 1.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  if (gamma == 1.0) return std::log(x);
  return std::pow(x, 1.0 - gamma) / (1.0 - gamma);
}

CrraResult crra_epsilon0(const Sampler& sampler, double gamma, std::size_t n, const McConfig& mc) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (n < 3) throw DomainError("need at least three agents");
  if (mc.samples < 2) throw DomainError("need at least two samples");
  check_positive(sampler);
  const auto xs = simulate(sampler, n, mc);

  CrraResult r;
  const Estimate full = estimate(xs, n, 0, mc.samples, gamma);
  r.epsilon0 = full.eps0;
  r.epsilon_merged = full.merged;

  const std::size_t batches = std::min(mc.batches, mc.samples);
  std::vector<double> e0;
  std::vector<double> em;
  std::vector<double> diff;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = b * mc.samples / batches;
    const std::size_t end = (b + 1) * mc.samples / batches;
    const Estimate est = estimate(xs, n, begin, end, gamma);
    e0.push_back(est.eps0);
    em.push_back(est.merged);
    diff.push_back(est.eps0 - est.merged);
  }
  r.se_epsilon0 = batch_se(e0);
  r.se_merged = batch_se(em);
  r.se_difference = batch_se(diff);
  const double gap = r.epsilon0 - r.epsilon_merged;
  r.margin_in_se = r.se_difference > 0.0 ? gap / r.se_difference
                   : gap > 0.0            ? std::numeric_limits<double>::infinity()
                                          : 0.0;
  return r;
}

}  // namespace fricshare::crra
