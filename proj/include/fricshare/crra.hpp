#pragma once

// Monte Carlo solver for the CRRA friction level at which equal sharing of
// the pool stops being individually rational.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

namespace fricshare::crra {

struct Lognormal {
  double mu = 0.0;
  double sigma = 1.0;
};
struct Constant {
  double value = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

using Sampler = std::variant<Lognormal, Constant, Uniform>;

/// "lognormal:MU:SIGMA", "constant:C" or "uniform:LO:HI".
Sampler parse_sampler(const std::string& text);
std::string sampler_name(const Sampler& s);

/// x^(1-gamma)/(1-gamma), or log x at gamma = 1.
double utility(double x, double gamma);

struct McConfig {
  std::size_t samples = 200000;
  std::uint64_t seed = 42;
  /// Batches for the batch-means standard errors.
  std::size_t batches = 40;
};

struct CrraResult {
  double epsilon0 = 0.0;        ///< E[u((1-e) S/n)] = E[u(X_i)]
  double epsilon_merged = 0.0;  ///< E[u(2(1-e) S/n)] = E[u(X_i + X_j)]
  double se_epsilon0 = 0.0;
  double se_merged = 0.0;
  double se_difference = 0.0;
  /// (epsilon0 - epsilon_merged) / se_difference; infinite when both are exact.
  double margin_in_se = 0.0;
};

/// Both sides are estimated on one common sample. Sample k is drawn from an
/// engine keyed by (seed, k / kBlock), so results do not depend on how the
/// blocks are scheduled.
CrraResult crra_epsilon0(const Sampler& sampler, double gamma, std::size_t n, const McConfig& mc);

inline constexpr std::size_t kBlock = 1024;
inline constexpr double kEpsilonTol = 1e-4;

}  // namespace fricshare::crra
