#pragma once

namespace fricshare::normal {

/// Standard normal density.
double pdf(double x);
/// Standard normal distribution function.
double cdf(double x);
/// Inverse of cdf on (0,1); throws DomainError outside.
double inv_cdf(double p);
/// Left-tail shortfall factor phi(Phi^{-1}(lambda)) / lambda on (0,1]; zero at 1.
double kappa(double lambda);

}  // namespace fricshare::normal
