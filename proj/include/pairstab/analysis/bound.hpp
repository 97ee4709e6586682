#pragma once

#include <cstddef>

#include "pairstab/analysis/stability.hpp"
#include "pairstab/report.hpp"
#include "pairstab/sampling.hpp"

namespace pairstab {

struct BoundInputs {
  double kl = 0.0;
  RenyiMoment renyi6;  // E_P[(Q/P)^6], stored as its log
  double delta = 0.0;
  double delta_prime = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t n = 2;
  double M = 1.0;
  double K1 = 1.0;
};

/// E_Q[G] <= main_term + residual_term, with
///   lambda   = min{ 1 / (192 e sqrt2 (c1 + c2 log(1/delta)) ceil(log2(n-1))),
///                   sqrt(n-1) / (16 sqrt(K1) M) }
///   main     = (KL + log(1/delta') + 3) / lambda
///   residual = M n^{-5/6} renyi6^{1/6}
/// max_form evaluates main through max{...} of the reciprocal branches; it
/// agrees with main up to rounding.
struct BoundReport {
  BoundInputs inputs;
  double lambda_stability = 0.0;  // first branch (+inf when its denominator is 0)
  double lambda_moment = 0.0;     // second branch
  double lambda = 0.0;
  double main_term = 0.0;
  double residual_term = 0.0;
  double total = 0.0;
  double max_form = 0.0;
};

// ceil(log2(m)) for m >= 1, exact on powers of two.
unsigned ceil_log2(std::size_t m);

double bound_lambda(const BoundInputs& in);
BoundReport pacbayes_bound(const BoundInputs& in);
BoundReport pacbayes_bound(double kl, RenyiMoment renyi6, double delta, double delta_prime,
                           const StabilityCoefficients& coeffs, std::size_t n, double M, double K1);

// Writes / reads the inputs and terms as report header keys (shortest
// round-trip decimals, so recomputation from a parsed report is bit-exact).
void write_bound(Report& report, const BoundReport& bound);
BoundInputs read_bound_inputs(const Report& report);

}  // namespace pairstab
