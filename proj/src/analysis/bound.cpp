#include "pairstab/analysis/bound.hpp"

#include <cmath>
#include <limits>

#include "pairstab/error.hpp"

namespace pairstab {

unsigned ceil_log2(std::size_t m) {
  require(m >= 1, ErrorCode::invalid_parameter, "ceil_log2 needs m >= 1");
  unsigned k = 0;
  std::size_t p = 1;
  while (p < m) {
    p <<= 1;
    ++k;
  }
  return k;
}

namespace {

void validate(const BoundInputs& in) {
  require(std::isfinite(in.kl) && in.kl >= 0.0, ErrorCode::invalid_parameter, "kl must be finite and >= 0");
  require(in.renyi6.log_value >= 0.0 && !std::isnan(in.renyi6.log_value), ErrorCode::invalid_parameter,
          "renyi6 must be >= 1");
  require(in.n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  require(in.delta > 0.0 && in.delta <= 1.0 / static_cast<double>(in.n) && in.delta < 1.0,
          ErrorCode::invalid_parameter, "delta must lie in (0, 1/n]");
  require(in.delta_prime > 0.0 && in.delta_prime < 1.0, ErrorCode::invalid_parameter,
          "delta' must lie in (0, 1)");
  require(std::isfinite(in.c1) && in.c1 >= 0.0 && std::isfinite(in.c2) && in.c2 >= 0.0,
          ErrorCode::invalid_parameter, "c1 and c2 must be finite and >= 0");
  require(std::isfinite(in.M) && in.M > 0.0, ErrorCode::invalid_parameter, "M must be > 0");
  require(std::isfinite(in.K1) && in.K1 > 0.0, ErrorCode::invalid_parameter, "K1 must be > 0");
}

const double kStabilityConst = 192.0 * std::exp(1.0) * std::sqrt(2.0);

double stability_denominator(const BoundInputs& in) {
  const double level = in.c1 + in.c2 * std::log(1.0 / in.delta);
  return kStabilityConst * level * static_cast<double>(ceil_log2(in.n - 1));
}

double moment_denominator(const BoundInputs& in) { return 16.0 * std::sqrt(in.K1) * in.M; }

}  // namespace

double bound_lambda(const BoundInputs& in) {
  validate(in);
  const double den = stability_denominator(in);
  const double first = den > 0.0 ? 1.0 / den : std::numeric_limits<double>::infinity();
  const double second = std::sqrt(static_cast<double>(in.n - 1)) / moment_denominator(in);
  return std::min(first, second);
}

BoundReport pacbayes_bound(const BoundInputs& in) {
  validate(in);
  BoundReport r;
  r.inputs = in;
  const double den = stability_denominator(in);
  r.lambda_stability = den > 0.0 ? 1.0 / den : std::numeric_limits<double>::infinity();
  r.lambda_moment = std::sqrt(static_cast<double>(in.n - 1)) / moment_denominator(in);
  r.lambda = bound_lambda(in);
  const double numerator = in.kl + std::log(1.0 / in.delta_prime) + 3.0;
  r.main_term = numerator / r.lambda;
  r.residual_term =
      in.M * std::pow(static_cast<double>(in.n), -5.0 / 6.0) * std::exp(in.renyi6.log_value / 6.0);
  r.total = r.main_term + r.residual_term;
  r.max_form = numerator * std::max(den, moment_denominator(in) / std::sqrt(static_cast<double>(in.n - 1)));
  return r;
}

BoundReport pacbayes_bound(double kl, RenyiMoment renyi6, double delta, double delta_prime,
                           const StabilityCoefficients& coeffs, std::size_t n, double M, double K1) {
  return pacbayes_bound(BoundInputs{kl, renyi6, delta, delta_prime, coeffs.c1, coeffs.c2, n, M, K1});
}

void write_bound(Report& report, const BoundReport& b) {
  const auto& in = b.inputs;
  report.set("kl", in.kl);
  report.set("log_renyi6", in.renyi6.log_value);
  report.set("renyi6", in.renyi6.value());
  report.set("renyi6_overflow", in.renyi6.overflow());
  report.set("delta", in.delta);
  report.set("delta_prime", in.delta_prime);
  report.set("c1", in.c1);
  report.set("c2", in.c2);
  report.set("n", static_cast<std::uint64_t>(in.n));
  report.set("M", in.M);
  report.set("K1", in.K1);
  report.set("lambda_stability", b.lambda_stability);
  report.set("lambda_moment", b.lambda_moment);
  report.set("lambda", b.lambda);
  report.set("main_term", b.main_term);
  report.set("residual_term", b.residual_term);
  report.set("total", b.total);
  report.set("max_form", b.max_form);
}

BoundInputs read_bound_inputs(const Report& report) {
  BoundInputs in;
  in.kl = report.get_double("kl");
  in.renyi6.log_value = report.get_double("log_renyi6");
  in.delta = report.get_double("delta");
  in.delta_prime = report.get_double("delta_prime");
  in.c1 = report.get_double("c1");
  in.c2 = report.get_double("c2");
  in.n = report.get_uint("n");
  in.M = report.get_double("M");
  in.K1 = report.get_double("K1");
  return in;
}

}  // namespace pairstab
