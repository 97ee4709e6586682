#include "pairstab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pairstab/error.hpp"

namespace pairstab {
namespace {

constexpr double kDomainSlack = 1e-12;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

Vec half_difference(const Sample& z, const Sample& zt) { return 0.5 * (z.features - zt.features); }

void check_radius(const Vec& p, double radius, const char* what) {
  const double norm = p.norm();
  require(norm <= radius * (1.0 + kDomainSlack), ErrorCode::domain_violation,
          std::string("||") + what + "|| = " + std::to_string(norm) + " exceeds R_" + what + " = " +
              std::to_string(radius));
}

void check_sample_pair(const LossConstants& c, const Sample& z, const Sample& zt) {
  for (const Sample* s : {&z, &zt}) {
    require(s->features.norm() <= c.R_x * (1.0 + kDomainSlack), ErrorCode::domain_violation,
            "sample features exceed R_x = " + std::to_string(c.R_x));
    require(std::abs(s->label) <= c.R_y * (1.0 + kDomainSlack), ErrorCode::domain_violation,
            "sample label exceeds R_y = " + std::to_string(c.R_y));
  }
}

void check_radii(double R_x, double R_w) {
  require(std::isfinite(R_x) && R_x >= 0.0, ErrorCode::invalid_parameter, "R_x must be finite and >= 0");
  require(std::isfinite(R_w) && R_w >= 0.0, ErrorCode::invalid_parameter, "R_w must be finite and >= 0");
}

}  // namespace

// ---------------------------------------------------------------- pairwise

double PairwiseLoss::value(const Vec& w, const Sample& z, const Sample& zt) const {
  check_domain(w);
  check_samples(z, zt);
  return eval(w, z, zt);
}

Vec PairwiseLoss::gradient(const Vec& w, const Sample& z, const Sample& zt) const {
  check_domain(w);
  check_samples(z, zt);
  return eval_gradient(w, z, zt);
}

void PairwiseLoss::check_domain(const Vec& w) const { check_radius(w, constants_.R_w, "w"); }

void PairwiseLoss::check_samples(const Sample& z, const Sample& zt) const {
  check_sample_pair(constants_, z, zt);
}

PairwiseLogistic::PairwiseLogistic(double R_x, double R_w) : PairwiseLoss({}) {
  check_radii(R_x, R_w);
  constants_.R_x = R_x;
  constants_.R_w = R_w;
  constants_.L = R_x;
  constants_.L_w = R_x;
  constants_.alpha = 0.25 * R_x * R_x;
  constants_.M = softplus(R_x * R_w);
  constants_.convex = true;
  constants_.smooth = true;
}

double PairwiseLogistic::eval(const Vec& w, const Sample& z, const Sample& zt) const {
  const double margin = sign(z.label - zt.label) * w.dot(half_difference(z, zt));
  return softplus(-margin);
}

Vec PairwiseLogistic::eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const {
  const double s = sign(z.label - zt.label);
  const Vec u = half_difference(z, zt);
  return (-s * sigmoid(-s * w.dot(u))) * u;
}

PairwiseHinge::PairwiseHinge(double R_x, double R_w) : PairwiseLoss({}) {
  check_radii(R_x, R_w);
  constants_.R_x = R_x;
  constants_.R_w = R_w;
  constants_.L = R_x;
  constants_.L_w = R_x;
  constants_.M = 1.0 + R_x * R_w;
  constants_.convex = true;
  constants_.smooth = false;
}

double PairwiseHinge::eval(const Vec& w, const Sample& z, const Sample& zt) const {
  const double margin = sign(z.label - zt.label) * w.dot(half_difference(z, zt));
  return std::max(0.0, 1.0 - margin);
}

Vec PairwiseHinge::eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const {
  const double s = sign(z.label - zt.label);
  const Vec u = half_difference(z, zt);
  if (s * w.dot(u) < 1.0) return -s * u;
  return Vec::Zero(w.size());
}

PairwiseSquare::PairwiseSquare(double R_x, double R_w, double R_y) : PairwiseLoss({}) {
  check_radii(R_x, R_w);
  require(std::isfinite(R_y) && R_y >= 0.0, ErrorCode::invalid_parameter, "R_y must be finite and >= 0");
  const double residual_bound = 2.0 * R_x * R_w + 2.0 * R_y;
  constants_.R_x = R_x;
  constants_.R_w = R_w;
  constants_.R_y = R_y;
  constants_.L = 2.0 * R_x * residual_bound;
  constants_.L_w = constants_.L;
  constants_.alpha = 4.0 * R_x * R_x;
  constants_.M = 0.5 * residual_bound * residual_bound;
  constants_.convex = true;
  constants_.smooth = true;
}

double PairwiseSquare::eval(const Vec& w, const Sample& z, const Sample& zt) const {
  const double r = w.dot(z.features - zt.features) - (z.label - zt.label);
  return 0.5 * r * r;
}

Vec PairwiseSquare::eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const {
  const Vec dx = z.features - zt.features;
  return (w.dot(dx) - (z.label - zt.label)) * dx;
}

ConstantLoss::ConstantLoss(double c, double R_x, double R_w) : PairwiseLoss({}), c_(c) {
  check_radii(R_x, R_w);
  require(std::isfinite(c) && c >= 0.0, ErrorCode::invalid_parameter, "constant loss needs c >= 0");
  constants_.R_x = R_x;
  constants_.R_w = R_w;
  constants_.L = 0.0;
  constants_.alpha = 0.0;
  constants_.M = c;
  constants_.convex = true;
  constants_.smooth = true;
}

// ---------------------------------------------------------------- minimax

double MinimaxLoss::value(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  check_domain(w, v);
  check_samples(z, zt);
  return eval(w, v, z, zt);
}

Vec MinimaxLoss::gradient_w(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  check_domain(w, v);
  check_samples(z, zt);
  return eval_gradient_w(w, v, z, zt);
}

Vec MinimaxLoss::gradient_v(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  check_domain(w, v);
  check_samples(z, zt);
  return eval_gradient_v(w, v, z, zt);
}

void MinimaxLoss::check_domain(const Vec& w, const Vec& v) const {
  check_radius(w, constants_.R_w, "w");
  check_radius(v, constants_.R_v, "v");
}

void MinimaxLoss::check_samples(const Sample& z, const Sample& zt) const {
  check_sample_pair(constants_, z, zt);
}

BilinearSaddle::BilinearSaddle(double R_x, double R_w, double R_v, double lambda_w, double lambda_v)
    : MinimaxLoss({}), lambda_w_(lambda_w), lambda_v_(lambda_v) {
  check_radii(R_x, R_w);
  require(std::isfinite(R_v) && R_v >= 0.0, ErrorCode::invalid_parameter, "R_v must be finite and >= 0");
  require(lambda_w >= 0.0 && lambda_v >= 0.0, ErrorCode::invalid_parameter,
          "regularisation weights must be >= 0");
  const double rx2 = R_x * R_x;
  constants_.R_x = R_x;
  constants_.R_w = R_w;
  constants_.R_v = R_v;
  constants_.L_w = rx2 * R_v + lambda_w * R_w;
  constants_.L_v = rx2 * R_w + lambda_v * R_v;
  constants_.L = std::max(constants_.L_w, constants_.L_v);
  constants_.alpha = rx2 + std::max(lambda_w, lambda_v);
  const double upper = rx2 * R_w * R_v + 0.5 * lambda_w * R_w * R_w;
  const double lower = -rx2 * R_w * R_v - 0.5 * lambda_v * R_v * R_v;
  constants_.M = upper - lower;
  constants_.convex = true;
  constants_.smooth = true;
  offset_ = -lower;
}

double BilinearSaddle::eval(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  const Vec u = half_difference(z, zt);
  return w.dot(u) * v.dot(u) + 0.5 * lambda_w_ * w.squaredNorm() - 0.5 * lambda_v_ * v.squaredNorm();
}

Vec BilinearSaddle::eval_gradient_w(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  const Vec u = half_difference(z, zt);
  return v.dot(u) * u + lambda_w_ * w;
}

Vec BilinearSaddle::eval_gradient_v(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const {
  const Vec u = half_difference(z, zt);
  return w.dot(u) * u - lambda_v_ * v;
}

// ---------------------------------------------------------------- objective

double joint_distance(const Params& a, const Params& b) {
  double sq = (a.w - b.w).squaredNorm();
  if (a.has_v() || b.has_v()) sq += (a.v - b.v).squaredNorm();
  return std::sqrt(sq);
}

Objective::Objective(std::shared_ptr<const PairwiseLoss> loss) : pairwise_(std::move(loss)) {
  require(pairwise_ != nullptr, ErrorCode::invalid_parameter, "null loss");
}

Objective::Objective(std::shared_ptr<const MinimaxLoss> loss) : minimax_(std::move(loss)) {
  require(minimax_ != nullptr, ErrorCode::invalid_parameter, "null loss");
}

std::string Objective::name() const { return minimax_ ? minimax_->name() : pairwise_->name(); }

const LossConstants& Objective::constants() const {
  return minimax_ ? minimax_->constants() : pairwise_->constants();
}

double Objective::value(const Params& p, const Sample& z, const Sample& zt) const {
  return minimax_ ? minimax_->value(p.w, p.v, z, zt) : pairwise_->value(p.w, z, zt);
}

double Objective::shifted_value(const Params& p, const Sample& z, const Sample& zt) const {
  return minimax_ ? minimax_->value(p.w, p.v, z, zt) + minimax_->offset() : pairwise_->value(p.w, z, zt);
}

double Objective::gradient_norm(const Params& p, const Sample& z, const Sample& zt) const {
  if (!minimax_) return pairwise_->gradient(p.w, z, zt).norm();
  const double gw = minimax_->gradient_w(p.w, p.v, z, zt).squaredNorm();
  const double gv = minimax_->gradient_v(p.w, p.v, z, zt).squaredNorm();
  return std::sqrt(gw + gv);
}

void Objective::check_domain(const Params& p) const {
  if (minimax_) {
    minimax_->check_domain(p.w, p.v);
  } else {
    pairwise_->check_domain(p.w);
  }
}

// ---------------------------------------------------------------- certification

Vec random_in_ball(Rng& rng, std::size_t d, double radius, bool on_sphere) {
  Vec x(static_cast<Eigen::Index>(d));
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    norm = x.norm();
  } while (norm == 0.0);
  const double r = on_sphere ? radius : radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return x * (r / norm);
}

Certification certify_constants(const Objective& objective, std::size_t d, std::size_t n_probes,
                                std::uint64_t seed) {
  require(n_probes >= 100, ErrorCode::invalid_parameter, "certification needs n_probes >= 100");
  require(d >= 1, ErrorCode::invalid_parameter, "d must be >= 1");
  const LossConstants& c = objective.constants();
  const bool minimax = objective.is_minimax();
  const double label_range = std::isfinite(c.R_y) ? c.R_y : 1.0;
  Rng rng(seed);

  auto draw_sample = [&](bool boundary) {
    Sample z;
    z.features = random_in_ball(rng, d, c.R_x, boundary);
    z.label = label_range * (2.0 * rng.uniform() - 1.0);
    return z;
  };
  auto draw_params = [&](bool boundary) {
    Params p;
    p.w = random_in_ball(rng, d, c.R_w, boundary);
    if (minimax) p.v = random_in_ball(rng, d, c.R_v, boundary);
    return p;
  };
  // Point on the segment between p and q; stays in the (convex) domain.
  auto blend = [](const Params& p, const Params& q, double t) {
    Params r;
    r.w = (1.0 - t) * p.w + t * q.w;
    if (p.has_v()) r.v = (1.0 - t) * p.v + t * q.v;
    return r;
  };
  auto joint_gradient = [&](const Params& p, const Sample& z, const Sample& zt) {
    if (!minimax) return objective.pairwise().gradient(p.w, z, zt);
    Vec g(2 * static_cast<Eigen::Index>(d));
    g << objective.minimax().gradient_w(p.w, p.v, z, zt), objective.minimax().gradient_v(p.w, p.v, z, zt);
    return g;
  };

  Certification cert;
  if (c.smooth) cert.alpha_hat = 0.0;
  double min_shifted = std::numeric_limits<double>::infinity();
  for (std::size_t probe = 0; probe < n_probes; ++probe) {
    const bool boundary = probe % 2 == 0;
    const Sample z = draw_sample(boundary);
    const Sample zt = draw_sample(boundary);
    const Params p = draw_params(boundary);
    const Params q = blend(p, draw_params(false), probe % 4 < 2 ? 1e-3 : 0.5);

    if (minimax) {
      const double gw = objective.minimax().gradient_w(p.w, p.v, z, zt).norm();
      const double gv = objective.minimax().gradient_v(p.w, p.v, z, zt).norm();
      cert.L_hat = std::max({cert.L_hat, gw, gv});
    } else {
      cert.L_hat = std::max(cert.L_hat, objective.pairwise().gradient(p.w, z, zt).norm());
      const double dist = (p.w - q.w).norm();
      if (dist > 0.0) {
        const double quotient =
            std::abs(objective.value(p, z, zt) - objective.value(q, z, zt)) / dist;
        cert.L_hat = std::max(cert.L_hat, quotient);
      }
    }

    if (c.smooth) {
      const double dist = joint_distance(p, q);
      if (dist > 0.0) {
        const double quotient = (joint_gradient(p, z, zt) - joint_gradient(q, z, zt)).norm() / dist;
        cert.alpha_hat = std::max(*cert.alpha_hat, quotient);
      }
    }

    for (const Params* at : {&p, &q}) {
      const double shifted = objective.shifted_value(*at, z, zt);
      cert.M_hat = std::max(cert.M_hat, shifted);
      min_shifted = std::min(min_shifted, shifted);
    }
  }

  auto check = [](double measured, double declared, const char* what) {
    const double tol = 1e-9 * std::max(1.0, std::abs(declared));
    require(measured <= declared + tol, ErrorCode::certification_failure,
            std::string(what) + " measured " + std::to_string(measured) + " exceeds declared " +
                std::to_string(declared));
  };
  check(cert.L_hat, c.L, "Lipschitz constant");
  if (c.smooth && c.alpha) check(*cert.alpha_hat, *c.alpha, "smoothness constant");
  check(cert.M_hat, c.M, "range bound");
  require(min_shifted >= -1e-9 * std::max(1.0, c.M), ErrorCode::certification_failure,
          "loss value below 0 after offset");
  return cert;
}

}  // namespace pairstab
