#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "pairstab/data.hpp"

namespace pairstab {

/// Regularity constants, computed analytically from the domain radii at
/// construction. Every stability formula consumes these.
struct LossConstants {
  double L = 0.0;                  // Lipschitz constant (per block for minimax losses)
  std::optional<double> alpha;     // smoothness constant, absent for non-smooth losses
  double M = 0.0;                  // width of the value range
  bool convex = true;              // convex (pairwise) or convex-concave (minimax)
  bool smooth = false;
  double R_x = 0.0;                // feature radius the constants are certified for
  double R_w = 0.0;                // parameter radius for w
  double R_v = 0.0;                // parameter radius for v (minimax only)
  double R_y = std::numeric_limits<double>::infinity();  // label bound, where the loss needs one
  double L_w = 0.0;                // block-wise gradient bounds used by step budgets
  double L_v = 0.0;
};

/// l : W x Z x Z -> [0, M].
class PairwiseLoss {
 public:
  virtual ~PairwiseLoss() = default;

  virtual std::string name() const = 0;

  // Both throw domain-violation when ||w|| > R_w or a sample leaves the
  // certified feature/label range.
  double value(const Vec& w, const Sample& z, const Sample& zt) const;
  Vec gradient(const Vec& w, const Sample& z, const Sample& zt) const;

  const LossConstants& constants() const { return constants_; }
  void check_domain(const Vec& w) const;

 protected:
  explicit PairwiseLoss(LossConstants constants) : constants_(constants) {}

  virtual double eval(const Vec& w, const Sample& z, const Sample& zt) const = 0;
  virtual Vec eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const = 0;

  void check_samples(const Sample& z, const Sample& zt) const;

  LossConstants constants_;
};

/// l(w, v; z, z~) for SGDA, convex in w and concave in v.
class MinimaxLoss {
 public:
  virtual ~MinimaxLoss() = default;

  virtual std::string name() const = 0;

  double value(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const;
  Vec gradient_w(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const;
  Vec gradient_v(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const;

  // value + offset() lies in [0, M].
  virtual double offset() const = 0;

  const LossConstants& constants() const { return constants_; }
  void check_domain(const Vec& w, const Vec& v) const;

 protected:
  explicit MinimaxLoss(LossConstants constants) : constants_(constants) {}

  virtual double eval(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const = 0;
  virtual Vec eval_gradient_w(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const = 0;
  virtual Vec eval_gradient_v(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const = 0;

  void check_samples(const Sample& z, const Sample& zt) const;

  LossConstants constants_;
};

/// softplus(-m) with margin m = sign(y - y~) <w, (x - x~)/2>.
/// L = R_x, alpha = R_x^2 / 4, M = softplus(R_x R_w).
class PairwiseLogistic final : public PairwiseLoss {
 public:
  PairwiseLogistic(double R_x, double R_w);
  std::string name() const override { return "logistic"; }

 private:
  double eval(const Vec& w, const Sample& z, const Sample& zt) const override;
  Vec eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const override;
};

/// max(0, 1 - m) on the same margin as PairwiseLogistic. The subgradient at
/// the kink m = 1 is taken to be 0. L = R_x, M = 1 + R_x R_w.
class PairwiseHinge final : public PairwiseLoss {
 public:
  PairwiseHinge(double R_x, double R_w);
  std::string name() const override { return "hinge"; }

 private:
  double eval(const Vec& w, const Sample& z, const Sample& zt) const override;
  Vec eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const override;
};

/// 1/2 (<w, x - x~> - (y - y~))^2 on the raw differences; bounded on the
/// domain through the label bound R_y.
class PairwiseSquare final : public PairwiseLoss {
 public:
  PairwiseSquare(double R_x, double R_w, double R_y);
  std::string name() const override { return "square"; }

 private:
  double eval(const Vec& w, const Sample& z, const Sample& zt) const override;
  Vec eval_gradient(const Vec& w, const Sample& z, const Sample& zt) const override;
};

class ConstantLoss final : public PairwiseLoss {
 public:
  ConstantLoss(double c, double R_x, double R_w);
  std::string name() const override { return "constant"; }

 private:
  double eval(const Vec&, const Sample&, const Sample&) const override { return c_; }
  Vec eval_gradient(const Vec& w, const Sample&, const Sample&) const override {
    return Vec::Zero(w.size());
  }
  double c_;
};

/// <w, u><v, u> + lambda_w/2 |w|^2 - lambda_v/2 |v|^2 with u = (x - x~)/2.
/// The saddle point of both the empirical and the population objective is
/// (0, 0).
class BilinearSaddle final : public MinimaxLoss {
 public:
  BilinearSaddle(double R_x, double R_w, double R_v, double lambda_w, double lambda_v);
  std::string name() const override { return "bilinear"; }
  double offset() const override { return offset_; }

 private:
  double eval(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const override;
  Vec eval_gradient_w(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const override;
  Vec eval_gradient_v(const Vec& w, const Vec& v, const Sample& z, const Sample& zt) const override;

  double lambda_w_;
  double lambda_v_;
  double offset_;
};

/// Model parameters: w alone for pairwise losses, (w, v) for minimax ones.
struct Params {
  Vec w;
  Vec v;  // empty for pairwise models

  bool has_v() const { return v.size() > 0; }
};

// Euclidean distance over the concatenation (w, v).
double joint_distance(const Params& a, const Params& b);

/// Uniform front for pairwise and minimax losses, used by the optimisers and
/// the analysis layer.
class Objective {
 public:
  explicit Objective(std::shared_ptr<const PairwiseLoss> loss);
  explicit Objective(std::shared_ptr<const MinimaxLoss> loss);

  bool is_minimax() const { return minimax_ != nullptr; }
  std::string name() const;
  const LossConstants& constants() const;

  double value(const Params& p, const Sample& z, const Sample& zt) const;
  // Value moved into [0, M]; equals value() for pairwise losses.
  double shifted_value(const Params& p, const Sample& z, const Sample& zt) const;
  // Euclidean norm of the (joint) gradient.
  double gradient_norm(const Params& p, const Sample& z, const Sample& zt) const;
  void check_domain(const Params& p) const;

  const PairwiseLoss& pairwise() const { return *pairwise_; }
  const MinimaxLoss& minimax() const { return *minimax_; }

 private:
  std::shared_ptr<const PairwiseLoss> pairwise_;
  std::shared_ptr<const MinimaxLoss> minimax_;
};

struct Certification {
  double L_hat = 0.0;
  std::optional<double> alpha_hat;  // only measured for smooth losses
  double M_hat = 0.0;
};

/// Monte Carlo check that the declared constants dominate measurements at
/// random domain points (w and features drawn in their balls, half of them on
/// the boundary sphere). Throws certification-failure when a measurement
/// exceeds its declared constant by more than 1e-9 (relative to max(1, c)).
Certification certify_constants(const Objective& objective, std::size_t d, std::size_t n_probes,
                                std::uint64_t seed);

// Uniform point in the radius-r ball (on the sphere when `on_sphere`).
Vec random_in_ball(Rng& rng, std::size_t d, double radius, bool on_sphere = false);

}  // namespace pairstab
