#include "pairstab/model.hpp"

#include <cmath>
#include <memory>

#include "pairstab/error.hpp"

namespace pairstab {
namespace {

// Guard against rounding the radius a hair below the iterates' reach.
constexpr double kRadiusSlack = 1.0 + 1e-9;

}  // namespace

bool is_minimax_loss(const std::string& name) { return name == "bilinear"; }

bool is_smooth_loss(const std::string& name) {
  return name == "logistic" || name == "square" || name == "constant" || name == "bilinear";
}

Objective build_objective(const LossSpec& spec, double R_x, double R_y, const StepBudget& budget) {
  require(spec.R_w >= 0.0 && spec.R_v >= 0.0, ErrorCode::config_error, "loss radii must be >= 0");
  const double reach = static_cast<double>(budget.T) * budget.eta;

  if (spec.name == "logistic" || spec.name == "hinge") {
    const double R_w = spec.R_w > 0.0 ? spec.R_w : (budget.w1_norm + reach * R_x) * kRadiusSlack;
    if (spec.name == "logistic") return Objective(std::make_shared<PairwiseLogistic>(R_x, R_w));
    return Objective(std::make_shared<PairwiseHinge>(R_x, R_w));
  }
  if (spec.name == "constant") {
    const double R_w = spec.R_w > 0.0 ? spec.R_w : std::max(budget.w1_norm, 1.0);
    return Objective(std::make_shared<ConstantLoss>(spec.constant, R_x, R_w));
  }
  if (spec.name == "square") {
    require(std::isfinite(R_y), ErrorCode::config_error, "square loss needs a finite label bound");
    double R_w = spec.R_w;
    if (R_w == 0.0) {
      // L(R) = 4 R_x^2 R + 4 R_x R_y
      const double shrink = 1.0 - 4.0 * reach * R_x * R_x;
      require(shrink > 0.0, ErrorCode::config_error,
              "square loss: no finite R_w satisfies the step budget (need 4 T eta R_x^2 < 1)");
      R_w = (budget.w1_norm + 4.0 * reach * R_x * R_y) / shrink * kRadiusSlack;
    }
    return Objective(std::make_shared<PairwiseSquare>(R_x, R_w, R_y));
  }
  if (spec.name == "bilinear") {
    double R_w = spec.R_w;
    double R_v = spec.R_v;
    const double a = reach * R_x * R_x;
    if (R_w == 0.0 && R_v == 0.0) {
      // R_w = w1 + a R_v + reach lw R_w,  R_v = v1 + a R_w + reach lv R_v
      const double p = 1.0 - reach * spec.lambda_w;
      const double q = 1.0 - reach * spec.lambda_v;
      const double det = p * q - a * a;
      require(p > 0.0 && q > 0.0 && det > 0.0, ErrorCode::config_error,
              "bilinear loss: no finite radii satisfy the step budget (T eta too large)");
      R_w = (q * budget.w1_norm + a * budget.v1_norm) / det * kRadiusSlack;
      R_v = (p * budget.v1_norm + a * budget.w1_norm) / det * kRadiusSlack;
      require(R_w > 0.0 && R_v > 0.0, ErrorCode::config_error,
              "bilinear loss: automatic radii need a nonzero initial point");
    } else {
      require(R_w > 0.0 && R_v > 0.0, ErrorCode::config_error,
              "bilinear loss: set both R_w and R_v or neither");
    }
    return Objective(std::make_shared<BilinearSaddle>(R_x, R_w, R_v, spec.lambda_w, spec.lambda_v));
  }
  throw Error(ErrorCode::config_error, "unknown loss '" + spec.name + "'");
}

}  // namespace pairstab
