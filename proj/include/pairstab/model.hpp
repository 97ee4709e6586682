#pragma once

#include <cstddef>
#include <string>

#include "pairstab/losses.hpp"

namespace pairstab {

/// Loss selection as it appears in a config. A radius of 0 means "smallest
/// radius the step budget allows" (see build_objective).
struct LossSpec {
  std::string name = "logistic";  // logistic | hinge | square | constant | bilinear
  double R_w = 0.0;
  double R_v = 0.0;
  double lambda_w = 0.1;
  double lambda_v = 0.1;
  double constant = 1.0;
};

/// Inputs the radius solver needs: the run's budget T * eta and the norms
/// of the initial points.
struct StepBudget {
  std::size_t T = 1;
  double eta = 0.0;
  double w1_norm = 0.0;
  double v1_norm = 0.0;
};

// Builds the objective for features bounded by R_x and labels by R_y. Auto
// radii solve ||w1|| + T eta L_w(R) <= R_w (and the v analogue) with equality;
// throws config-error when no finite radius exists (square loss with
// 4 T eta R_x^2 >= 1, or a bilinear system without a positive solution).
Objective build_objective(const LossSpec& spec, double R_x, double R_y, const StepBudget& budget);

bool is_minimax_loss(const std::string& name);
bool is_smooth_loss(const std::string& name);

}  // namespace pairstab
