#pragma once

#include <array>
#include <functional>
#include <string>

#include "expsplit/grid.hpp"

namespace expsplit {

using Coord = std::array<double, 3>;

enum class DiffusionForm {
  Divergence,  // div(a grad u)
  Laplacian,   // a(x) * lap u
};

/// Continuous problem data: diagonal diffusion tensor, velocity, reaction
/// with its u-derivative, initial condition and final time.
struct ProblemDef {
  int dim = 1;
  DiffusionForm form = DiffusionForm::Divergence;
  std::array<std::function<double(const Coord&)>, 3> a;
  std::array<std::function<double(const Coord&)>, 3> b;  // empty entry = 0
  std::function<double(double, const Coord&, double)> r;     // r(t, x, u)
  std::function<double(double, const Coord&, double)> r_du;  // d r / d u
  bool reaction_time_dependent = false;
  std::function<double(const Coord&)> u0;
  double T = 1.0;
};

/// A named experiment setup: problem, grid factory and defaults.
struct Preset {
  std::string name;
  ProblemDef problem;
  Index default_n = 0;
  double b_value = 0.0;  // advection parameter of adr3d

  GridSpec grid(Index n_per_direction = 0) const;
};

/// Registered presets: lin1d, nl1d, adr2d, adr3d (b in {-0.01, -1} by
/// default -0.01, overridable).
Preset make_preset(const std::string& name, double b = -0.01);

}  // namespace expsplit
