#include <cmath>
#include <stdexcept>

#include "expsplit/problem.hpp"

namespace expsplit {

GridSpec Preset::grid(Index n_per_direction) const {
  const Index n = n_per_direction > 0 ? n_per_direction : default_n;
  if (problem.dim == 3)
    return GridSpec::mixed3d(n);
  if (problem.dim == 2)
    return GridSpec::periodic({n, n}, -3.0 * M_PI, 3.0 * M_PI);
  return GridSpec::periodic({n}, -M_PI, M_PI);
}

Preset make_preset(const std::string& name, double b) {
  Preset p;
  p.name = name;
  ProblemDef& pr = p.problem;
  if (name == "lin1d") {
    pr.dim = 1;
    pr.form = DiffusionForm::Laplacian;
    pr.a[0] = [](const Coord& x) { return 1.0 + 10.0 * std::pow(std::sin(x[0]), 2); };
    pr.u0 = [](const Coord& x) { return std::sin(x[0]); };
    pr.T = 1.0 / 40.0;
    p.default_n = 1 << 12;
  } else if (name == "nl1d") {
    pr.dim = 1;
    pr.form = DiffusionForm::Divergence;
    pr.a[0] = [](const Coord& x) { return 1.0 + 10.0 * std::pow(std::sin(x[0]), 2); };
    pr.r = [](double, const Coord&, double u) { return u * (1.0 - u); };
    pr.r_du = [](double, const Coord&, double u) { return 1.0 - 2.0 * u; };
    pr.u0 = [](const Coord& x) { return std::sin(x[0]); };
    pr.T = 1.0 / 10.0;
    p.default_n = 1 << 10;
  } else if (name == "adr2d") {
    pr.dim = 2;
    pr.form = DiffusionForm::Divergence;
    pr.a[0] = [](const Coord& x) {
      const double s1 = std::sin(x[0]), s2 = std::sin(x[1]);
      return 0.5 + s1 * s1 * s2 * s2 / 6.0;
    };
    pr.a[1] = [](const Coord& x) {
      const double c1 = std::cos(x[0]), c2 = std::cos(x[1]);
      return 0.5 + c1 * c1 * c2 * c2 / 6.0;
    };
    pr.b[0] = [](const Coord& x) { return std::pow(std::sin(x[0]), 2) / 5.0; };
    pr.b[1] = [](const Coord& x) { return std::pow(std::sin(x[1]), 2) / 5.0; };
    pr.r = [](double, const Coord&, double u) { return 0.25 * u * (1.0 - u); };
    pr.r_du = [](double, const Coord&, double u) { return 0.25 * (1.0 - 2.0 * u); };
    pr.u0 = [](const Coord& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); };
    pr.T = 4.0;
    p.default_n = 1 << 8;
  } else if (name == "adr3d") {
    pr.dim = 3;
    pr.form = DiffusionForm::Laplacian;
    auto diff = [](const Coord& x) {
      const double d = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5) +
                       (x[2] - 0.5) * (x[2] - 0.5);
      return 0.1 * std::exp(-d);
    };
    pr.a[0] = pr.a[1] = pr.a[2] = diff;
    for (int mu = 0; mu < 3; ++mu)
      pr.b[mu] = [b](const Coord&) { return b; };
    pr.r = [](double, const Coord&, double u) { return u * (1.0 + u * u); };
    pr.r_du = [](double, const Coord&, double u) { return 1.0 + 3.0 * u * u; };
    pr.u0 = [](const Coord& x) {
      const double c = std::pow(27.0 / 4.0, 3);
      return c * x[0] * x[1] * x[2] * std::pow(1.0 - x[0], 2) *
             std::pow(1.0 - x[1], 2) * std::pow(1.0 - x[2], 2);
    };
    pr.T = 0.25;
    p.default_n = 32;
    p.b_value = b;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return p;
}

}  // namespace expsplit
