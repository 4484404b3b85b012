#pragma once

#include <memory>
#include <vector>

#include "expsplit/fft.hpp"
#include "expsplit/grid.hpp"
#include "expsplit/problem.hpp"

namespace expsplit {

/// Extraction data: the share lambda of the per-direction diffusion maxima
/// and the averaged drift moved into the constant-coefficient operator A.
struct SplitConfig {
  double lambda = 1.0;
  std::array<double, 3> a_max{0, 0, 0};
  std::array<double, 3> beta{0, 0, 0};
};

/// Per-direction maximum of a_{mu mu} over the grid nodes.  Rejects
/// non-positive diffusion.
std::array<double, 3> compute_amax(const ProblemDef& problem, const GridSpec& grid);

/// Domain average of b_mu (+ d a_{mu mu}/d x_mu for divergence-form
/// problems), with the grid's natural quadrature: equal-weight node average
/// on periodic grids, trapezoidal rule on the mixed-BC grid.  The a
/// derivative uses the same differentiation backend as the operator.
std::array<double, 3> compute_beta(const ProblemDef& problem, const GridSpec& grid);

SplitConfig make_split(const ProblemDef& problem, const GridSpec& grid, double lambda);

/// A_d + ... + A_1 acting on the flattened tensor, stored as the list of
/// one-dimensional factor matrices (tridiagonal up to periodic corners).
struct KroneckerSum {
  std::vector<Eigen::MatrixXd> factors;  // ordered mu = 1..d
};

/// Spatial discretization of one problem on one grid: evaluates the full
/// right-hand side F(t,u), its linear (advection-diffusion) part, and the
/// Jacobian action.  Construction samples the coefficient callables once;
/// application is pure and safe to call concurrently on distinct Fields.
class Discretization {
 public:
  virtual ~Discretization() = default;

  const GridSpec& grid() const { return grid_; }
  const ProblemDef& problem() const { return problem_; }

  /// F(t,u) = advection-diffusion terms + r(t,x,u).
  virtual Field full_rhs(double t, const Field& u) const = 0;
  /// The linear advection-diffusion part of F only.
  virtual Field linear_rhs(const Field& u) const = 0;

  Field reaction(double t, const Field& u) const;

  /// (A + dg/du)(u) applied to v, i.e. linear part of F on v plus the
  /// pointwise reaction derivative.  Requires r_du.
  Field jacobian_apply(double t, const Field& u, const Field& v) const;

  Field sample(const std::function<double(const Coord&)>& f) const;

 protected:
  Discretization(const ProblemDef& problem, const GridSpec& grid);
  ProblemDef problem_;
  GridSpec grid_;
  ArrayXd r_du_buffer(double t, const Field& u) const;
  std::vector<Coord> coords_;  // node coordinates, flattened layout
};

class SpectralOps : public Discretization {
 public:
  SpectralOps(const ProblemDef& problem, const GridSpec& grid);

  Field full_rhs(double t, const Field& u) const override;
  Field linear_rhs(const Field& u) const override;

  /// Fourier symbol of A = lambda sum_mu a^max_mu d^2/dx_mu^2 + beta . grad,
  /// in the transform's native mode ordering.
  ArrayXcd fourier_symbol(const SplitConfig& split) const;

  const Fft& fft() const { return fft_; }

  const ArrayXd& wavenumber(int mu) const { return kd_[mu]; }     // Nyquist zeroed
  const ArrayXd& wavenumber_sq(int mu) const { return k2_[mu]; }  // full

 private:
  Field divergence_form_rhs(const Field& u, bool with_advection) const;
  Field laplacian_form_rhs(const Field& u) const;
  Fft fft_;
  std::array<ArrayXd, 3> kd_, k2_;  // expanded to the flattened grid
  std::array<ArrayXd, 3> a_, b_;    // sampled coefficients (size 0 when absent)
};

class FdOps : public Discretization {
 public:
  FdOps(const ProblemDef& problem, const GridSpec& grid);

  Field full_rhs(double t, const Field& u) const override;
  Field linear_rhs(const Field& u) const override;

  /// Second-order centered one-dimensional factor matrices
  /// A_mu = lambda a^max_mu D2 + beta_mu D1 of the Kronecker sum.
  KroneckerSum build_kron(const SplitConfig& split) const;

  /// Stencil applications, exposed for the Kronecker-free operator path.
  ArrayXd d2_apply(const ArrayXd& u, int mu) const;
  ArrayXd d1_apply(const ArrayXd& u, int mu) const;

 private:
  std::array<ArrayXd, 3> a_, b_;
};

/// Dispatch on the grid's boundary kind.
std::unique_ptr<Discretization> make_discretization(const ProblemDef& problem,
                                                    const GridSpec& grid);

/// One-dimensional difference matrices with the grid's closures
/// (periodic wrap, or Dirichlet elimination at x=0 and second-order
/// ghost-node reflection at x=1).
Eigen::MatrixXd fd_second_difference(const GridSpec& grid, int mu);
Eigen::MatrixXd fd_first_difference(const GridSpec& grid, int mu);

KroneckerSum build_fd_kron(const GridSpec& grid, const SplitConfig& split,
                           const std::array<double, 3>& b_const);

/// Spec-level conveniences used by tests and tooling.
Field apply_full_operator(const Discretization& ops, const Field& u, double t);
Field residual_g(const Discretization& ops, const SplitConfig& split,
                 const Field& u, double t);
Field jacobian_matvec(const Discretization& ops, const Field& u, const Field& v,
                      double t);

}  // namespace expsplit
