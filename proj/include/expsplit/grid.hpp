#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>

namespace expsplit {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::Index;

enum class BoundaryKind {
  Periodic,               // right endpoint excluded
  DirichletNeumannMix3d,  // homogeneous Dirichlet at x=0, Neumann at x=1
};

/// Structured grid in 1..3 dimensions.  Values are stored flattened with
/// x1 fastest: idx = i1 + n1*(i2 + n2*i3).
struct GridSpec {
  int dim = 1;
  std::array<Index, 3> n{0, 0, 0};
  std::array<double, 3> xmin{0, 0, 0};
  std::array<double, 3> xmax{0, 0, 0};
  BoundaryKind bc = BoundaryKind::Periodic;

  Index size() const {
    Index s = 1;
    for (int mu = 0; mu < dim; ++mu) s *= n[mu];
    return s;
  }

  double length(int mu) const { return xmax[mu] - xmin[mu]; }

  double h(int mu) const { return length(mu) / double(n[mu]); }

  /// Node coordinates along direction mu.  Periodic: xmin + i*h, i=0..N-1.
  /// Mixed-BC: i*h for i=1..N (Dirichlet node at 0 eliminated, Neumann
  /// node at 1 kept).
  ArrayXd nodes(int mu) const {
    ArrayXd x(n[mu]);
    const double hh = h(mu);
    if (bc == BoundaryKind::Periodic) {
      for (Index i = 0; i < n[mu]; ++i) x[i] = xmin[mu] + i * hh;
    } else {
      for (Index i = 0; i < n[mu]; ++i) x[i] = xmin[mu] + (i + 1) * hh;
    }
    return x;
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1..3");
    for (int mu = 0; mu < dim; ++mu) {
      if (n[mu] < 4) throw std::invalid_argument("GridSpec: all N_mu must be >= 4");
      if (!(xmax[mu] > xmin[mu]))
        throw std::invalid_argument("GridSpec: empty box");
    }
  }

  static GridSpec periodic(std::initializer_list<Index> ns, double lo, double hi) {
    GridSpec g;
    g.dim = int(ns.size());
    int mu = 0;
    for (Index v : ns) {
      g.n[mu] = v;
      g.xmin[mu] = lo;
      g.xmax[mu] = hi;
      ++mu;
    }
    g.bc = BoundaryKind::Periodic;
    g.validate();
    return g;
  }

  static GridSpec mixed3d(Index nper) {
    GridSpec g;
    g.dim = 3;
    g.n = {nper, nper, nper};
    g.xmin = {0, 0, 0};
    g.xmax = {1, 1, 1};
    g.bc = BoundaryKind::DirichletNeumannMix3d;
    g.validate();
    return g;
  }
};

/// Discrete unknown on a grid, with a lazily cached Fourier image.
/// Single-writer contract: mutate through values() which drops the cache.
class Field {
 public:
  Field() = default;
  explicit Field(ArrayXd v) : v_(std::move(v)) {}
  explicit Field(Index n) : v_(ArrayXd::Zero(n)) {}

  Index size() const { return v_.size(); }

  const ArrayXd& cvalues() const { return v_; }
  ArrayXd& values() {
    hat_valid_ = false;
    return v_;
  }
  void assign(ArrayXd v) {
    v_ = std::move(v);
    hat_valid_ = false;
  }

  bool has_spectrum() const { return hat_valid_; }
  const ArrayXcd& spectrum() const { return hat_; }
  void cache_spectrum(ArrayXcd hat) const {
    hat_ = std::move(hat);
    hat_valid_ = true;
  }

  double max_abs() const { return v_.size() ? v_.abs().maxCoeff() : 0.0; }

 private:
  ArrayXd v_;
  mutable ArrayXcd hat_;
  mutable bool hat_valid_ = false;
};

}  // namespace expsplit
