#include "expsplit/backends.hpp"

#include <cmath>
#include <cstring>

#include "expsplit/tensor.hpp"

namespace expsplit {

namespace {

std::uint64_t bits_of(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

}  // namespace

const char* action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Exp: return "exp";
    case ActionKind::Phi1: return "phi1";
    case ActionKind::Phi2: return "phi2";
    case ActionKind::SolveShifted: return "shifted_solve";
  }
  return "?";
}

UnsupportedCapability::UnsupportedCapability(const std::string& backend,
                                             const std::string& what)
    : std::runtime_error("backend '" + backend + "' does not support " + what) {}

void LinearAction::reject(ActionKind kind) const {
  throw UnsupportedCapability(name(), action_kind_name(kind));
}

// ---------------------------------------------------------------------------
// Fourier
// ---------------------------------------------------------------------------

FourierAction::FourierAction(const SpectralOps& ops, const SplitConfig& split)
    : fft_(ops.fft()), symbol_(ops.fourier_symbol(split)) {}

FourierAction::FourierAction(const Fft& fft, ArrayXcd symbol)
    : fft_(fft), symbol_(std::move(symbol)) {
  if (symbol_.size() != fft_.size())
    throw std::invalid_argument("FourierAction: symbol/grid size mismatch");
}

const ArrayXcd& FourierAction::multiplier(ActionKind kind, double tau,
                                          double theta) const {
  const auto key = std::make_tuple(kind, bits_of(tau), bits_of(theta));
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ArrayXcd m(symbol_.size());
  for (Index i = 0; i < m.size(); ++i) {
    const std::complex<double> z = tau * symbol_[i];
    switch (kind) {
      case ActionKind::Exp: m[i] = std::exp(z); break;
      case ActionKind::Phi1: m[i] = phi(1, z); break;
      case ActionKind::Phi2: m[i] = phi(2, z); break;
      case ActionKind::SolveShifted: {
        const std::complex<double> den = 1.0 - theta * z;
        if (den == 0.0)
          throw std::runtime_error("fourier solve: singular mode 1 - theta tau s = 0");
        m[i] = 1.0 / den;
        break;
      }
    }
  }
  return cache_.emplace(key, std::move(m)).first->second;
}

Field FourierAction::do_apply(ActionKind kind, double tau, const Field& u,
                              double theta) const {
  if (u.size() != fft_.size())
    throw std::invalid_argument("fourier apply: field size mismatch");
  const ArrayXcd& m = multiplier(kind, tau, theta);
  ArrayXcd hat = m * fft_.spectrum(u);
  Field out(fft_.inverse_real(hat));
  out.cache_spectrum(std::move(hat));
  return out;
}

Field FourierAction::apply_operator(const Field& u) const {
  ArrayXcd hat = symbol_ * fft_.spectrum(u);
  Field out(fft_.inverse_real(hat));
  out.cache_spectrum(std::move(hat));
  return out;
}

// ---------------------------------------------------------------------------
// Kronecker / mu-mode
// ---------------------------------------------------------------------------

KronAction::KronAction(KroneckerSum kron, const GridSpec& grid)
    : kron_(std::move(kron)), grid_(grid) {
  if (int(kron_.factors.size()) != grid_.dim)
    throw std::invalid_argument("KronAction: one factor per dimension required");
  for (int mu = 0; mu < grid_.dim; ++mu)
    if (kron_.factors[mu].rows() != grid_.n[mu])
      throw std::invalid_argument("KronAction: factor size mismatch");
}

const std::vector<Eigen::MatrixXd>& KronAction::factors(double tau) const {
  const std::uint64_t key = bits_of(tau);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  std::vector<Eigen::MatrixXd> e;
  e.reserve(kron_.factors.size());
  DensePhiWorkspace<double> ws;
  for (const auto& a : kron_.factors) e.push_back(expm_dense(tau * a, &ws));
  return cache_.emplace(key, std::move(e)).first->second;
}

Field KronAction::do_apply(ActionKind kind, double tau, const Field& u,
                           double) const {
  if (kind != ActionKind::Exp) reject(kind);
  if (u.size() != grid_.size())
    throw std::invalid_argument("kron apply: field size mismatch");
  const auto& e = factors(tau);
  ArrayXd v = u.cvalues();
  for (int mu = 0; mu < grid_.dim; ++mu) v = mode_product(v, e[mu], grid_, mu);
  return Field(std::move(v));
}

Field KronAction::apply_operator(const Field& u) const {
  ArrayXd out = ArrayXd::Zero(u.size());
  for (int mu = 0; mu < grid_.dim; ++mu)
    out += mode_product(u.cvalues(), kron_.factors[mu], grid_, mu);
  return Field(std::move(out));
}

// ---------------------------------------------------------------------------
// Dense oracle
// ---------------------------------------------------------------------------

DenseAction::DenseAction(Eigen::MatrixXd a_full) : a_(std::move(a_full)) {
  if (a_.rows() != a_.cols())
    throw std::invalid_argument("DenseAction: matrix must be square");
  if (a_.rows() > 4096)
    throw std::invalid_argument("DenseAction: refusing more than 4096 unknowns");
}

Field DenseAction::do_apply(ActionKind kind, double tau, const Field& u,
                            double theta) const {
  if (u.size() != a_.rows())
    throw std::invalid_argument("dense apply: field size mismatch");
  const Eigen::VectorXd v = u.cvalues().matrix();
  Eigen::VectorXd out;
  switch (kind) {
    case ActionKind::Exp:
      out = expm_dense(tau * a_) * v;
      break;
    case ActionKind::Phi1:
      out = phim_dense(1, tau * a_) * v;
      break;
    case ActionKind::Phi2:
      out = phim_dense(2, tau * a_) * v;
      break;
    case ActionKind::SolveShifted: {
      Eigen::MatrixXd m =
          Eigen::MatrixXd::Identity(a_.rows(), a_.cols()) - theta * tau * a_;
      out = m.partialPivLu().solve(v);
      break;
    }
  }
  return Field(out.array());
}

Field DenseAction::apply_operator(const Field& u) const {
  return Field((a_ * u.cvalues().matrix()).array());
}

Eigen::MatrixXd assemble_dense(const std::function<Field(const Field&)>& apply,
                               Index n) {
  if (n > 4096)
    throw std::invalid_argument("assemble_dense: refusing more than 4096 unknowns");
  Eigen::MatrixXd a(n, n);
  Field e(n);
  for (Index j = 0; j < n; ++j) {
    e.values().setZero();
    e.values()[j] = 1.0;
    a.col(j) = apply(e).cvalues().matrix();
  }
  return a;
}

Eigen::MatrixXd assemble_dense(const KroneckerSum& kron, const GridSpec& grid) {
  const Index n = grid.size();
  return assemble_dense(
      [&](const Field& v) {
        ArrayXd out = ArrayXd::Zero(n);
        for (int mu = 0; mu < grid.dim; ++mu)
          out += mode_product(v.cvalues(), kron.factors[mu], grid, mu);
        return Field(std::move(out));
      },
      n);
}

// ---------------------------------------------------------------------------
// Arnoldi-Krylov
// ---------------------------------------------------------------------------

Field krylov_phi_action(const std::function<Field(const Field&)>& matvec,
                        ActionKind kind, double tau, const Field& v,
                        const KrylovOptions& opts) {
  if (kind != ActionKind::Exp && kind != ActionKind::Phi1)
    throw UnsupportedCapability("krylov", action_kind_name(kind));
  const Index n = v.size();
  const double vnorm = std::sqrt(v.cvalues().square().sum());
  if (vnorm == 0.0) return Field(n);  // short-circuit on zero input

  // phi1 routes through the augmented operator [[tau A, v], [0, 0]] started
  // from the unit vector in the appended coordinate.
  const bool augmented = (kind == ActionKind::Phi1);
  const Index dim = augmented ? n + 1 : n;

  auto op = [&](const Eigen::VectorXd& x) {
    Field xf(n);
    xf.values() = x.head(n).array();
    Field ax = matvec(xf);
    Eigen::VectorXd out(dim);
    out.head(n) = tau * ax.cvalues().matrix();
    if (augmented) {
      out.head(n) += x[n] * v.cvalues().matrix();
      out[n] = 0.0;
    }
    return out;
  };

  Eigen::VectorXd w0(dim);
  if (augmented) {
    w0.setZero();
    w0[n] = 1.0;
  } else {
    w0.head(n) = v.cvalues().matrix();
  }
  const double beta = w0.norm();
  const double target = opts.tol * vnorm;

  const int m_max = opts.m_max;
  Eigen::MatrixXd basis(dim, m_max + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m_max + 1, m_max);
  basis.col(0) = w0 / beta;

  DensePhiWorkspace<double> ws;
  Eigen::MatrixXd eh;
  double est = std::numeric_limits<double>::infinity();
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXd w = op(basis.col(j));
    for (int i = 0; i <= j; ++i) {
      h(i, j) = basis.col(i).dot(w);
      w -= h(i, j) * basis.col(i);
    }
    for (int i = 0; i <= j; ++i) {  // one reorthogonalization pass
      const double c = basis.col(i).dot(w);
      h(i, j) += c;
      w -= c * basis.col(i);
    }
    const double hnext = w.norm();
    h(j + 1, j) = hnext;
    m = j + 1;
    eh = expm_dense(h.topLeftCorner(m, m), &ws);
    est = beta * hnext * std::abs(eh(m - 1, 0));
    if (est <= target || hnext < 1e-14) break;
    basis.col(j + 1) = w / hnext;
    if (j + 1 == m_max) {
      throw KrylovFailure(
          "krylov_phi_action: no convergence within m_max=" +
              std::to_string(m_max) + " (residual estimate " +
              std::to_string(est) + ")",
          est);
    }
  }

  Eigen::VectorXd y = beta * (basis.leftCols(m) * eh.col(0));
  Field out(n);
  out.values() = y.head(n).array();
  return out;
}

KrylovAction::KrylovAction(std::function<Field(const Field&)> matvec,
                           KrylovOptions opts)
    : matvec_(std::move(matvec)), opts_(opts) {}

Field KrylovAction::do_apply(ActionKind kind, double tau, const Field& u,
                             double) const {
  if (!supports(kind)) reject(kind);
  return krylov_phi_action(matvec_, kind, tau, u, opts_);
}

Field KrylovAction::apply_operator(const Field& u) const { return matvec_(u); }

}  // namespace expsplit
