#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "expsplit/fft.hpp"
#include "expsplit/grid.hpp"
#include "expsplit/operators.hpp"
#include "expsplit/phi.hpp"

namespace expsplit {

enum class ActionKind { Exp, Phi1, Phi2, SolveShifted };

const char* action_kind_name(ActionKind k);

/// Thrown when a backend is asked for a matrix function it does not
/// implement: capabilities never degrade to silent approximation.
struct UnsupportedCapability : std::runtime_error {
  UnsupportedCapability(const std::string& backend, const std::string& what);
};

/// Engine applying matrix functions of tau*A to Fields: e^{tau A},
/// phi_1(tau A), phi_2(tau A) and the shifted solve (I - theta tau A)^{-1}.
/// All applies are pure; caches use interior locking.
class LinearAction {
 public:
  virtual ~LinearAction() = default;

  virtual const char* name() const = 0;
  virtual bool supports(ActionKind kind) const = 0;

  /// Applies the requested function of tau*A; theta only enters the
  /// shifted solve.
  Field apply(ActionKind kind, double tau, const Field& u,
              double theta = 1.0) const {
    return do_apply(kind, tau, u, theta);
  }

  /// Plain action A u (always available).
  virtual Field apply_operator(const Field& u) const = 0;

 protected:
  virtual Field do_apply(ActionKind kind, double tau, const Field& u,
                         double theta) const = 0;
  [[noreturn]] void reject(ActionKind kind) const;
};

/// Pointwise Fourier multipliers phi_k(tau s_k) on a periodic grid.
class FourierAction : public LinearAction {
 public:
  FourierAction(const SpectralOps& ops, const SplitConfig& split);
  /// Arbitrary-symbol variant (tests).
  FourierAction(const Fft& fft, ArrayXcd symbol);

  const char* name() const override { return "fourier"; }
  bool supports(ActionKind) const override { return true; }
  Field apply_operator(const Field& u) const override;

  const ArrayXcd& symbol() const { return symbol_; }

 protected:
  Field do_apply(ActionKind kind, double tau, const Field& u,
                 double theta) const override;

 private:
  const ArrayXcd& multiplier(ActionKind kind, double tau, double theta) const;
  const Fft& fft_;
  ArrayXcd symbol_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<ActionKind, std::uint64_t, std::uint64_t>, ArrayXcd>
      cache_;
};

/// mu-mode (Tucker) application of e^{tau (A_d ⊕ ... ⊕ A_1)} from the
/// one-dimensional factor exponentials, cached per exact tau bit pattern.
/// Deliberately exposes only the exponential.
class KronAction : public LinearAction {
 public:
  KronAction(KroneckerSum kron, const GridSpec& grid);

  const char* name() const override { return "kron"; }
  bool supports(ActionKind kind) const override { return kind == ActionKind::Exp; }
  Field apply_operator(const Field& u) const override;

  const KroneckerSum& kron() const { return kron_; }

 protected:
  Field do_apply(ActionKind kind, double tau, const Field& u,
                 double theta) const override;

 private:
  const std::vector<Eigen::MatrixXd>& factors(double tau) const;
  KroneckerSum kron_;
  GridSpec grid_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::vector<Eigen::MatrixXd>> cache_;
};

/// Dense reference semantics via expm/phim and direct solves; the oracle
/// the fast backends are checked against.  Guarded to <= 4096 unknowns.
class DenseAction : public LinearAction {
 public:
  explicit DenseAction(Eigen::MatrixXd a_full);

  const char* name() const override { return "dense"; }
  bool supports(ActionKind) const override { return true; }
  Field apply_operator(const Field& u) const override;

  const Eigen::MatrixXd& matrix() const { return a_; }

 protected:
  Field do_apply(ActionKind kind, double tau, const Field& u,
                 double theta) const override;

 private:
  Eigen::MatrixXd a_;
};

/// Assembles the dense matrix of a linear map by applying it to unit vectors.
Eigen::MatrixXd assemble_dense(const std::function<Field(const Field&)>& apply,
                               Index n);
/// Dense matrix of a Kronecker sum.
Eigen::MatrixXd assemble_dense(const KroneckerSum& kron, const GridSpec& grid);

struct KrylovOptions {
  double tol = 1e-8;   // residual-estimate target, relative to ||v||
  int m_max = 128;
};

struct KrylovFailure : std::runtime_error {
  double last_estimate;
  KrylovFailure(const std::string& msg, double est)
      : std::runtime_error(msg), last_estimate(est) {}
};

/// Arnoldi approximation of e^{tau A} v or phi_1(tau A) v for a linear map
/// given only through its matvec.  phi_1 goes through the one-column
/// augmented operator [[tau A, v], [0, 0]].  Stops when the standard
/// residual estimate drops below tol * ||v||.
Field krylov_phi_action(const std::function<Field(const Field&)>& matvec,
                        ActionKind kind, double tau, const Field& v,
                        const KrylovOptions& opts);

/// LinearAction wrapper around krylov_phi_action.
class KrylovAction : public LinearAction {
 public:
  KrylovAction(std::function<Field(const Field&)> matvec, KrylovOptions opts);

  const char* name() const override { return "krylov"; }
  bool supports(ActionKind kind) const override {
    return kind == ActionKind::Exp || kind == ActionKind::Phi1;
  }
  Field apply_operator(const Field& u) const override;

  void set_tolerance(double tol) { opts_.tol = tol; }

 protected:
  Field do_apply(ActionKind kind, double tau, const Field& u,
                 double theta) const override;

 private:
  std::function<Field(const Field&)> matvec_;
  KrylovOptions opts_;
};

}  // namespace expsplit
