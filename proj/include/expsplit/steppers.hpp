#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "expsplit/backends.hpp"
#include "expsplit/grid.hpp"
#include "expsplit/schemes.hpp"

namespace expsplit {

/// The abstract semilinear system u' = A u + g(t,u) = F(t,u) a stepper
/// integrates: the linear-action engine for A plus evaluators for F and g.
class SplitSystem {
 public:
  virtual ~SplitSystem() = default;
  virtual Field full_rhs(double t, const Field& u) const = 0;   // F
  virtual Field remainder(double t, const Field& u) const = 0;  // g
  /// g(t,u) when F(t,u) is already in hand; same values, fewer transforms.
  virtual Field remainder_given(const Field& full, double t, const Field& u) const {
    (void)full;
    return remainder(t, u);
  }
  virtual const LinearAction& action() const = 0;
  /// Jacobian matvec at the current state (erbe); throws when unavailable.
  virtual std::function<Field(const Field&)> jacobian(double t,
                                                      const Field& u) const;
  virtual bool reaction_time_dependent() const { return false; }
};

/// The accelerated formulation: A from the extraction split behind a chosen
/// backend, g = F - A u so the two sides satisfy the split identity exactly.
class AcceleratedSystem : public SplitSystem {
 public:
  AcceleratedSystem(const Discretization& ops, const SplitConfig& split,
                    std::shared_ptr<const LinearAction> action);

  Field full_rhs(double t, const Field& u) const override;
  Field remainder(double t, const Field& u) const override;
  Field remainder_given(const Field& full, double t, const Field& u) const override;
  const LinearAction& action() const override { return *action_; }
  std::function<Field(const Field&)> jacobian(double t,
                                              const Field& u) const override;
  bool reaction_time_dependent() const override;

  const SplitConfig& split() const { return split_; }

 private:
  const Discretization& ops_;
  SplitConfig split_;
  std::shared_ptr<const LinearAction> action_;
};

/// The original formulation: the full variable-coefficient linear part is A
/// (Krylov actions), the remainder is the reaction alone.
class OriginalSystem : public SplitSystem {
 public:
  OriginalSystem(const Discretization& ops, KrylovOptions opts);

  Field full_rhs(double t, const Field& u) const override;
  Field remainder(double t, const Field& u) const override;
  const LinearAction& action() const override { return *action_; }
  std::function<Field(const Field&)> jacobian(double t,
                                              const Field& u) const override;
  bool reaction_time_dependent() const override;

 private:
  const Discretization& ops_;
  std::shared_ptr<KrylovAction> action_;
};

/// Backend factory for the accelerated split on a discretization.
enum class BackendChoice { Fourier, Kron, Dense, Krylov };
BackendChoice parse_backend(const std::string& name);
const char* backend_name(BackendChoice b);
std::shared_ptr<const LinearAction> make_action(const Discretization& ops,
                                                const SplitConfig& split,
                                                BackendChoice choice,
                                                KrylovOptions opts = {});

/// Verifies the scheme's required capabilities against the system's backend;
/// throws UnsupportedCapability naming both.
void require_capabilities(const SchemeSpec& scheme, const LinearAction& action);

/// One step of the named scheme, following the stage order of its defining
/// formula; no hidden re-evaluations of g.
Field step_once(const SchemeSpec& scheme, const SplitSystem& sys, const Field& u,
                double t, double tau, double erbe_tol = 1e-10);

struct IntegrationPlan {
  SchemeSpec scheme;
  long m = 1;
  double T = 1.0;
  double blowup_threshold = 1e10;
  double erbe_tol = 0.0;  // 0: use tau^{order+1}/100
  bool record_trace = true;

  double tau() const { return T / double(m); }
};

struct IntegrationResult {
  Field u;
  std::vector<double> max_norm;  // per accepted step
  bool blew_up = false;
  long blowup_step = -1;
};

/// m constant steps from t0 = 0; detects blow-up (non-finite or max-norm
/// beyond the threshold) and reports the step index instead of throwing,
/// since divergence is the expected signal in the stability sweeps.
IntegrationResult integrate(const IntegrationPlan& plan, const SplitSystem& sys,
                            const Field& u0);

}  // namespace expsplit
