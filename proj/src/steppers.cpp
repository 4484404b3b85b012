#include "expsplit/steppers.hpp"

#include <cmath>

namespace expsplit {

std::function<Field(const Field&)> SplitSystem::jacobian(double, const Field&) const {
  throw std::runtime_error("this system provides no Jacobian action");
}

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

AcceleratedSystem::AcceleratedSystem(const Discretization& ops,
                                     const SplitConfig& split,
                                     std::shared_ptr<const LinearAction> action)
    : ops_(ops), split_(split), action_(std::move(action)) {}

Field AcceleratedSystem::full_rhs(double t, const Field& u) const {
  return ops_.full_rhs(t, u);
}

Field AcceleratedSystem::remainder(double t, const Field& u) const {
  Field f = ops_.full_rhs(t, u);
  f.values() -= action_->apply_operator(u).cvalues();
  return f;
}

Field AcceleratedSystem::remainder_given(const Field& full, double t,
                                         const Field& u) const {
  (void)t;
  Field f = full;
  f.values() -= action_->apply_operator(u).cvalues();
  return f;
}

std::function<Field(const Field&)> AcceleratedSystem::jacobian(
    double t, const Field& u) const {
  // A + dg/du = full linear part + pointwise reaction derivative,
  // independent of the split.
  Field state = u;
  return [this, t, state](const Field& v) {
    return ops_.jacobian_apply(t, state, v);
  };
}

bool AcceleratedSystem::reaction_time_dependent() const {
  return ops_.problem().reaction_time_dependent;
}

OriginalSystem::OriginalSystem(const Discretization& ops, KrylovOptions opts)
    : ops_(ops) {
  action_ = std::make_shared<KrylovAction>(
      [&ops](const Field& v) { return ops.linear_rhs(v); }, opts);
}

Field OriginalSystem::full_rhs(double t, const Field& u) const {
  return ops_.full_rhs(t, u);
}

Field OriginalSystem::remainder(double t, const Field& u) const {
  return ops_.reaction(t, u);
}

std::function<Field(const Field&)> OriginalSystem::jacobian(double t,
                                                            const Field& u) const {
  Field state = u;
  return [this, t, state](const Field& v) {
    return ops_.jacobian_apply(t, state, v);
  };
}

bool OriginalSystem::reaction_time_dependent() const {
  return ops_.problem().reaction_time_dependent;
}

BackendChoice parse_backend(const std::string& name) {
  if (name == "fourier") return BackendChoice::Fourier;
  if (name == "kron") return BackendChoice::Kron;
  if (name == "dense") return BackendChoice::Dense;
  if (name == "krylov") return BackendChoice::Krylov;
  throw std::invalid_argument("unknown backend: " + name);
}

const char* backend_name(BackendChoice b) {
  switch (b) {
    case BackendChoice::Fourier: return "fourier";
    case BackendChoice::Kron: return "kron";
    case BackendChoice::Dense: return "dense";
    case BackendChoice::Krylov: return "krylov";
  }
  return "?";
}

std::shared_ptr<const LinearAction> make_action(const Discretization& ops,
                                                const SplitConfig& split,
                                                BackendChoice choice,
                                                KrylovOptions opts) {
  switch (choice) {
    case BackendChoice::Fourier: {
      auto* sp = dynamic_cast<const SpectralOps*>(&ops);
      if (!sp)
        throw std::invalid_argument("fourier backend requires a periodic grid");
      return std::make_shared<FourierAction>(*sp, split);
    }
    case BackendChoice::Kron: {
      auto* fd = dynamic_cast<const FdOps*>(&ops);
      if (!fd)
        throw std::invalid_argument("kron backend requires a finite-difference grid");
      return std::make_shared<KronAction>(fd->build_kron(split), ops.grid());
    }
    case BackendChoice::Dense: {
      if (auto* sp = dynamic_cast<const SpectralOps*>(&ops)) {
        FourierAction f(*sp, split);
        return std::make_shared<DenseAction>(assemble_dense(
            [&](const Field& v) { return f.apply_operator(v); }, ops.grid().size()));
      }
      auto* fd = dynamic_cast<const FdOps*>(&ops);
      return std::make_shared<DenseAction>(
          assemble_dense(fd->build_kron(split), ops.grid()));
    }
    case BackendChoice::Krylov: {
      // A-action of the split operator, matrix functions by Arnoldi
      std::shared_ptr<const LinearAction> inner;
      if (auto* sp = dynamic_cast<const SpectralOps*>(&ops))
        inner = std::make_shared<FourierAction>(*sp, split);
      else
        inner = std::make_shared<KronAction>(
            dynamic_cast<const FdOps&>(ops).build_kron(split), ops.grid());
      return std::make_shared<KrylovAction>(
          [inner](const Field& v) { return inner->apply_operator(v); }, opts);
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

namespace {

std::vector<ActionKind> required_kinds(const SchemeSpec& scheme) {
  switch (scheme.id) {
    case Scheme::bfe: return {ActionKind::SolveShifted};
    case Scheme::imex2: return {ActionKind::SolveShifted};
    case Scheme::ee: return {ActionKind::Phi1};
    case Scheme::erk2p2: return {ActionKind::Phi1, ActionKind::Phi2};
    case Scheme::erk2p1: return {ActionKind::Phi1};
    case Scheme::l2a:
    case Scheme::l2b:
    case Scheme::le:
    case Scheme::sle:
    case Scheme::sl2: return {ActionKind::Exp};
    case Scheme::erbe: return {};
  }
  return {};
}

Field axpy(const Field& x, double a, const Field& y) {
  Field out = x;
  out.values() += a * y.cvalues();
  return out;
}

}  // namespace

void require_capabilities(const SchemeSpec& scheme, const LinearAction& action) {
  for (ActionKind k : required_kinds(scheme)) {
    if (!action.supports(k))
      throw UnsupportedCapability(
          action.name(), std::string(action_kind_name(k)) + " required by scheme " +
                             scheme.name());
  }
}

Field step_once(const SchemeSpec& scheme, const SplitSystem& sys, const Field& u,
                double t, double tau, double erbe_tol) {
  const LinearAction& A = sys.action();
  switch (scheme.id) {
    case Scheme::ee: {
      // u + tau phi1(tau A) F(t,u)
      Field f = sys.full_rhs(t, u);
      return axpy(u, tau, A.apply(ActionKind::Phi1, tau, f));
    }
    case Scheme::le: {
      // e^{tau A} (u + tau g(t,u))
      Field s = axpy(u, tau, sys.remainder(t, u));
      return A.apply(ActionKind::Exp, tau, s);
    }
    case Scheme::sle: {
      // u + tau e^{tau A} F(t,u)
      Field f = sys.full_rhs(t, u);
      return axpy(u, tau, A.apply(ActionKind::Exp, tau, f));
    }
    case Scheme::l2a: {
      // U = e^{tau/2 A}(u + tau/2 g(t,u));
      // u' = e^{tau A} u + tau e^{tau/2 A} g(t+tau/2, U)
      Field gn = sys.remainder(t, u);
      Field stage = A.apply(ActionKind::Exp, 0.5 * tau, axpy(u, 0.5 * tau, gn));
      Field gU = sys.remainder(t + 0.5 * tau, stage);
      Field out = A.apply(ActionKind::Exp, tau, u);
      out.values() += tau * A.apply(ActionKind::Exp, 0.5 * tau, gU).cvalues();
      return out;
    }
    case Scheme::l2b: {
      // U = e^{tau A}(u + tau g(t,u));
      // u' = e^{tau A}(u + tau/2 g(t,u)) + tau/2 g(t+tau, U)
      Field gn = sys.remainder(t, u);
      Field stage = A.apply(ActionKind::Exp, tau, axpy(u, tau, gn));
      Field out = A.apply(ActionKind::Exp, tau, axpy(u, 0.5 * tau, gn));
      out.values() += 0.5 * tau * sys.remainder(t + tau, stage).cvalues();
      return out;
    }
    case Scheme::sl2: {
      // U = u + alpha tau e^{alpha tau A} F(t,u);
      // u' = u + tau e^{tau/2 A} F(t,u) + tau/(2 alpha) e^{tau A}(g(t+alpha tau,U) - g(t,u))
      const double al = scheme.alpha;
      Field fn = sys.full_rhs(t, u);
      Field gn = sys.remainder_given(fn, t, u);
      Field stage = axpy(u, al * tau, A.apply(ActionKind::Exp, al * tau, fn));
      Field dg = sys.remainder(t + al * tau, stage);
      dg.values() -= gn.cvalues();
      Field out = axpy(u, tau, A.apply(ActionKind::Exp, 0.5 * tau, fn));
      out.values() += tau / (2.0 * al) * A.apply(ActionKind::Exp, tau, dg).cvalues();
      return out;
    }
    case Scheme::erk2p2: {
      // U = u + c2 tau phi1(c2 tau A) F(t,u);
      // u' = u + tau phi1(tau A) F(t,u) + tau/c2 phi2(tau A)(g(t+c2 tau,U) - g(t,u))
      const double c2 = scheme.c2;
      Field fn = sys.full_rhs(t, u);
      Field gn = sys.remainder_given(fn, t, u);
      Field stage = axpy(u, c2 * tau, A.apply(ActionKind::Phi1, c2 * tau, fn));
      Field dg = sys.remainder(t + c2 * tau, stage);
      dg.values() -= gn.cvalues();
      Field out = axpy(u, tau, A.apply(ActionKind::Phi1, tau, fn));
      out.values() += tau / c2 * A.apply(ActionKind::Phi2, tau, dg).cvalues();
      return out;
    }
    case Scheme::erk2p1: {
      // as erk2p2 but with tau/(2 c2) phi1(tau A) in the correction
      const double c2 = scheme.c2;
      Field fn = sys.full_rhs(t, u);
      Field gn = sys.remainder_given(fn, t, u);
      Field stage = axpy(u, c2 * tau, A.apply(ActionKind::Phi1, c2 * tau, fn));
      Field dg = sys.remainder(t + c2 * tau, stage);
      dg.values() -= gn.cvalues();
      Field out = axpy(u, tau, A.apply(ActionKind::Phi1, tau, fn));
      out.values() +=
          tau / (2.0 * c2) * A.apply(ActionKind::Phi1, tau, dg).cvalues();
      return out;
    }
    case Scheme::bfe: {
      // (I - tau A) u' = u + tau g(t,u)
      Field s = axpy(u, tau, sys.remainder(t, u));
      return A.apply(ActionKind::SolveShifted, tau, s, 1.0);
    }
    case Scheme::imex2: {
      // (I - tau/2 A) U = u + tau/2 g(t,u);
      // (I - tau/2 A) u' = u + tau/2 A u + tau g(t+tau/2, U)
      Field s1 = axpy(u, 0.5 * tau, sys.remainder(t, u));
      Field stage = A.apply(ActionKind::SolveShifted, tau, s1, 0.5);
      Field s2 = axpy(u, 0.5 * tau, A.apply_operator(u));
      s2.values() += tau * sys.remainder(t + 0.5 * tau, stage).cvalues();
      return A.apply(ActionKind::SolveShifted, tau, s2, 0.5);
    }
    case Scheme::erbe: {
      // u + tau phi1(tau J) F(u), J = A + dg/du(u); autonomous form only
      if (sys.reaction_time_dependent())
        throw std::invalid_argument(
            "erbe: rejected for time-dependent reactions (autonomous form only)");
      Field f = sys.full_rhs(t, u);
      KrylovOptions opts;
      opts.tol = erbe_tol;
      Field w = krylov_phi_action(sys.jacobian(t, u), ActionKind::Phi1, tau, f, opts);
      return axpy(u, tau, w);
    }
  }
  throw std::logic_error("unreachable");
}

IntegrationResult integrate(const IntegrationPlan& plan, const SplitSystem& sys,
                            const Field& u0) {
  if (plan.m < 1) throw std::invalid_argument("integrate: m must be >= 1");
  if (plan.scheme.id != Scheme::erbe)
    require_capabilities(plan.scheme, sys.action());

  const double tau = plan.tau();
  double erbe_tol = plan.erbe_tol;
  if (erbe_tol <= 0.0)
    erbe_tol = std::pow(tau, plan.scheme.order() + 1) / 100.0;

  IntegrationResult res;
  res.u = u0;
  if (plan.record_trace) res.max_norm.reserve(size_t(plan.m));
  for (long n = 0; n < plan.m; ++n) {
    const double t = double(n) * tau;
    res.u = step_once(plan.scheme, sys, res.u, t, tau, erbe_tol);
    const double mn = res.u.max_abs();
    if (plan.record_trace) res.max_norm.push_back(mn);
    if (!std::isfinite(mn) || mn > plan.blowup_threshold) {
      res.blew_up = true;
      res.blowup_step = n;
      return res;
    }
  }
  return res;
}

}  // namespace expsplit
