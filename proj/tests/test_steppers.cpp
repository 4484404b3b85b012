#include <doctest.h>

#include <cmath>
#include <random>

#include "expsplit/bench.hpp"
#include "expsplit/steppers.hpp"

using namespace expsplit;

namespace {

Field random_field(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Field f(n);
  for (Index i = 0; i < n; ++i) f.values()[i] = gauss(rng);
  return f;
}

double rel_inf(const Field& a, const Field& b) {
  return (a.cvalues() - b.cvalues()).abs().maxCoeff() /
         std::max(1e-300, b.cvalues().abs().maxCoeff());
}

// A trivial system with A = 0 and g = 0.
class NullSystem : public SplitSystem {
 public:
  NullSystem(const Fft& fft, Index n)
      : action_(std::make_shared<FourierAction>(fft, ArrayXcd::Zero(n))) {}
  Field full_rhs(double, const Field& u) const override {
    return Field(ArrayXd::Zero(u.size()));
  }
  Field remainder(double, const Field& u) const override {
    return Field(ArrayXd::Zero(u.size()));
  }
  const LinearAction& action() const override { return *action_; }
  std::function<Field(const Field&)> jacobian(double, const Field&) const override {
    return [](const Field& v) { return Field(ArrayXd::Zero(v.size())); };
  }

 private:
  std::shared_ptr<FourierAction> action_;
};

const Scheme kAllSchemes[] = {Scheme::bfe, Scheme::imex2, Scheme::ee,
                              Scheme::erk2p2, Scheme::erk2p1, Scheme::l2a,
                              Scheme::l2b, Scheme::le, Scheme::sle,
                              Scheme::sl2, Scheme::erbe};

}  // namespace

TEST_CASE("every scheme leaves u unchanged when A = 0 and g = 0") {
  GridSpec g = GridSpec::periodic({16}, -M_PI, M_PI);
  Fft fft(g);
  NullSystem sys(fft, 16);
  Field u = random_field(16, 1);
  for (Scheme id : kAllSchemes) {
    CAPTURE(SchemeSpec(id).name());
    Field v = step_once(SchemeSpec(id), sys, u, 0.0, 0.3, 1e-8);
    CHECK((v.cvalues() - u.cvalues()).abs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("dense transcription oracle on a 16-point grid") {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  // variable diffusion with a quadratic reaction, half extraction
  const Preset preset = make_preset("nl1d");
  const GridSpec grid = preset.grid(16);
  SpectralOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.5);
  auto action = std::make_shared<FourierAction>(ops, split);
  AcceleratedSystem sys(ops, split, action);

  const double tau = 0.01, t0 = 0.0, c2 = 1.0, al = 0.327;
  const Field u = ops.sample(preset.problem.u0);
  const VectorXd uv = u.cvalues().matrix();

  const MatrixXd a = assemble_dense(
      [&](const Field& v) { return action->apply_operator(v); }, 16);
  const MatrixXd eye = MatrixXd::Identity(16, 16);
  auto fdense = [&](double t, const VectorXd& w) -> VectorXd {
    return ops.full_rhs(t, Field(w.array())).cvalues().matrix();
  };
  auto gdense = [&](double t, const VectorXd& w) -> VectorXd {
    return fdense(t, w) - a * w;
  };
  const MatrixXd e1 = expm_dense((tau * a).eval());
  const MatrixXd eh = expm_dense((0.5 * tau * a).eval());
  const MatrixXd ea = expm_dense((al * tau * a).eval());
  const MatrixXd p1 = phim_dense(1, (tau * a).eval());
  const MatrixXd p1c = phim_dense(1, (c2 * tau * a).eval());
  const MatrixXd p2 = phim_dense(2, (tau * a).eval());

  auto expect_for = [&](Scheme id) -> VectorXd {
    switch (id) {
      case Scheme::ee:
        return uv + tau * p1 * fdense(t0, uv);
      case Scheme::le:
        return e1 * (uv + tau * gdense(t0, uv));
      case Scheme::sle:
        return uv + tau * e1 * fdense(t0, uv);
      case Scheme::l2a: {
        VectorXd stage = eh * (uv + 0.5 * tau * gdense(t0, uv));
        return e1 * uv + tau * eh * gdense(t0 + 0.5 * tau, stage);
      }
      case Scheme::l2b: {
        VectorXd gn = gdense(t0, uv);
        VectorXd stage = e1 * (uv + tau * gn);
        return e1 * (uv + 0.5 * tau * gn) + 0.5 * tau * gdense(t0 + tau, stage);
      }
      case Scheme::sl2: {
        VectorXd fn = fdense(t0, uv);
        VectorXd stage = uv + al * tau * ea * fn;
        return uv + tau * eh * fn +
               tau / (2.0 * al) * e1 *
                   (gdense(t0 + al * tau, stage) - gdense(t0, uv));
      }
      case Scheme::erk2p2: {
        VectorXd fn = fdense(t0, uv);
        VectorXd stage = uv + c2 * tau * p1c * fn;
        return uv + tau * p1 * fn +
               tau / c2 * p2 * (gdense(t0 + c2 * tau, stage) - gdense(t0, uv));
      }
      case Scheme::erk2p1: {
        VectorXd fn = fdense(t0, uv);
        VectorXd stage = uv + c2 * tau * p1c * fn;
        return uv + tau * p1 * fn +
               tau / (2.0 * c2) * p1 *
                   (gdense(t0 + c2 * tau, stage) - gdense(t0, uv));
      }
      case Scheme::bfe:
        return (eye - tau * a).partialPivLu().solve(
            (uv + tau * gdense(t0, uv)).eval());
      case Scheme::imex2: {
        Eigen::PartialPivLU<MatrixXd> lu(eye - 0.5 * tau * a);
        VectorXd stage = lu.solve((uv + 0.5 * tau * gdense(t0, uv)).eval());
        return lu.solve((uv + 0.5 * tau * a * uv +
                         tau * gdense(t0 + 0.5 * tau, stage))
                            .eval());
      }
      case Scheme::erbe: {
        // phi1 of the dense Jacobian: linear part plus the reaction derivative
        MatrixXd lin = assemble_dense(
            [&](const Field& v) { return ops.linear_rhs(v); }, 16);
        MatrixXd jac = lin;
        for (int i = 0; i < 16; ++i)
          jac(i, i) += 1.0 - 2.0 * uv[i];
        return uv + tau * phim_dense(1, (tau * jac).eval()) * fdense(t0, uv);
      }
    }
    return uv;
  };

  for (Scheme id : kAllSchemes) {
    CAPTURE(SchemeSpec(id).name());
    Field got = step_once(SchemeSpec(id), sys, u, t0, tau, 1e-13);
    VectorXd want = expect_for(id);
    const double scale = want.cwiseAbs().maxCoeff();
    CHECK((got.cvalues().matrix() - want).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("exactness dichotomy on a constant-coefficient linear problem") {
  ProblemDef p;
  p.dim = 1;
  p.a[0] = [](const Coord&) { return 1.0; };
  p.b[0] = [](const Coord&) { return 0.4; };
  p.u0 = [](const Coord& x) { return std::sin(x[0]) + 0.3 * std::cos(2.0 * x[0]); };
  const GridSpec grid = GridSpec::periodic({32}, -M_PI, M_PI);
  SpectralOps ops(p, grid);
  const SplitConfig split = make_split(p, grid, 1.0);
  auto action = std::make_shared<FourierAction>(ops, split);
  AcceleratedSystem sys(ops, split, action);
  const Field u = ops.sample(p.u0);
  const double tau = 0.05;
  const Field target = action->apply(ActionKind::Exp, tau, u);

  SUBCASE("exponential integrators and Lawson schemes hit e^{tau A} u") {
    for (Scheme id : {Scheme::ee, Scheme::le, Scheme::l2a, Scheme::l2b,
                      Scheme::erk2p1, Scheme::erk2p2}) {
      CAPTURE(SchemeSpec(id).name());
      Field got = step_once(SchemeSpec(id), sys, u, 0.0, tau, 1e-13);
      CHECK(rel_inf(got, target) <= 1e-12);
    }
  }
  SUBCASE("stabilized Lawson schemes miss it at their defect order") {
    auto defect = [&](Scheme id, double t) {
      Field got = step_once(SchemeSpec(id), sys, u, 0.0, t, 1e-13);
      Field tgt = action->apply(ActionKind::Exp, t, u);
      return (got.cvalues() - tgt.cvalues()).abs().maxCoeff();
    };
    for (auto [id, order] : {std::pair{Scheme::sle, 2.0}, {Scheme::sl2, 3.0}}) {
      const double d1 = defect(id, tau), d2 = defect(id, tau / 2.0);
      const double measured = std::log2(d1 / d2);
      CAPTURE(SchemeSpec(id).name());
      CHECK(d1 > 1e-9);
      CHECK(measured == doctest::Approx(order).epsilon(0.2 / order));
    }
  }
}

TEST_CASE("heat equation with full extraction is integrated exactly") {
  const Preset preset = make_preset("lin1d");
  ProblemDef p = preset.problem;
  p.a[0] = [](const Coord&) { return 1.0; };
  const GridSpec grid = preset.grid(64);
  SpectralOps ops(p, grid);
  const SplitConfig split = make_split(p, grid, 1.0);
  AcceleratedSystem sys(ops, split, std::make_shared<FourierAction>(ops, split));
  const Field u0 = ops.sample(p.u0);
  for (long m : {1L, 7L, 32L}) {
    IntegrationPlan plan;
    plan.scheme = SchemeSpec(Scheme::ee);
    plan.m = m;
    plan.T = 0.5;
    IntegrationResult r = integrate(plan, sys, u0);
    CHECK(!r.blew_up);
    CHECK((r.u.cvalues() - std::exp(-0.5) * u0.cvalues()).abs().maxCoeff() <=
          1e-12);
    CHECK(r.max_norm.size() == size_t(m));
  }
}

TEST_CASE("integrate with m = 1 reduces to one step") {
  const Preset preset = make_preset("nl1d");
  const GridSpec grid = preset.grid(32);
  SpectralOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.5);
  AcceleratedSystem sys(ops, split, std::make_shared<FourierAction>(ops, split));
  const Field u0 = ops.sample(preset.problem.u0);
  IntegrationPlan plan;
  plan.scheme = SchemeSpec(Scheme::l2b);
  plan.m = 1;
  plan.T = 0.02;
  IntegrationResult r = integrate(plan, sys, u0);
  Field expect = step_once(plan.scheme, sys, u0, 0.0, 0.02, 1e-10);
  CHECK((r.u.cvalues() - expect.cvalues()).abs().maxCoeff() == 0.0);
}

TEST_CASE("one-step determinism") {
  const Preset preset = make_preset("nl1d");
  const GridSpec grid = preset.grid(64);
  SpectralOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.4);
  AcceleratedSystem sys(ops, split, std::make_shared<FourierAction>(ops, split));
  Field u = random_field(64, 77);
  for (Scheme id : {Scheme::sl2, Scheme::erk2p2, Scheme::imex2}) {
    Field a = step_once(SchemeSpec(id), sys, u, 0.0, 0.01, 1e-10);
    Field b = step_once(SchemeSpec(id), sys, u, 0.0, 0.01, 1e-10);
    CHECK((a.cvalues() - b.cvalues()).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("blow-up is reported as an outcome, not an exception") {
  const Preset preset = make_preset("lin1d");
  const GridSpec grid = preset.grid(256);
  SpectralOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.2);
  AcceleratedSystem sys(ops, split, std::make_shared<FourierAction>(ops, split));
  const Field u0 = ops.sample(preset.problem.u0);
  IntegrationPlan plan;
  plan.scheme = SchemeSpec(Scheme::ee);  // far below its stability threshold
  plan.m = 512;
  plan.T = preset.problem.T;
  IntegrationResult r = integrate(plan, sys, u0);
  CHECK(r.blew_up);
  CHECK(r.blowup_step >= 0);
  CHECK(r.blowup_step < 512);
}

TEST_CASE("capability mismatches name the scheme and the backend") {
  const Preset preset = make_preset("adr3d");
  const GridSpec grid = preset.grid(8);
  FdOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.5);
  AcceleratedSystem sys(ops, split,
                        make_action(ops, split, BackendChoice::Kron));
  const Field u0 = ops.sample(preset.problem.u0);
  IntegrationPlan plan;
  plan.scheme = SchemeSpec(Scheme::erk2p1);
  plan.m = 4;
  plan.T = 0.01;
  try {
    integrate(plan, sys, u0);
    FAIL("expected UnsupportedCapability");
  } catch (const UnsupportedCapability& e) {
    const std::string msg = e.what();
    CHECK(msg.find("kron") != std::string::npos);
    CHECK(msg.find("erk2p1") != std::string::npos);
  }
}

TEST_CASE("erbe rejects time-dependent reactions") {
  const Preset preset = make_preset("nl1d");
  ProblemDef p = preset.problem;
  p.r = [](double t, const Coord&, double u) { return (1.0 + t) * u; };
  p.r_du = [](double t, const Coord&, double) { return 1.0 + t; };
  p.reaction_time_dependent = true;
  const GridSpec grid = preset.grid(32);
  SpectralOps ops(p, grid);
  const SplitConfig split = make_split(p, grid, 0.5);
  AcceleratedSystem sys(ops, split, std::make_shared<FourierAction>(ops, split));
  const Field u0 = ops.sample(p.u0);
  CHECK_THROWS_AS(step_once(SchemeSpec(Scheme::erbe), sys, u0, 0.0, 0.01, 1e-8),
                  std::invalid_argument);
}

TEST_CASE("fourier and dense backends integrate to the same answer") {
  const Preset preset = make_preset("nl1d");
  const GridSpec grid = preset.grid(32);
  SpectralOps ops(preset.problem, grid);
  const SplitConfig split = make_split(preset.problem, grid, 0.5);
  AcceleratedSystem fsys(ops, split, make_action(ops, split, BackendChoice::Fourier));
  AcceleratedSystem dsys(ops, split, make_action(ops, split, BackendChoice::Dense));
  const Field u0 = ops.sample(preset.problem.u0);
  for (Scheme id : {Scheme::ee, Scheme::l2a, Scheme::sl2, Scheme::imex2}) {
    IntegrationPlan plan;
    plan.scheme = SchemeSpec(id);
    plan.m = 24;
    plan.T = preset.problem.T;
    IntegrationResult a = integrate(plan, fsys, u0);
    IntegrationResult b = integrate(plan, dsys, u0);
    CAPTURE(SchemeSpec(id).name());
    CHECK(rel_inf(a.u, b.u) <= 1e-9);
  }
}
