#include <doctest.h>

#include <cmath>
#include <random>

#include "expsplit/backends.hpp"
#include "expsplit/tensor.hpp"

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

Eigen::MatrixXd random_tridiag(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = -2.0 + 0.3 * gauss(rng);
    if (i > 0) m(i, i - 1) = 1.0 + 0.2 * gauss(rng);
    if (i + 1 < n) m(i, i + 1) = 1.0 + 0.2 * gauss(rng);
  }
  return m;
}

struct HeatSetup {
  GridSpec grid;
  std::unique_ptr<SpectralOps> ops;
  SplitConfig split;

  explicit HeatSetup(Index n, double lambda = 1.0, double drift = 0.0)
      : grid(GridSpec::periodic({n}, -M_PI, M_PI)) {
    ProblemDef p;
    p.dim = 1;
    p.a[0] = [](const Coord&) { return 1.0; };
    if (drift != 0.0)
      p.b[0] = [drift](const Coord&) { return drift; };
    p.u0 = [](const Coord& x) { return std::sin(x[0]); };
    ops = std::make_unique<SpectralOps>(p, grid);
    split = make_split(p, grid, lambda);
  }
};

}  // namespace

TEST_CASE("fourier backend point behavior") {
  HeatSetup hs(32);
  FourierAction fa(*hs.ops, hs.split);

  SUBCASE("zero symbol acts as the identity") {
    FourierAction zero(hs.ops->fft(), ArrayXcd::Zero(32));
    Field u = random_field(32, 3);
    CHECK(rel_inf(zero.apply(ActionKind::Exp, 0.7, u), u) <= 1e-14);
  }
  SUBCASE("heat kernel on a single mode") {
    Field u = hs.ops->sample(hs.ops->problem().u0);
    const double tau = 0.37;
    Field v = fa.apply(ActionKind::Exp, tau, u);
    CHECK((v.cvalues() - std::exp(-tau) * u.cvalues()).abs().maxCoeff() <= 1e-12);
    // phi1 multiplies the mode by (e^{-tau} - 1)/(-tau)
    Field w = fa.apply(ActionKind::Phi1, tau, u);
    const double expect = (std::exp(-tau) - 1.0) / (-tau);
    CHECK((w.cvalues() - expect * u.cvalues()).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("shifted solve inverts the shift") {
    Field u = random_field(32, 4);
    Field s = fa.apply(ActionKind::SolveShifted, 0.2, u, 0.5);
    Field back(s.cvalues() - 0.5 * 0.2 * fa.apply_operator(s).cvalues());
    CHECK(rel_inf(back, u) <= 1e-12);
  }
  SUBCASE("multiplier cache returns identical results") {
    Field u = random_field(32, 5);
    Field a = fa.apply(ActionKind::Exp, 0.11, u);
    Field b = fa.apply(ActionKind::Exp, 0.11, u);
    CHECK((a.cvalues() - b.cvalues()).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mu-mode exponential") {
  SUBCASE("zero factors act as the identity") {
    GridSpec g = GridSpec::mixed3d(4);
    KroneckerSum k;
    for (int mu = 0; mu < 3; ++mu)
      k.factors.push_back(Eigen::MatrixXd::Zero(4, 4));
    KronAction ka(k, g);
    Field u = random_field(g.size(), 6);
    CHECK(rel_inf(ka.apply(ActionKind::Exp, 0.5, u), u) <= 1e-14);
  }
  SUBCASE("one dimension degenerates to a dense product") {
    GridSpec g = GridSpec::periodic({8}, 0.0, 1.0);
    g.dim = 1;
    KroneckerSum k;
    k.factors.push_back(random_tridiag(8, 7));
    KronAction ka(k, g);
    Field u = random_field(8, 8);
    Eigen::VectorXd expect =
        expm_dense((0.3 * k.factors[0]).eval()) * u.cvalues().matrix();
    CHECK((ka.apply(ActionKind::Exp, 0.3, u).cvalues() - expect.array())
              .abs()
              .maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());
  }
  SUBCASE("3d random tridiagonal factors against the assembled dense sum") {
    GridSpec g = GridSpec::mixed3d(4);
    KroneckerSum k;
    for (int mu = 0; mu < 3; ++mu) k.factors.push_back(random_tridiag(4, 10 + mu));
    KronAction ka(k, g);
    DenseAction da(assemble_dense(k, g));
    Field u = random_field(g.size(), 11);
    const double tau = 0.21;
    Field a = ka.apply(ActionKind::Exp, tau, u);
    Field b = da.apply(ActionKind::Exp, tau, u);
    CHECK(rel_inf(a, b) <= 1e-12);
  }
  SUBCASE("the Kronecker backend refuses phi functions") {
    GridSpec g = GridSpec::mixed3d(4);
    KroneckerSum k;
    for (int mu = 0; mu < 3; ++mu) k.factors.push_back(random_tridiag(4, 20 + mu));
    KronAction ka(k, g);
    Field u = random_field(g.size(), 12);
    CHECK(!ka.supports(ActionKind::Phi1));
    CHECK_THROWS_AS(ka.apply(ActionKind::Phi1, 0.1, u), UnsupportedCapability);
    CHECK_THROWS_AS(ka.apply(ActionKind::SolveShifted, 0.1, u, 1.0),
                    UnsupportedCapability);
  }
  SUBCASE("factor cache is keyed by the exact tau") {
    GridSpec g = GridSpec::mixed3d(4);
    KroneckerSum k;
    for (int mu = 0; mu < 3; ++mu) k.factors.push_back(random_tridiag(4, 30 + mu));
    KronAction ka(k, g);
    Field u = random_field(g.size(), 13);
    Field a = ka.apply(ActionKind::Exp, 0.25, u);
    Field b = ka.apply(ActionKind::Exp, 0.25, u);
    CHECK((a.cvalues() - b.cvalues()).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dense backend") {
  SUBCASE("identity at tau = 0") {
    DenseAction da(random_tridiag(6, 40));
    Field u = random_field(6, 41);
    CHECK(rel_inf(da.apply(ActionKind::Exp, 0.0, u), u) <= 1e-14);
  }
  SUBCASE("agrees with the fourier backend on a periodic grid") {
    HeatSetup hs(32, 0.8, 0.25);
    FourierAction fa(*hs.ops, hs.split);
    DenseAction da(assemble_dense(
        [&](const Field& v) { return fa.apply_operator(v); }, 32));
    Field u = random_field(32, 42);
    for (ActionKind kind : {ActionKind::Exp, ActionKind::Phi1, ActionKind::Phi2,
                            ActionKind::SolveShifted}) {
      Field a = fa.apply(kind, 0.05, u, 0.5);
      Field b = da.apply(kind, 0.05, u, 0.5);
      CAPTURE(action_kind_name(kind));
      CHECK(rel_inf(a, b) <= 1e-11);
    }
  }
  SUBCASE("size guard") {
    CHECK_THROWS_AS(DenseAction(Eigen::MatrixXd::Zero(4097, 4097)),
                    std::invalid_argument);
  }
}

TEST_CASE("krylov phi action") {
  // 1D FD Laplacian with Dirichlet ends, symmetric negative definite
  const Index n = 64;
  const double h = 1.0 / double(n + 1);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    lap(i, i) = -2.0 / (h * h);
    if (i > 0) lap(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < n) lap(i, i + 1) = 1.0 / (h * h);
  }
  DenseAction oracle(lap);
  auto matvec = [&](const Field& v) { return oracle.apply_operator(v); };
  Field v = random_field(n, 50);
  const double tau = 1e-3;

  SUBCASE("matches the dense oracle within ten times the tolerance") {
    for (double tol : {1e-6, 1e-10}) {
      for (ActionKind kind : {ActionKind::Exp, ActionKind::Phi1}) {
        KrylovOptions opts;
        opts.tol = tol;
        Field got = krylov_phi_action(matvec, kind, tau, v, opts);
        Field want = oracle.apply(kind, tau, v);
        CAPTURE(tol);
        CAPTURE(action_kind_name(kind));
        CHECK((got.cvalues() - want.cvalues()).matrix().norm() <=
              10.0 * tol * v.cvalues().matrix().norm());
      }
    }
  }
  SUBCASE("zero input short-circuits") {
    Field z(n);
    Field got = krylov_phi_action(matvec, ActionKind::Exp, tau, z, {});
    CHECK(got.cvalues().abs().maxCoeff() == 0.0);
  }
  SUBCASE("the zero map returns the input at the first iteration") {
    auto zero_mv = [&](const Field& x) { return Field(ArrayXd::Zero(x.size())); };
    Field got = krylov_phi_action(zero_mv, ActionKind::Exp, tau, v, {});
    CHECK(rel_inf(got, v) <= 1e-14);
  }
  SUBCASE("non-convergence raises a diagnostic error") {
    // a skew-symmetric operator needs a Krylov dimension of roughly tau*||A||
    Eigen::MatrixXd rot = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
      rot(i, i + 1) = 40.0;
      rot(i + 1, i) = -40.0;
    }
    auto rot_mv = [&](const Field& x) {
      return Field((rot * x.cvalues().matrix()).array());
    };
    KrylovOptions opts;
    opts.tol = 1e-12;
    opts.m_max = 6;
    Field w = random_field(n, 51);
    CHECK_THROWS_AS(krylov_phi_action(rot_mv, ActionKind::Exp, 1.0, w, opts),
                    KrylovFailure);
  }
  SUBCASE("phi2 is not offered") {
    KrylovAction ka(matvec, {});
    CHECK(!ka.supports(ActionKind::Phi2));
    CHECK_THROWS_AS(ka.apply(ActionKind::Phi2, tau, v), UnsupportedCapability);
  }
}

TEST_CASE("identity at small tau: exp(tau A) u = u + tau A u + O(tau^2)") {
  HeatSetup hs(64, 0.9, 0.1);
  FourierAction fa(*hs.ops, hs.split);
  Field u = random_field(64, 60);
  auto defect = [&](double tau) {
    Field e = fa.apply(ActionKind::Exp, tau, u);
    ArrayXd lin = u.cvalues() + tau * fa.apply_operator(u).cvalues();
    return (e.cvalues() - lin).abs().maxCoeff();
  };
  const double d4 = defect(1e-4), d5 = defect(1e-5);
  CHECK(d4 / d5 > 50.0);
  CHECK(d4 / d5 < 200.0);
}

TEST_CASE("real in, real out across backends") {
  HeatSetup hs(48, 0.7, 0.3);
  FourierAction fa(*hs.ops, hs.split);
  Field u = random_field(48, 61);
  Field e = fa.apply(ActionKind::Exp, 0.2, u);
  // output held as a real field whose cached spectrum is conjugate-symmetric
  ArrayXcd roundtrip = hs.ops->fft().inverse(e.spectrum());
  CHECK(roundtrip.imag().abs().maxCoeff() <=
        1e-12 * std::max(1.0, roundtrip.real().abs().maxCoeff()));
}

TEST_CASE("forward and inverse transforms compose to the identity") {
  GridSpec g = GridSpec::periodic({20, 12}, -1.0, 1.0);
  Fft fft(g);
  Field u = random_field(g.size(), 62);
  ArrayXd back = fft.inverse_real(fft.forward(u.cvalues()));
  CHECK((back - u.cvalues()).abs().maxCoeff() <= 1e-13);
  // linearity
  Field v = random_field(g.size(), 63);
  ArrayXcd lhs = fft.forward((2.0 * u.cvalues() + 3.0 * v.cvalues()).eval());
  ArrayXcd rhs = 2.0 * fft.forward(u.cvalues()) + 3.0 * fft.forward(v.cvalues());
  CHECK((lhs - rhs).abs().maxCoeff() <= 1e-10);
}
