#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmcforge/frames.hpp"

using namespace cmcforge;

namespace {

Grid clifford_grid(int n) {
  return Grid::make(n, n, 2 * M_PI / n, 2 * M_PI / n, Complex(0, 0), true, true);
}

// closed-form vacuum frame: alpha has constant commuting coefficients, so
// F(z) = exp(x A + y B)
Mat2 vacuum_frame(const ConnectionForm& cf, double x, double y, Complex lam) {
  Mat2 a = cf.A(0, 0, lam), b = cf.B(0, 0, lam);
  return exp_traceless(x * a + y * b);
}

SolutionPtr pendulum_solution(int nx, int ny, int periods = 1) {
  double t = pendulum_period(0.5, 0.0);
  Grid g = Grid::make(nx, ny, periods * t / nx, 1.0 / ny, Complex(0, 0), true, true);
  return one_dimensional(g, 0.5, 0.0);
}

}  // namespace

TEST_CASE("vacuum alpha: constant commuting coefficients, exact values at lambda = 1") {
  SolutionPtr s = vacuum(clifford_grid(16));
  ConnectionForm cf = build_alpha(s);
  Mat2 a = cf.A(3, 5, Complex(1, 0)), b = cf.B(3, 5, Complex(1, 0));
  Mat2 a_expect = mat2(0, Complex(0, 1), Complex(0, 1), 0);
  CHECK((a - a_expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.cwiseAbs().maxCoeff() < 1e-15);
  for (Complex lam : {Complex(0.7, 0.2), Complex(2, -1)}) {
    Mat2 av = cf.A(0, 0, lam), bv = cf.B(0, 0, lam);
    CHECK((av * bv - bv * av).cwiseAbs().maxCoeff() < 1e-15);
  }
  // su(2)-valued on the circle
  for (double th : {0.3, 1.9, 4.0}) {
    Complex lam = std::exp(Complex(0, th));
    CHECK(is_su2_algebra(cf.A(0, 0, lam), 1e-14));
    CHECK(is_su2_algebra(cf.B(0, 0, lam), 1e-14));
  }
  CHECK(cf.flatness_report <= 1e-12);
}

TEST_CASE("flatness residual: 1D solution converges at order >= 3, negative control fails") {
  auto flat = [](int nx) {
    double t = pendulum_period(0.5, 0.0);
    Grid g = Grid::make(nx, 8, t / nx, 0.4, Complex(0, 0), true, true);
    return build_alpha(one_dimensional(g, 0.5, 0.0)).flatness_report;
  };
  double r64 = flat(64), r128 = flat(128);
  CHECK(r128 <= 1e-5);
  CHECK(r64 / r128 >= 8.0);

  // u = 0.1 sin x is not a solution: Maurer-Cartan residual stays >= 1e-3
  Grid g = clifford_grid(64);
  Eigen::ArrayXXcd u(g.nx, g.ny);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) u(i, j) = 0.1 * std::sin(g.x(i));
  ConnectionForm bad = build_alpha(from_samples(g, u));
  CHECK(bad.flatness_report >= 1e-3);
}

TEST_CASE("lambda-coefficients of the Maurer-Cartan residual vanish separately on solutions") {
  SolutionPtr s = pendulum_solution(96, 8);
  auto coeffs = mc_residual_coeffs(build_alpha(s));
  for (const auto& c : coeffs) CHECK(max_abs(c) < 2e-5);

  Grid g = clifford_grid(64);
  Eigen::ArrayXXcd u(g.nx, g.ny);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) u(i, j) = 0.1 * std::sin(g.x(i));
  auto bad = mc_residual_coeffs(build_alpha(from_samples(g, u)));
  double worst = std::max({max_abs(bad[0]), max_abs(bad[1]), max_abs(bad[2])});
  CHECK(worst >= 1e-3);
}

TEST_CASE("vacuum frame matches exp(xA + yB) and the monodromy exp(gamma A)") {
  SolutionPtr s = vacuum(clifford_grid(64));
  ConnectionForm cf = build_alpha(s);
  for (Complex lam : {Complex(1, 0), Complex(0, 1), Complex(0.6, 0.25)}) {
    ExtendedFrame ef = integrate_frame(cf, lam, 16);
    double worst = 0.0;
    for (int i = 0; i < 64; i += 7)
      for (int j = 0; j < 64; j += 7)
        worst = std::max(
            worst,
            (ef.F.at(i, j) - vacuum_frame(cf, cf.grid.x(i), cf.grid.y(j), lam)).cwiseAbs().maxCoeff());
    CAPTURE(lam);
    CHECK(worst <= 1e-9);
    CHECK(ef.has_m1);
    Mat2 m1_expect = exp_traceless(2 * M_PI * cf.A(0, 0, lam));
    CHECK((ef.M1 - m1_expect).cwiseAbs().maxCoeff() <= 1e-9);
  }
  // lambda = 1: M1 = exp(2 pi A) = 1, unitary
  ExtendedFrame e1 = integrate_frame(cf, Complex(1, 0), 16);
  CHECK((e1.M1 - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(is_su2(e1.M1, 1e-9));
  CHECK(e1.unit_drift <= 1e-8);
  CHECK(e1.det_drift <= 1e-10);
}

TEST_CASE("frame determinant and unitarity drift on the 1D solution") {
  SolutionPtr s = pendulum_solution(64, 64);
  ConnectionForm cf = build_alpha(s);
  for (double th : {0.9, 2.3}) {
    ExtendedFrame ef = integrate_frame(cf, std::exp(Complex(0, th)), 2);
    CHECK(ef.det_drift <= 1e-10);
    CHECK(ef.unit_drift <= 1e-8);
  }
  ExtendedFrame off = integrate_frame(cf, Complex(0.4, 0.2), 2);
  CHECK(off.det_drift <= 1e-10);
}

TEST_CASE("path independence defect shrinks at 4th order") {
  auto defect = [](int n) {
    double t = pendulum_period(0.5, 0.0);
    Grid g = Grid::make(n, n, t / n, t / n, Complex(0, 0), true, true);
    SolutionPtr s = one_dimensional(g, 0.5, 0.0);
    return path_independence_defect(build_alpha(s), std::exp(Complex(0, 0.8)), 2);
  };
  double d32 = defect(32), d64 = defect(64);
  CHECK(d64 < 1e-6);
  CHECK(d32 / d64 >= 8.0);
}

TEST_CASE("monodromy conjugation invariance of the labeled eigenvalue") {
  SolutionPtr s = pendulum_solution(64, 16);
  ConnectionForm cf = build_alpha(s);
  ExtendedFrame ef = integrate_frame(cf, Complex(0.37, 0.21), 4);
  REQUIRE(ef.has_m1);
  Complex mu = label_eigenvalue(ef.M1);
  // rebasing conjugates the monodromy by the frame at the new base point
  for (int idx : {5, 23}) {
    Mat2 c = ef.F.at(idx, 3);
    Mat2 m_rebased = c.inverse() * ef.M1 * c;
    CHECK(std::abs(label_eigenvalue(m_rebased) - mu) <= 1e-9 * std::abs(mu));
  }
}

TEST_CASE("sym_bobenko constants") {
  SolutionPtr s = vacuum(clifford_grid(16));
  ConnectionForm cf = build_alpha(s);
  ExtendedFrame f0 = integrate_frame(cf, Complex(1, 0), 2);
  ExtendedFrame f1 = integrate_frame(cf, Complex(-1, 0), 2);
  Immersion imm = sym_bobenko(f0, f1, s);
  CHECK(imm.H == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(imm.Q - Complex(0, -0.5)) < 1e-15);
  CHECK(max_abs(imm.v2 - ScalarField(imm.grid, Eigen::ArrayXXcd::Ones(16, 16))) < 1e-14);
  CHECK(imm.useful_identity_defect() <= 1e-14);

  ExtendedFrame fi = integrate_frame(cf, Complex(0, 1), 2);
  Immersion imm2 = sym_bobenko(f0, fi, s);
  CHECK(imm2.H == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(imm2.useful_identity_defect() <= 1e-14);

  CHECK_THROWS_AS(sym_bobenko(f0, f0, s), Error);
  ExtendedFrame foff = integrate_frame(cf, Complex(0.5, 0), 2);
  CHECK_THROWS_AS(sym_bobenko(f0, foff, s), Error);
}

TEST_CASE("immersion invariants: f f* = 1 and conformality") {
  int n = 96;
  SolutionPtr s = vacuum(clifford_grid(n));
  ConnectionForm cf = build_alpha(s);
  Immersion imm = sym_bobenko(integrate_frame(cf, Complex(1, 0), 4),
                              integrate_frame(cf, Complex(-1, 0), 4), s);
  double unit = 0.0;
  for (int i = 0; i < n; i += 5)
    for (int j = 0; j < n; j += 5) {
      Mat2 f = imm.f.at(i, j);
      unit = std::max(unit, (f * f.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
    }
  CHECK(unit <= 1e-8);

  Mat2Field df = dz(imm.f), dbf = dzbar(imm.f);
  double conf = 0.0, vdef = 0.0;
  for (int i = 0; i < n; i += 3)
    for (int j = 0; j < n; j += 3) {
      conf = std::max(conf, std::abs(pairing(df.at(i, j), df.at(i, j))));
      vdef = std::max(vdef,
                      std::abs(2.0 * pairing(df.at(i, j), dbf.at(i, j)) - imm.v2.at(i, j)));
    }
  CHECK(conf <= 1e-6);
  CHECK(vdef <= 1e-5);  // v^2 = 2 <df', df''>
}

TEST_CASE("Frenet residuals: vacuum small, corrupted normal detected, 1D order >= 3") {
  int n = 64;
  SolutionPtr s = vacuum(clifford_grid(n));
  ConnectionForm cf = build_alpha(s);
  Immersion imm = sym_bobenko(integrate_frame(cf, Complex(1, 0), 4),
                              integrate_frame(cf, Complex(-1, 0), 4), s);
  FrenetReport rep = frenet_residuals(imm);
  CHECK(rep.normal_eq <= 1e-5);
  CHECK(rep.second_eq <= 1e-5);
  CHECK(rep.laplace_eq <= 1e-5);

  Immersion bad = imm;
  for (int k = 0; k < 4; ++k) bad.N.e[static_cast<size_t>(k)] *= 1.01;
  FrenetReport brep = frenet_residuals(bad);
  CHECK(brep.normal_eq >= 9e-3);

  // the pendulum frames carry nontrivial monodromy, so the immersion is not
  // grid-periodic: one-sided stencils on a non-periodic grid
  auto onedim = [](int nx) {
    double t = pendulum_period(0.5, 0.0);
    Grid g = Grid::make(nx, nx, t / nx, t / nx, Complex(0, 0), false, false);
    SolutionPtr sp = one_dimensional(g, 0.5, 0.0);
    ConnectionForm c = build_alpha(sp);
    Immersion im = sym_bobenko(integrate_frame(c, Complex(1, 0), 4),
                               integrate_frame(c, Complex(-1, 0), 4), sp);
    FrenetReport r = frenet_residuals(im);
    return std::max({r.normal_eq, r.second_eq, r.laplace_eq});
  };
  double r48 = onedim(48), r96 = onedim(96);
  CHECK(r48 / r96 >= 8.0);
}

TEST_CASE("mean curvature relation 2 d*omega = H [omega ^ omega]") {
  int n = 64;
  SolutionPtr s = vacuum(clifford_grid(n));
  ConnectionForm cf = build_alpha(s);
  Immersion h0 = sym_bobenko(integrate_frame(cf, Complex(1, 0), 4),
                             integrate_frame(cf, Complex(-1, 0), 4), s);
  CHECK(mean_curvature_relation_check(h0) <= 1e-5);

  // the (1, i) immersion is not 2pi-periodic: non-periodic grid
  Grid gn = Grid::make(n, n, 2 * M_PI / n, 2 * M_PI / n, Complex(0, 0), false, false);
  SolutionPtr sn = vacuum(gn);
  ConnectionForm cfn = build_alpha(sn);
  Immersion h1 = sym_bobenko(integrate_frame(cfn, Complex(1, 0), 4),
                             integrate_frame(cfn, Complex(0, 1), 4), sn);
  CHECK(mean_curvature_relation_check(h1) <= 1e-4);

  // wrong H is detected
  CHECK(mean_curvature_relation_check(h0, h0.H + 0.5) >= 1e-1);
}
