#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmcforge/spectral.hpp"

using namespace cmcforge;

namespace {

SolutionPtr pendulum(int nx, int ny, double ly = 1.0) {
  double t = pendulum_period(0.5, 0.0);
  Grid g = Grid::make(nx, ny, t / nx, ly / ny, Complex(0, 0), true, true);
  return one_dimensional(g, 0.5, 0.0);
}

Grid small_grid() { return Grid::make(16, 16, 0.3, 0.3, Complex(0, 0), true, true); }

Mat2 g2_seed() {
  return mat2(Complex(0.25, 0.1), Complex(0.4, 0.0), Complex(-0.15, 0.05), Complex(-0.25, -0.1));
}

}  // namespace

TEST_CASE("potentials satisfy the Lambda_g invariants") {
  CHECK(in_lambda_g(potential_g1(Complex(-0.5, 0)), 1));
  CHECK(in_lambda_g(vacuum_potential_g1(), 1));
  CHECK(in_lambda_g(potential_g2(g2_seed()), 2));
  LoopMatrix bad = potential_g1(Complex(-0.5, 0));
  bad.coeff(-1) = 2.0 * upsilon();
  CHECK_FALSE(in_lambda_g(bad, 1));
}

TEST_CASE("vacuum-matched potential: Lax flow is isospectral and equals conjugation") {
  Grid g = Grid::make(64, 64, 2 * M_PI / 64, 2 * M_PI / 64, Complex(0, 0), true, true);
  SolutionPtr s = vacuum(g);
  ConnectionForm cf = build_alpha(s);
  PolynomialKillingField pkf = integrate_killing(vacuum_potential_g1(), cf, 2);
  CHECK(pkf.det_spread <= 1e-9);
  CHECK(pkf.reality_drift <= 1e-9);
  CHECK(pkf.trace_drift <= 1e-12);

  double route = conjugation_route_defect(
      pkf, cf, {Complex(0.7, 0.2), Complex(-0.3, 0.9), Complex(2, 0.5), Complex(0.5, -0.1)});
  CHECK(route <= 1e-6);

  LoopMatrix junk = potential_g1(Complex(-0.5, 0));
  junk.coeff(0) = mat2(0.3, 0, 0, -0.3);  // breaks reality
  CHECK_THROWS_AS(integrate_killing(junk, cf, 2), Error);
}

TEST_CASE("Lax flow is linear in the initial loop") {
  Grid g = Grid::make(32, 32, 2 * M_PI / 32, 2 * M_PI / 32, Complex(0, 0), true, true);
  SolutionPtr s = vacuum(g);
  ConnectionForm cf = build_alpha(s);
  LoopMatrix xi0 = vacuum_potential_g1();
  PolynomialKillingField a = integrate_killing(xi0, cf, 2);
  PolynomialKillingField b = integrate_killing(Complex(2, 0) * xi0, cf, 2, false);
  double worst = 0.0;
  for (int i = 0; i < g.nx; i += 5)
    for (int j = 0; j < g.ny; j += 5)
      for (int k = -1; k <= 1; ++k)
        worst = std::max(worst, (b.at(i, j).coeff(k) - 2.0 * a.at(i, j).coeff(k))
                                    .cwiseAbs()
                                    .maxCoeff());
  CHECK(worst <= 1e-10);
}

TEST_CASE("pendulum-matched potential from the monodromy") {
  SolutionPtr s = pendulum(96, 16, 0.5);
  FittedPotential fp = fit_potential_from_monodromy(s, 8);
  CHECK(fp.genus == 1);
  CHECK(fp.fit_residual <= 1e-6);
  CHECK(fp.reality_defect <= 1e-6);
  // the branch point sits at exp(-2 u0) = 1/e for the (0.5, 0) orbit
  CHECK(std::abs(fp.branch_points[0] - std::exp(Complex(-1, 0))) <= 1e-6);

  ConnectionForm cf = build_alpha(s);
  PolynomialKillingField pkf = integrate_killing(fp.xi0, cf, 4, false);
  CHECK(pkf.det_spread <= 1e-8);
  CHECK(pkf.reality_drift <= 1e-9);
  double route = conjugation_route_defect(pkf, cf, {Complex(0.8, 0.3), Complex(0.45, -0.2)});
  CHECK(route <= 1e-6);

  // eigenvector consistency xi phi = nu phi, psi^t xi = nu psi^t
  BAPair pair = solve_psi_pair(s, Complex(0.8, 0.3), 4);
  CHECK(eigenvector_consistency(pkf, pair, dual_from_sigma_star(pair.partner)) <= 1e-7);
}

TEST_CASE("curve extraction round-trips constructed branch points") {
  PolynomialKillingField pkf = constant_killing_field(small_grid(), potential_g1(Complex(-0.5, 0)));
  SpectralCurve c = curve_from_killing(pkf, Complex(1, 0), Complex(-1, 0));
  REQUIRE(c.genus == 1);
  CHECK(std::abs(c.branch_points[0] - Complex(0.5, 0)) <= 1e-8);
  CHECK(std::abs(c.branch_points_mirror[0] - Complex(2.0, 0)) <= 1e-8);
  CHECK(c.circle_positivity > 0.0);
  CHECK(c.min_root_gap > 1e-8);

  // genus 2 window
  PolynomialKillingField p2 = constant_killing_field(small_grid(), potential_g2(g2_seed()));
  SpectralCurve c2 = curve_from_killing(p2, Complex(1, 0), Complex(-1, 0));
  CHECK(c2.genus == 2);
  CHECK(c2.branch_points.size() == 2);
  CHECK(c2.circle_positivity > 0.0);
  for (size_t k = 0; k < 2; ++k) {
    Complex al = c2.branch_points[k];
    CHECK(std::abs(c2.branch_points_mirror[k] - 1.0 / std::conj(al)) <= 1e-6);
  }

  // the vacuum-matched loop has its double root on the circle: refused
  PolynomialKillingField pv = constant_killing_field(small_grid(), vacuum_potential_g1());
  CHECK_THROWS_AS(curve_from_killing(pv, Complex(1, 0), Complex(-1, 0)), Error);
}

TEST_CASE("curve conditions on the vacuum Clifford data") {
  Grid g = Grid::make(48, 48, 2 * M_PI / 48, 2 * M_PI / 48, Complex(0, 0), true, true);
  SolutionPtr s = vacuum(g);
  CurveConditionsReport rep = verify_curve_conditions(s, Complex(1, 0), Complex(-1, 0), 16);
  CHECK(rep.sym_point_defect <= 1e-6);
  CHECK(rep.sigma_involution <= 1e-8);
  CHECK(rep.eta_involution <= 1e-6);
  CHECK(rep.rho_involution <= 1e-6);
  // singular parts of d ln mu: |det| = |Im(conj(g1) g2)|/2 = Lx Ly / 2
  CHECK(rep.singular_part_det >= 1e-6);
  CHECK(std::abs(rep.singular_part_det - rep.singular_part_expected) /
            rep.singular_part_expected <=
        1e-2);
}

TEST_CASE("dp expansions: vacuum closed form and pendulum averages") {
  {
    Grid g = Grid::make(32, 32, M_PI / 32, M_PI / 32, Complex(0, 0), true, true);
    SolutionPtr s = vacuum(g);
    DpReport rep = dp_expansion(s, 1e-2, 6, M_PI / 2, 8);
    CHECK(rep.rel_err_leading <= 1e-3);
    CHECK(std::abs(rep.p_plus_1) <= 1e-3);  // <(dz u)^2> = 0
    CHECK(std::abs(rep.p_minus_1 - Complex(0, 0.5)) <= 1e-3);
    CHECK(std::abs(rep.p_minus_m1) <= 1e-3);
  }
  {
    SolutionPtr s = pendulum(96, 24, 0.5);
    DpReport rep = dp_expansion(s, 1e-2, 6, M_PI / 2, 8);
    CHECK(rep.rel_err_leading <= 1e-3);
    CHECK(rep.rel_err_plus <= 1e-2);
    CHECK(rep.rel_err_minus <= 1e-2);
  }
}

TEST_CASE("vary_psi: forms agree, linearized system holds, FD oracle slope 1") {
  SolutionPtr s = pendulum(96, 32);
  BAPair pa = solve_psi_pair(s, Complex(0.45, -0.2), 4);
  EigenProducts pr = eigen_products(pa.psi, dual_from_sigma_star(pa.partner));
  BAFunction psi = solve_psi(s, Complex(0.8, 0.3), Vec2(1, 1), 4);

  PsiDotResult vd = vary_psi(pr, psi, s);
  CHECK(vd.rank1_form_defect <= 1e-12);
  CHECK(vd.linearized_residual <= 1e-4);

  CHECK_THROWS_AS(vary_psi(pr, solve_psi(s, Complex(0.45, -0.2), Vec2(1, 1), 4), s), Error);

  std::vector<double> ts = {1e-2, 1e-3, 1e-4};
  auto errs = vary_psi_fd_errors(pr, psi, s, ts, 4);
  double slope = loglog_slope(ts, errs);
  CHECK(slope >= 0.9);
  CHECK(slope <= 1.1);
}

TEST_CASE("vacuum products at lambda = 4 satisfy the linearized system") {
  Grid g = Grid::make(96, 96, (M_PI / 2) / 96, (M_PI / 2) / 96, Complex(0, 0), true, true);
  SolutionPtr s = vacuum(g);
  BAPair pa = solve_psi_pair(s, Complex(4, 0), 8);
  EigenProducts pr = eigen_products(pa.psi, dual_from_sigma_star(pa.partner));
  BAFunction psi = solve_psi(s, Complex(0.25, 0), Vec2(1, 1), 8);
  PsiDotResult vd = vary_psi(pr, psi, s);
  CHECK(vd.rank1_form_defect <= 1e-12);
  CHECK(vd.linearized_residual <= 1e-8);
}

TEST_CASE("isospectral generator: removable, rank one, det slope 2 at every branch point") {
  LoopMatrix xi = potential_g1(Complex(-0.5, 0));
  PolynomialKillingField pkf = constant_killing_field(small_grid(), xi);
  SpectralCurve curve = curve_from_killing(pkf, Complex(1, 0), Complex(-1, 0));
  Complex a = curve.branch_points[0];

  DeformationGenerator gen = isospectral_generator(xi, curve, a);
  CHECK(gen.removable_defect <= 1e-8);
  CHECK(gen.q_second_singular <= 1e-10);
  CHECK(gen.trace_defect <= 1e-12);

  std::vector<double> ts = {1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4, 1e-5};
  for (Complex b : {curve.branch_points[0], curve.branch_points_mirror[0]}) {
    std::vector<double> dets;
    for (double t : ts)
      dets.push_back(std::abs((xi.eval(b) + t * gen.xi_dot.eval(b)).determinant()));
    CHECK(loglog_slope(ts, dets) >= 1.9);
  }

  CHECK_THROWS_AS(isospectral_generator(xi, curve, Complex(0.9, 0)), Error);
}

TEST_CASE("isospectral generators at the g = 2 branch points are independent") {
  LoopMatrix xi = potential_g2(g2_seed());
  PolynomialKillingField pkf = constant_killing_field(small_grid(), xi);
  SpectralCurve curve = curve_from_killing(pkf, Complex(1, 0), Complex(-1, 0));
  REQUIRE(curve.genus == 2);

  std::vector<DeformationGenerator> gens;
  for (Complex a : curve.branch_points) gens.push_back(isospectral_generator(xi, curve, a));
  for (const auto& gen : gens) {
    CHECK(gen.removable_defect <= 1e-8);
    std::vector<double> ts = {1e-2, 1e-3, 1e-4, 1e-5};
    for (Complex b : curve.branch_points) {
      std::vector<double> dets;
      for (double t : ts)
        dets.push_back(std::abs((xi.eval(b) + t * gen.xi_dot.eval(b)).determinant()));
      CHECK(loglog_slope(ts, dets) >= 1.9);
    }
  }
  // stacked samples of the two generators have full rank
  std::vector<Complex> samp = {Complex(0.9, 0.1), Complex(-0.4, 0.8), Complex(1.4, -0.3),
                               Complex(0.2, -1.1)};
  Eigen::MatrixXcd rows(2, 4 * samp.size());
  for (int r = 0; r < 2; ++r)
    for (size_t k = 0; k < samp.size(); ++k) {
      Mat2 v = gens[static_cast<size_t>(r)].xi_dot.eval(samp[k]);
      for (int e = 0; e < 4; ++e) rows(r, static_cast<Eigen::Index>(4 * k + e)) = v(e / 2, e % 2);
    }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rows);
  CHECK(svd.singularValues()(1) > 1e-8);
}

TEST_CASE("non-isospectral generator moves only its branch point") {
  LoopMatrix xi = potential_g1(Complex(-0.5, 0));
  PolynomialKillingField pkf = constant_killing_field(small_grid(), xi);
  SpectralCurve curve = curve_from_killing(pkf, Complex(1, 0), Complex(-1, 0));
  Complex a = curve.branch_points[0];
  DeformationGenerator gen = nonisospectral_generator(xi, curve, a);
  CHECK(gen.trace_defect <= 1e-12);

  std::vector<double> ts = {1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4};
  RootMotion rm = track_roots_under_deformation(xi, gen, ts, false);
  std::vector<double> anchor_motion, mirror_motion;
  for (size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> d;
    for (Complex r : rm.roots[k]) d.push_back(std::abs(r - a));
    std::sort(d.begin(), d.end());
    // d[0] is the pole pseudo-root pinned at the anchor; d[1] is the moved
    // branch point
    anchor_motion.push_back(d[1]);
    double dm = 1e300;
    for (Complex r : rm.roots[k]) dm = std::min(dm, std::abs(r - curve.branch_points_mirror[0]));
    mirror_motion.push_back(dm);
  }
  double slope = loglog_slope(ts, anchor_motion);
  CHECK(slope >= 0.9);
  CHECK(slope <= 1.1);
  // the other branch point stays fixed to first order (here: machine-fixed)
  for (double m : mirror_motion) CHECK(m <= 1e-10);

  // reality-symmetrized deformation moves the mirror consistently
  RootMotion rs = track_roots_under_deformation(xi, gen, ts, true);
  std::vector<double> mm;
  for (size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> d;
    for (Complex r : rs.roots[k]) d.push_back(std::abs(r - curve.branch_points_mirror[0]));
    std::sort(d.begin(), d.end());
    mm.push_back(d[1]);
    // root set stays mirror closed
    for (Complex r : rs.roots[k]) {
      if (std::abs(r) >= 1.0 || std::abs(r - a) < 1e-12) continue;
      double best = 1e300;
      for (Complex q : rs.roots[k]) best = std::min(best, std::abs(q - 1.0 / std::conj(r)));
      CHECK(best <= 1e-6);
    }
  }
  double mslope = loglog_slope(ts, mm);
  CHECK(mslope >= 0.9);
  CHECK(mslope <= 1.1);

  CHECK_THROWS_AS(nonisospectral_generator(xi, curve, Complex(0.9, 0)), Error);

  // a near-circle pair of branch points is too degenerate to differentiate
  LoopMatrix tight = potential_g1(Complex(-0.99998, 0));
  PolynomialKillingField pt = constant_killing_field(small_grid(), tight);
  SpectralCurve ct = curve_from_killing(pt, Complex(1, 0), Complex(-1, 0));
  try {
    nonisospectral_generator(tight, ct, ct.branch_points[0]);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CurveTooDegenerate);
  }
}

TEST_CASE("generator slopes on the pendulum-matched curve") {
  SolutionPtr s = pendulum(96, 16, 0.5);
  FittedPotential fp = fit_potential_from_monodromy(s, 8);
  ConnectionForm cf = build_alpha(s);
  PolynomialKillingField pkf = integrate_killing(fp.xi0, cf, 4, false);
  SpectralCurve curve = curve_from_killing(pkf, Complex(1, 0), Complex(0, 1));
  Complex a = curve.branch_points[0];

  DeformationGenerator iso = isospectral_generator(fp.xi0, curve, a);
  CHECK(iso.removable_defect <= 1e-8);
  std::vector<double> ts = {1e-2, 1e-3, 1e-4, 1e-5};
  for (Complex b : {curve.branch_points[0], curve.branch_points_mirror[0]}) {
    std::vector<double> dets;
    for (double t : ts)
      dets.push_back(std::abs((fp.xi0.eval(b) + t * iso.xi_dot.eval(b)).determinant()));
    CHECK(loglog_slope(ts, dets) >= 1.9);
  }

  // the naive matrix-level linearized-Lax residual of the generator field
  // stays O(1): the formula pins the deformation only on the eigen-direction.
  // Record the measurement; first-order consistency is carried by the slopes.
  double lin = linearized_lax_residual(pkf, iso, s, Complex(0.8, 0.3), 2);
  CHECK(lin < 10.0);
}
