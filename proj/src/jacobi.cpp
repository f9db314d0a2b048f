#include "cmcforge/jacobi.hpp"

#include <cmath>

namespace cmcforge {

SymContext SymContext::from_points(Complex l0, Complex l1) {
  if (std::abs(l0 - l1) < 1e-12) fail(Errc::SymPointsEqual, "SymContext: lambda0 == lambda1");
  if (std::abs(std::abs(l0) - 1.0) > 1e-12 || std::abs(std::abs(l1) - 1.0) > 1e-12)
    fail(Errc::SymPointsOffCircle, "SymContext: Sym points must lie on the unit circle");
  SymContext s;
  s.lambda0 = l0;
  s.lambda1 = l1;
  Complex h = Complex(0, 1) * (l0 + l1) / (l0 - l1);
  if (std::abs(h.imag()) > 1e-12)
    fail(Errc::SymPointsOffCircle, "SymContext: H has an imaginary part");
  s.H = h.real();
  s.Q = Complex(0, 0.25) * (1.0 / l1 - 1.0 / l0);
  return s;
}

JacobiData homogeneous_from_products(const EigenProducts& pr, const SymContext& sym,
                                     const SolutionPtr& sol) {
  if (std::abs(sym.Q) < 1e-14) fail(Errc::ZeroHopf, "homogeneous_from_products: Q = 0");
  JacobiData jd;
  jd.grid = pr.grid;
  jd.lambda = pr.lambda;
  jd.sym = sym;
  Complex scale(1.0, 0.0);
  if (!(pr.lambda.imag() == 0.0 && pr.lambda.real() <= 0.0)) {
    scale = (-2.0 / sqrt_lambda(pr.lambda)) / pr.y;
  } else if (std::abs(pr.y) > 0.0) {
    scale = 2.0 / std::abs(pr.y);
  }
  jd.y = scale * pr.y;
  Eigen::ArrayXXcd eu = sol->u.a.real().exp().cast<Complex>();
  jd.omega = ScalarField{pr.grid, scale * (pr.xi11.a - pr.xi22.a)};
  jd.tau = ScalarField{pr.grid, scale * Complex(0, 1) * pr.xi21.a / (eu * sym.Q)};
  jd.sigma = ScalarField{pr.grid, scale * Complex(0, -1) * pr.xi12.a / (eu * std::conj(sym.Q))};
  jd.phi_aux = ScalarField{pr.grid,
                           scale * Complex(0, -1) * (pr.xi21.a / eu + eu * pr.xi12.a / pr.lambda)};
  return jd;
}

double homogeneous_jacobi_residual(const ScalarField& w, const SolutionPtr& sol) {
  ScalarField lap = dzbar(dz(w));
  ScalarField r{w.grid, lap.a + (2.0 * sol->u.a.real()).cosh() * w.a};
  int margin = (w.grid.periodic_x && w.grid.periodic_y) ? 0 : 4;
  return max_abs_interior(r, margin);
}

IdentityReport check_identities_iv_v(const JacobiData& jd, const SolutionPtr& sol) {
  ScalarField dw = dz(jd.omega);
  ScalarField dphi = dz(jd.phi_aux);
  ScalarField ddw = dz(dw);
  Complex il = 1.0 / jd.lambda;
  ScalarField iv{jd.grid, dw.a * dw.a - jd.phi_aux.a * jd.phi_aux.a -
                              il * (jd.y * jd.y - jd.omega.a * jd.omega.a)};
  ScalarField v1{jd.grid, dphi.a - 2.0 * sol->u_z.a * dw.a};
  ScalarField v2{jd.grid, il * jd.omega.a - 2.0 * jd.phi_aux.a * sol->u_z.a + ddw.a};
  int margin = (jd.grid.periodic_x && jd.grid.periodic_y) ? 0 : 4;
  return {max_abs_interior(iv, margin), max_abs_interior(v1, margin),
          max_abs_interior(v2, margin)};
}

ScalarField udot_from_field(const JacobiData& jd) {
  Complex l = jd.lambda, l0 = jd.sym.lambda0, l1 = jd.sym.lambda1;
  Complex c = Complex(0, 1) * (l - l0) * (l - l1) / (l * (l0 - l1));
  return c * jd.omega;
}

ScalarField udot_assembled(const JacobiData& jd, const SolutionPtr& sol) {
  ScalarField dt = dz(jd.tau), ds = dzbar(jd.sigma);
  ScalarField out{jd.grid, 0.5 * dt.a + jd.tau.a * sol->u_z.a + 0.5 * ds.a +
                               jd.sigma.a * sol->u_zbar.a - jd.omega.a * jd.sym.H};
  return out;
}

SupplementResult supplement(const ScalarField& omega, Complex qdot, const SymContext& sym,
                            const SolutionPtr& sol) {
  double hdot = 0.0;
  if (std::abs(qdot) > 0.0) {
    if (std::abs(sym.H) < 1e-14)
      fail(Errc::ConfigInvalid, "supplement: Qdot != 0 with H = 0 leaves Hdot undefined");
    Complex hd = -qdot * (sym.H * sym.H + 1.0) / (sym.H * sym.Q);
    hdot = hd.real();
  }

  Eigen::ArrayXXcd e2u = (2.0 * sol->u.a.real()).exp();
  ScalarField rhs{omega.grid,
                  (hdot / (2.0 * (sym.H * sym.H + 1.0))) * e2u.cast<Complex>()};
  ScalarField lap = dzbar(dz(omega));
  ScalarField inhom{omega.grid,
                    lap.a + (2.0 * sol->u.a.real()).cosh() * omega.a - rhs.a};
  double inhom_res = max_abs_interior(inhom, (omega.grid.periodic_x && omega.grid.periodic_y) ? 0 : 4);
  if (inhom_res > 1e-3)
    fail(Errc::NotJacobi, "supplement: omega violates the implied Jacobi equation");

  double vfac = sym.H * sym.H + 1.0;  // v^{-2} = (H^2+1) e^{-2u}
  ScalarField dw = dz(omega), dbw = dzbar(omega);
  ScalarField ddw = dz(dw), dbbw = dzbar(dbw);
  ScalarField tau_z{omega.grid, (qdot + ddw.a - 2.0 * sol->u_z.a * dw.a) / (2.0 * sym.Q)};
  ScalarField tau_zb{omega.grid,
                     -2.0 * vfac * omega.a * std::conj(sym.Q) / e2u.cast<Complex>()};
  ScalarField sig_z{omega.grid, -2.0 * vfac * omega.a * sym.Q / e2u.cast<Complex>()};
  ScalarField sig_zb{omega.grid,
                     (std::conj(qdot) + dbbw.a - 2.0 * sol->u_zbar.a * dbw.a) /
                         (2.0 * std::conj(sym.Q))};

  SupplementResult out;
  out.inhom_residual = inhom_res;
  out.compat_tau = max_abs_interior(dzbar(tau_z) - dz(tau_zb),
                                    (omega.grid.periodic_x && omega.grid.periodic_y) ? 0 : 4);
  out.compat_sigma = max_abs_interior(dzbar(sig_z) - dz(sig_zb),
                                      (omega.grid.periodic_x && omega.grid.periodic_y) ? 0 : 4);
  out.tau = integrate_gradient(tau_z, tau_zb);
  out.sigma = integrate_gradient(sig_z, sig_zb);
  return out;
}

ScalarField pairing_field(const Mat2Field& a, const Mat2Field& b) {
  ScalarField out(a.grid);
  Eigen::ArrayXXcd tra = a.e[0] + a.e[3], trb = b.e[0] + b.e[3];
  Eigen::ArrayXXcd trab = a.e[0] * b.e[0] + a.e[1] * b.e[2] + a.e[2] * b.e[1] + a.e[3] * b.e[3];
  out.a = 0.5 * (tra * trb - trab);
  return out;
}

VariationDecomposition decompose_variation(const Mat2Field& fdot, const Immersion& imm) {
  Mat2Field df = dz(imm.f), dbf = dzbar(imm.f);
  VariationDecomposition out;
  out.omega = pairing_field(fdot, imm.N);
  ScalarField inv_v2{imm.grid, Eigen::ArrayXXcd(1.0 / imm.v2.a)};
  out.tau = ScalarField{imm.grid, 2.0 * pairing_field(fdot, dbf).a * inv_v2.a};
  out.sigma = ScalarField{imm.grid, 2.0 * pairing_field(fdot, df).a * inv_v2.a};

  const SolutionPtr& sol = imm.sol;
  ScalarField dt = dz(out.tau), ds = dzbar(out.sigma);
  out.udot = ScalarField{imm.grid, 0.5 * dt.a + out.tau.a * sol->u_z.a + 0.5 * ds.a +
                                       out.sigma.a * sol->u_zbar.a - out.omega.a * imm.H};
  int margin = (imm.grid.periodic_x && imm.grid.periodic_y) ? 0 : 4;
  out.udot_max = max_abs_interior(out.udot, margin);
  return out;
}

VariationDecomposition killing_from_isometry(const Mat2& g0, const Mat2& g1,
                                             const Immersion& imm) {
  if (!is_su2_algebra(g0, 1e-10) || !is_su2_algebra(g1, 1e-10))
    fail(Errc::NotSkew, "killing_from_isometry: generators must lie in su(2)");
  Mat2Field fdot(imm.grid);
  for (int i = 0; i < imm.grid.nx; ++i)
    for (int j = 0; j < imm.grid.ny; ++j) {
      Mat2 f = imm.f.at(i, j);
      fdot.set(i, j, g1 * f - f * g0);
    }
  return decompose_variation(fdot, imm);
}

InhomogeneousJacobi inhomogeneous_build(const SolutionPtr& sol, const SymContext& sym,
                                        double hdot) {
  const Grid& g = sol->grid;
  if (!g.periodic_x)
    fail(Errc::NoPeriod, "inhomogeneous_build: needs the periodic x-axis for defects");

  InhomogeneousJacobi out;
  out.grid = g;
  double hf = -hdot / (2.0 * (sym.H * sym.H + 1.0));
  out.hfrak = hf;

  ScalarField zf(g), zbf(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      zf.a(i, j) = g.z(i, j);
      zbf.a(i, j) = std::conj(g.z(i, j));
    }

  out.omega_plus = ScalarField{g, hf * (zf.a * sol->u_z.a - 0.5)};
  out.omega_minus = ScalarField{g, hf * (zbf.a * sol->u_zbar.a - 0.5)};
  out.omega_hat = out.omega_plus + out.omega_minus;

  // residual of the inhomogeneous equation (omega_hat is not grid periodic)
  {
    ScalarField w = out.omega_hat;
    w.grid.periodic_x = w.grid.periodic_y = false;
    ScalarField lap = dzbar(dz(w));
    Eigen::ArrayXXcd rhs =
        (hdot / (2.0 * (sym.H * sym.H + 1.0))) * (2.0 * sol->u.a.real()).exp().cast<Complex>();
    ScalarField r{w.grid, lap.a + (2.0 * sol->u.a.real()).cosh() * w.a - rhs};
    out.inhom_residual = max_abs_interior(r, 4);
  }

  if (!sol->x_only())
    fail(Errc::NoPeriod, "inhomogeneous_build: sampled solutions carry no x-jets");

  // x-jets on grid columns: dz^k u = u^(k)(x) / 2^k
  Eigen::ArrayXd u1(g.nx), u2(g.nx), u3(g.nx), uval(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    auto jets = sol->x_jets(g.x(i));
    uval(i) = jets[0];
    u1(i) = jets[1] / 2.0;
    u2(i) = jets[2] / 4.0;
    u3(i) = jets[3] / 8.0;
  }

  // path integral I(z) = int_0^z 2 (dz u)^2 dw - cosh(2u) dwbar along the base
  // column then the row; the integrand is x-only so the cumulative part is a
  // single row profile
  const int fpc = sol->fine_per_cell > 0 ? sol->fine_per_cell : 8;
  const int nfine = g.nx * fpc;
  std::vector<Complex> integrand(static_cast<size_t>(nfine + 1));
  for (int k = 0; k <= nfine; ++k) {
    double uu = sol->u_at(g.origin.real() + k * g.hx / fpc);
    double du = sol->du_at(g.origin.real() + k * g.hx / fpc);
    integrand[static_cast<size_t>(k)] = 2.0 * (0.5 * du) * (0.5 * du) - std::cosh(2.0 * uu);
  }
  auto cum = cumulative_integral(integrand, g.hx / fpc);
  Complex period_integral = cum.back();
  out.period_integral = period_integral;
  double c0 = 2.0 * (0.5 * sol->du_at(g.origin.real())) * (0.5 * sol->du_at(g.origin.real())) +
              std::cosh(2.0 * sol->u_at(g.origin.real()));  // vertical-leg integrand at x0

  Complex q = sym.Q;
  auto tau_minus_at = [&](Complex z, int i) {
    return hf * sym.H * z + hf / (4.0 * q) * std::conj(z) * std::exp(-2.0 * uval(i));
  };
  auto dtau_minus_at = [&](Complex z, int i) {
    return Complex(hf * sym.H) +
           hf / (4.0 * q) * std::conj(z) * (-2.0 * u1(i)) * std::exp(-2.0 * uval(i));
  };
  auto path_integral_at = [&](Complex z, int i, int wraps) {
    double y = z.imag();
    return Complex(0, 1) * y * c0 + cum[static_cast<size_t>(i * fpc)] +
           double(wraps) * period_integral;
  };
  auto tau_plus_at = [&](Complex z, int i, int wraps) {
    Complex dwp = hf * (u1(i) + z * u2(i));  // dz omega_plus
    return dwp / (2.0 * q) - hf * z * u1(i) * u1(i) / (2.0 * q) -
           hf / (4.0 * q) * path_integral_at(z, i, wraps);
  };
  auto dtau_plus_at = [&](Complex z, int i, int wraps) {
    Complex ddwp = hf * (2.0 * u2(i) + z * u3(i));
    (void)wraps;
    return ddwp / (2.0 * q) - hf * (u1(i) * u1(i) + 2.0 * z * u1(i) * u2(i)) / (2.0 * q) -
           hf / (4.0 * q) * 2.0 * u1(i) * u1(i);
  };

  out.tau_minus = ScalarField(g);
  out.tau_plus = ScalarField(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      out.tau_minus.a(i, j) = tau_minus_at(g.z(i, j), i);
      out.tau_plus.a(i, j) = tau_plus_at(g.z(i, j), i, 0);
    }
  out.sigma_plus = conj(out.tau_minus);
  out.sigma_minus = conj(out.tau_plus);

  // period defects of g = dz(tau)/2 + tau dz u over gamma_1 = Lx,
  // measured as (translate - identity) of the constructed functions
  double worst_minus = 0.0, worst_plus = 0.0;
  Complex gamma(g.Lx(), 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      Complex z = g.z(i, j), zs = z + gamma;
      Complex gm = 0.5 * dtau_minus_at(z, i) + tau_minus_at(z, i) * u1(i);
      Complex gms = 0.5 * dtau_minus_at(zs, i) + tau_minus_at(zs, i) * u1(i);
      Complex pred_minus = hf * sym.H * gamma * u1(i);
      worst_minus = std::max(worst_minus, std::abs((gms - gm) - pred_minus));

      Complex gp = 0.5 * dtau_plus_at(z, i, 0) + tau_plus_at(z, i, 0) * u1(i);
      Complex gps = 0.5 * dtau_plus_at(zs, i, 1) + tau_plus_at(zs, i, 1) * u1(i);
      Complex pred_plus = hf * gamma / (4.0 * q) * (u3(i) - 2.0 * u1(i) * u1(i) * u1(i)) -
                          hf * u1(i) / (4.0 * q) * period_integral;
      worst_plus = std::max(worst_plus, std::abs((gps - gp) - pred_plus));
    }
  out.defect_minus_measured_vs_predicted = worst_minus;
  out.defect_plus_measured_vs_predicted = worst_plus;
  return out;
}

}  // namespace cmcforge
