#include "cmcforge/frames.hpp"

#include <cmath>

#include "cmcforge/ode.hpp"

namespace cmcforge {

Mat2 alpha_x_coeff(Complex uz, Complex uzbar, Complex eu, Complex emu, Complex lam) {
  Complex d = uz - uzbar;
  return 0.5 * mat2(d, Complex(0, 1) * (eu / lam + emu), Complex(0, 1) * (emu + lam * eu), -d);
}

Mat2 alpha_y_coeff(Complex uz, Complex uzbar, Complex eu, Complex emu, Complex lam) {
  Complex s = uz + uzbar;
  return Complex(0, 0.5) *
         mat2(s, Complex(0, 1) * (eu / lam - emu), Complex(0, 1) * (emu - lam * eu), -s);
}

Mat2 ConnectionForm::A(int i, int j, Complex lam) const {
  return alpha_x_coeff(sol->u_z.a(i, j), sol->u_zbar.a(i, j), eu.a(i, j), emu.a(i, j), lam);
}

Mat2 ConnectionForm::B(int i, int j, Complex lam) const {
  return alpha_y_coeff(sol->u_z.a(i, j), sol->u_zbar.a(i, j), eu.a(i, j), emu.a(i, j), lam);
}

Mat2 ConnectionForm::A_at(double x, double, Complex lam) const {
  double u = sol->u_at(x), uz = 0.5 * sol->du_at(x);
  return alpha_x_coeff(uz, uz, std::exp(u), std::exp(-u), lam);
}

Mat2 ConnectionForm::B_at(double x, double, Complex lam) const {
  double u = sol->u_at(x), uz = 0.5 * sol->du_at(x);
  return alpha_y_coeff(uz, uz, std::exp(u), std::exp(-u), lam);
}

ConnectionForm build_alpha(const SolutionPtr& sol) {
  ConnectionForm cf;
  cf.grid = sol->grid;
  cf.sol = sol;
  cf.eu = ScalarField(sol->grid, sol->u.a.real().exp().cast<Complex>());
  cf.emu = ScalarField(sol->grid, (-sol->u.a.real()).exp().cast<Complex>());
  cf.residual_warning = sol->residual_max > 1e-4;
  const Complex lams[3] = {Complex(1, 0), std::exp(Complex(0, 0.9)), std::exp(Complex(0, -1.7))};
  double worst = 0.0;
  for (const Complex& l : lams) worst = std::max(worst, max_abs(mc_residual(cf, l)));
  cf.flatness_report = worst;
  return cf;
}

Mat2Field mc_residual(const ConnectionForm& cf, Complex lambda) {
  const Grid& g = cf.grid;
  Mat2Field a(g), b(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      a.set(i, j, cf.A(i, j, lambda));
      b.set(i, j, cf.B(i, j, lambda));
    }
  Mat2Field r = ddx(b) - ddy(a) + commutator(a, b);
  return 2.0 * r;
}

std::array<Mat2Field, 3> mc_residual_coeffs(const ConnectionForm& cf) {
  const Complex lams[3] = {Complex(1, 0), Complex(2, 0), Complex(0.5, 0)};
  Mat2Field r[3] = {mc_residual(cf, lams[0]), mc_residual(cf, lams[1]), mc_residual(cf, lams[2])};
  // Solve R(lam) = Rm / lam + R0 + Rp lam at the three samples.
  Eigen::Matrix3cd v;
  for (int k = 0; k < 3; ++k) v.row(k) << 1.0 / lams[k], Complex(1, 0), lams[k];
  Eigen::Matrix3cd vi = v.inverse();
  std::array<Mat2Field, 3> out{Mat2Field(cf.grid), Mat2Field(cf.grid), Mat2Field(cf.grid)};
  for (int c = 0; c < 3; ++c)
    for (int e = 0; e < 4; ++e)
      out[static_cast<size_t>(c)].e[static_cast<size_t>(e)] =
          vi(c, 0) * r[0].e[static_cast<size_t>(e)] + vi(c, 1) * r[1].e[static_cast<size_t>(e)] +
          vi(c, 2) * r[2].e[static_cast<size_t>(e)];
  return out;
}

Complex label_eigenvalue(const Mat2& m) {
  Complex tr = m.trace(), det = m.determinant();
  Complex disc = std::sqrt(tr * tr - 4.0 * det);
  Complex mu1 = 0.5 * (tr + disc), mu2 = 0.5 * (tr - disc);
  double a1 = std::abs(mu1), a2 = std::abs(mu2);
  if (std::abs(a1 - a2) > 1e-9) return a1 > a2 ? mu1 : mu2;
  double arg1 = std::arg(mu1);
  if (arg1 >= 0.0 && arg1 < M_PI) return mu1;
  double arg2 = std::arg(mu2);
  if (arg2 >= 0.0 && arg2 < M_PI) return mu2;
  return mu1;
}

namespace {

struct Renormalizer {
  bool unitarize = false;
  long count = 0;
  double max_correction = 0.0;

  void apply(Mat2& f) {
    if (++count % 16 != 0) return;
    Mat2 before = f;
    Complex det = f.determinant();
    f /= std::sqrt(det);
    if (unitarize) {
      Eigen::SelfAdjointEigenSolver<Mat2> es(f.adjoint() * f);
      Eigen::Vector2d ev = es.eigenvalues();
      Mat2 hinvs = es.eigenvectors() *
                   Eigen::Vector2cd(1.0 / std::sqrt(ev(0)), 1.0 / std::sqrt(ev(1))).asDiagonal() *
                   es.eigenvectors().adjoint();
      f = f * hinvs;
    }
    double corr = (f - before).cwiseAbs().maxCoeff();
    max_correction = std::max(max_correction, corr);
    if (corr > 1e-2) fail(Errc::NonConvergent, "integrate_frame: renormalization exceeded 1e-2");
  }
};

}  // namespace

ExtendedFrame integrate_frame(const ConnectionForm& cf, Complex lambda, int substeps,
                              bool rows_first) {
  if (lambda == Complex(0, 0)) fail(Errc::LambdaZero, "integrate_frame: lambda = 0");
  const Grid& g = cf.grid;
  ExtendedFrame ef;
  ef.grid = g;
  ef.lambda = lambda;
  ef.F = Mat2Field(g);
  Renormalizer ren;
  ren.unitarize = std::abs(std::abs(lambda) - 1.0) < 1e-12;

  const bool exact = cf.exact_off_grid();
  auto a_of = [&](int j_row) {
    return [&, j_row](double x) {
      if (exact) return cf.A_at(x, g.y(j_row), lambda);
      double s = (x - g.origin.real()) / g.hx;
      Complex uz = interp_axis(g, cf.sol->u_z.a, 0, j_row, s);
      Complex uzb = interp_axis(g, cf.sol->u_zbar.a, 0, j_row, s);
      double u = interp_axis(g, cf.sol->u.a, 0, j_row, s).real();
      return alpha_x_coeff(uz, uzb, std::exp(u), std::exp(-u), lambda);
    };
  };
  auto b_of = [&](int i_col) {
    return [&, i_col](double y) {
      if (exact) return cf.B_at(g.x(i_col), y, lambda);
      double s = (y - g.origin.imag()) / g.hy;
      Complex uz = interp_axis(g, cf.sol->u_z.a, 1, i_col, s);
      Complex uzb = interp_axis(g, cf.sol->u_zbar.a, 1, i_col, s);
      double u = interp_axis(g, cf.sol->u.a, 1, i_col, s).real();
      return alpha_y_coeff(uz, uzb, std::exp(u), std::exp(-u), lambda);
    };
  };

  // advance F across one cell along x (row j) or y (column i)
  auto cell_x = [&](Mat2 f, int i, int j) {
    auto a = a_of(j);
    double h = g.hx / substeps;
    for (int k = 0; k < substeps; ++k) {
      f = ode::step_right(f, a, g.x(i) + k * h, h);
      ren.apply(f);
    }
    return f;
  };
  auto cell_y = [&](Mat2 f, int i, int j) {
    auto b = b_of(i);
    double h = g.hy / substeps;
    for (int k = 0; k < substeps; ++k) {
      f = ode::step_right(f, b, g.y(j) + k * h, h);
      ren.apply(f);
    }
    return f;
  };

  if (!rows_first) {
    Mat2 f = Mat2::Identity();
    ef.F.set(0, 0, f);
    for (int j = 0; j + 1 < g.ny; ++j) ef.F.set(0, j + 1, f = cell_y(f, 0, j));
    if (g.periodic_y) {
      Mat2 top = cell_y(ef.F.at(0, g.ny - 1), 0, g.ny - 1);
      ef.wrap_y.assign(static_cast<size_t>(g.nx), Mat2::Identity());
      ef.wrap_y[0] = top;
      // one extra row at y0 + Ly; alpha there equals alpha at y0 by periodicity
      for (int i = 0; i + 1 <= g.nx - 1; ++i) {
        top = cell_x(top, i, 0);
        ef.wrap_y[static_cast<size_t>(i + 1)] = top;
      }
    }
    for (int j = 0; j < g.ny; ++j) {
      Mat2 fr = ef.F.at(0, j);
      for (int i = 0; i + 1 < g.nx; ++i) ef.F.set(i + 1, j, fr = cell_x(fr, i, j));
      if (g.periodic_x) {
        if (ef.wrap_x.empty()) ef.wrap_x.assign(static_cast<size_t>(g.ny), Mat2::Identity());
        ef.wrap_x[static_cast<size_t>(j)] = cell_x(ef.F.at(g.nx - 1, j), g.nx - 1, j);
      }
    }
  } else {
    Mat2 f = Mat2::Identity();
    ef.F.set(0, 0, f);
    for (int i = 0; i + 1 < g.nx; ++i) ef.F.set(i + 1, 0, f = cell_x(f, i, 0));
    for (int i = 0; i < g.nx; ++i) {
      Mat2 fc = ef.F.at(i, 0);
      for (int j = 0; j + 1 < g.ny; ++j) ef.F.set(i, j + 1, fc = cell_y(fc, i, j));
    }
    if (g.periodic_x) {
      ef.wrap_x.assign(static_cast<size_t>(g.ny), Mat2::Identity());
      for (int j = 0; j < g.ny; ++j)
        ef.wrap_x[static_cast<size_t>(j)] = cell_x(ef.F.at(g.nx - 1, j), g.nx - 1, j);
    }
    if (g.periodic_y) {
      ef.wrap_y.assign(static_cast<size_t>(g.nx), Mat2::Identity());
      for (int i = 0; i < g.nx; ++i)
        ef.wrap_y[static_cast<size_t>(i)] = cell_y(ef.F.at(i, g.ny - 1), i, g.ny - 1);
    }
  }

  if (g.periodic_x && !ef.wrap_x.empty()) {
    ef.M1 = ef.wrap_x[0];
    ef.has_m1 = true;
  }
  if (g.periodic_y && !ef.wrap_y.empty()) {
    ef.M2 = ef.wrap_y[0];
    ef.has_m2 = true;
  }
  if (ef.has_m1)
    ef.mu = label_eigenvalue(ef.M1);
  else if (ef.has_m2)
    ef.mu = label_eigenvalue(ef.M2);
  ef.max_renorm = ren.max_correction;

  double ddrift = 0.0, udrift = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      Mat2 f = ef.F.at(i, j);
      ddrift = std::max(ddrift, std::abs(f.determinant() - Complex(1, 0)));
      if (ren.unitarize)
        udrift = std::max(udrift, (f * f.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
    }
  ef.det_drift = ddrift;
  ef.unit_drift = udrift;
  return ef;
}

double path_independence_defect(const ConnectionForm& cf, Complex lambda, int substeps) {
  ExtendedFrame a = integrate_frame(cf, lambda, substeps, false);
  ExtendedFrame b = integrate_frame(cf, lambda, substeps, true);
  return max_abs(a.F - b.F);
}

double Immersion::useful_identity_defect() const {
  return std::abs(4.0 * Q * std::conj(Q) * (H * H + 1.0) - 1.0);
}

Immersion sym_bobenko(const ExtendedFrame& f0, const ExtendedFrame& f1, const SolutionPtr& sol) {
  Complex l0 = f0.lambda, l1 = f1.lambda;
  if (std::abs(l0 - l1) < 1e-12) fail(Errc::SymPointsEqual, "sym_bobenko: lambda0 == lambda1");
  if (std::abs(std::abs(l0) - 1.0) > 1e-12 || std::abs(std::abs(l1) - 1.0) > 1e-12)
    fail(Errc::SymPointsOffCircle, "sym_bobenko: Sym points must lie on the unit circle");

  Immersion imm;
  imm.grid = f0.grid;
  imm.sol = sol;
  imm.lambda0 = l0;
  imm.lambda1 = l1;
  Complex h = Complex(0, 1) * (l0 + l1) / (l0 - l1);
  if (std::abs(h.imag()) > 1e-12)
    fail(Errc::SymPointsOffCircle, "sym_bobenko: H has an imaginary part");
  imm.H = h.real();
  imm.Q = Complex(0, 0.25) * (1.0 / l1 - 1.0 / l0);
  imm.v2 = ScalarField(imm.grid, (2.0 * sol->u.a.real()).exp().cast<Complex>() / (imm.H * imm.H + 1.0));
  imm.f = Mat2Field(imm.grid);
  imm.N = Mat2Field(imm.grid);
  const Mat2 eps = epsilon_su2();
  for (int i = 0; i < imm.grid.nx; ++i)
    for (int j = 0; j < imm.grid.ny; ++j) {
      Mat2 a = f1.F.at(i, j), binv = f0.F.at(i, j).inverse();
      imm.f.set(i, j, a * binv);
      imm.N.set(i, j, a * eps * binv);
    }
  return imm;
}

Mat2Field ddx(const Mat2Field& f) {
  Mat2Field out;
  out.grid = f.grid;
  for (int k = 0; k < 4; ++k) out.e[static_cast<size_t>(k)] = ddx_arr(f.grid, f.e[static_cast<size_t>(k)]);
  return out;
}

Mat2Field ddy(const Mat2Field& f) {
  Mat2Field out;
  out.grid = f.grid;
  for (int k = 0; k < 4; ++k) out.e[static_cast<size_t>(k)] = ddy_arr(f.grid, f.e[static_cast<size_t>(k)]);
  return out;
}

Mat2Field mulscalar(const ScalarField& s, const Mat2Field& f) {
  Mat2Field out = f;
  for (int k = 0; k < 4; ++k) out.e[static_cast<size_t>(k)] *= s.a;
  return out;
}

Mat2Field inverse_field(const Mat2Field& f) {
  Mat2Field out;
  out.grid = f.grid;
  Eigen::ArrayXXcd det = f.e[0] * f.e[3] - f.e[1] * f.e[2];
  out.e[0] = f.e[3] / det;
  out.e[1] = -f.e[1] / det;
  out.e[2] = -f.e[2] / det;
  out.e[3] = f.e[0] / det;
  return out;
}

FrenetReport frenet_residuals(const Immersion& imm) {
  const Grid& g = imm.grid;
  const SolutionPtr& sol = imm.sol;
  Mat2Field df = dz(imm.f), dbf = dzbar(imm.f);
  Mat2Field ddf = dz(df), lap = dzbar(df);
  Mat2Field dn = dz(imm.N);

  ScalarField inv_v2{g, Eigen::ArrayXXcd(1.0 / imm.v2.a)};
  Mat2Field r1 = dn - ((-imm.H) * df + (2.0 * imm.Q) * mulscalar(inv_v2, dbf));
  Mat2Field r2 = ddf - (2.0 * Complex(1, 0) * mulscalar(sol->u_z, df) - imm.Q * imm.N);
  Mat2Field r3 = 2.0 * Complex(1, 0) * lap -
                 ((-1.0) * mulscalar(imm.v2, imm.f) + imm.H * mulscalar(imm.v2, imm.N));

  int margin = (g.periodic_x && g.periodic_y) ? 0 : 4;
  return {max_abs_interior(r1, margin), max_abs_interior(r2, margin),
          max_abs_interior(r3, margin)};
}

double mean_curvature_relation_check(const Immersion& imm, double h_used) {
  Mat2Field finv = inverse_field(imm.f);
  Mat2Field wp = matmul(finv, dz(imm.f));
  Mat2Field wpp = matmul(finv, dzbar(imm.f));
  Mat2Field r = Complex(0, 2) * (dz(wpp) + dzbar(wp)) - (2.0 * h_used) * commutator(wp, wpp);
  int margin = (imm.grid.periodic_x && imm.grid.periodic_y) ? 0 : 4;
  return max_abs_interior(r, margin);
}

}  // namespace cmcforge
