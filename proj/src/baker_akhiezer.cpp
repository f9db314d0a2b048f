#include "cmcforge/baker_akhiezer.hpp"

#include <cmath>

#include "cmcforge/frames.hpp"
#include "cmcforge/ode.hpp"

namespace cmcforge {

namespace {
double direction_gap(const Vec2& a, const Vec2& b) {
  return std::abs(a(0) * b(1) - a(1) * b(0)) / std::max(1e-300, a.norm() * b.norm());
}
}  // namespace

Vec2 robust_eigenvector(const Mat2& t, Complex mu) {
  Vec2 v1(t(0, 1), mu - t(0, 0));
  Vec2 v2(mu - t(1, 1), t(1, 0));
  return v1.norm() >= v2.norm() ? v1 : v2;
}

Complex matched_eigenvalue(const Mat2& t, const Vec2& c) {
  Complex mu_big = label_eigenvalue(t);
  // Wronskian = 1 for the traceless generator; the numeric determinant of a
  // strongly growing transfer matrix is pure cancellation noise.
  Complex mu_small = 1.0 / mu_big;
  Vec2 vbig = robust_eigenvector(t, mu_big), vsmall = robust_eigenvector(t, mu_small);
  if (direction_gap(vbig, vsmall) < 1e-6) {
    Vec2 tc = t * c;
    return std::abs(c(0)) >= std::abs(c(1)) ? tc(0) / c(0) : tc(1) / c(1);
  }
  return direction_gap(c, vbig) <= direction_gap(c, vsmall) ? mu_big : mu_small;
}

namespace {

// The psi system is d psi = alpha^T psi componentwise, so the line
// generators are A^T along x and B^T along y.
struct CoeffProvider {
  std::function<Mat2(double x, int j)> row;  // generator at (x, y_j)
  std::function<Mat2(double y, int i)> col;  // generator at (x_i, y)
};

CoeffProvider provider_from_solution(const SolutionPtr& sol, Complex lambda) {
  CoeffProvider p;
  const Grid g = sol->grid;
  if (sol->x_only()) {
    p.row = [sol, lambda](double x, int) {
      double u = sol->u_at(x);
      Complex uz = 0.5 * sol->du_at(x);
      return alpha_x_coeff(uz, uz, std::exp(u), std::exp(-u), lambda).transpose().eval();
    };
    p.col = [sol, lambda, g](double, int i) {
      double u = sol->u_at(g.x(i));
      Complex uz = 0.5 * sol->du_at(g.x(i));
      return alpha_y_coeff(uz, uz, std::exp(u), std::exp(-u), lambda).transpose().eval();
    };
  } else {
    p.row = [sol, lambda, g](double x, int j) {
      double s = (x - g.origin.real()) / g.hx;
      Complex uz = interp_axis(g, sol->u_z.a, 0, j, s);
      Complex uzb = interp_axis(g, sol->u_zbar.a, 0, j, s);
      Complex u = interp_axis(g, sol->u.a, 0, j, s);
      return alpha_x_coeff(uz, uzb, std::exp(u), std::exp(-u), lambda).transpose().eval();
    };
    p.col = [sol, lambda, g](double y, int i) {
      double s = (y - g.origin.imag()) / g.hy;
      Complex uz = interp_axis(g, sol->u_z.a, 1, i, s);
      Complex uzb = interp_axis(g, sol->u_zbar.a, 1, i, s);
      Complex u = interp_axis(g, sol->u.a, 1, i, s);
      return alpha_y_coeff(uz, uzb, std::exp(u), std::exp(-u), lambda).transpose().eval();
    };
  }
  return p;
}

PsiField integrate_psi_impl(const Grid& g, Complex lambda, int substeps, const CoeffProvider& cp) {
  if (lambda == Complex(0, 0)) fail(Errc::LambdaZero, "psi system: lambda = 0");
  PsiField pf;
  pf.grid = g;
  pf.lambda = lambda;
  pf.Psi = Mat2Field(g);

  auto cell_x = [&](Mat2 m, int i, int j) {
    double h = g.hx / substeps;
    auto gen = [&](double x) { return cp.row(x, j); };
    for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, g.x(i) + k * h, h);
    return m;
  };
  auto cell_y = [&](Mat2 m, int i, int j) {
    double h = g.hy / substeps;
    auto gen = [&](double y) { return cp.col(y, i); };
    for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, g.y(j) + k * h, h);
    return m;
  };

  Mat2 m = Mat2::Identity();
  pf.Psi.set(0, 0, m);
  for (int j = 0; j + 1 < g.ny; ++j) pf.Psi.set(0, j + 1, m = cell_y(m, 0, j));
  if (g.periodic_y) {
    Mat2 top = cell_y(pf.Psi.at(0, g.ny - 1), 0, g.ny - 1);
    pf.wrap_y.assign(static_cast<size_t>(g.nx), Mat2::Identity());
    pf.wrap_y[0] = top;
    for (int i = 0; i + 1 <= g.nx - 1; ++i) {
      top = cell_x(top, i, 0);  // coefficients at y0 + Ly equal those at y0
      pf.wrap_y[static_cast<size_t>(i + 1)] = top;
    }
    pf.T2 = pf.wrap_y[0];
    pf.has_t2 = true;
  }
  for (int j = 0; j < g.ny; ++j) {
    Mat2 mr = pf.Psi.at(0, j);
    for (int i = 0; i + 1 < g.nx; ++i) pf.Psi.set(i + 1, j, mr = cell_x(mr, i, j));
    if (g.periodic_x) {
      if (pf.wrap_x.empty()) pf.wrap_x.assign(static_cast<size_t>(g.ny), Mat2::Identity());
      pf.wrap_x[static_cast<size_t>(j)] = cell_x(pf.Psi.at(g.nx - 1, j), g.nx - 1, j);
    }
  }
  if (g.periodic_x) {
    pf.T1 = pf.wrap_x[0];
    pf.has_t1 = true;
  }

  double drift = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      drift = std::max(drift, std::abs(pf.Psi.at(i, j).determinant() - Complex(1, 0)));
  pf.det_drift = drift;
  return pf;
}

Vec2 normalize_seed(Vec2 c) {
  if (std::abs(c(0)) >= 1e-12) return c / c(0);
  return c / c(1);
}

void check_not_degenerate(const Mat2& t) {
  double d = std::min((t - Mat2::Identity()).cwiseAbs().maxCoeff(),
                      (t + Mat2::Identity()).cwiseAbs().maxCoeff());
  if (d <= 1e-10)
    fail(Errc::DegenerateMonodromy, "solve_psi: monodromy within 1e-10 of +-1");
}

ScalarField drop_periodicity(const ScalarField& f) {
  ScalarField g = f;
  g.grid.periodic_x = g.grid.periodic_y = false;
  return g;
}

}  // namespace

PsiField integrate_psi_fundamental(const SolutionPtr& sol, Complex lambda, int substeps) {
  return integrate_psi_impl(sol->grid, lambda, substeps, provider_from_solution(sol, lambda));
}

PsiField integrate_psi_fields(const Grid& grid, Complex lambda, int substeps,
                              const ScalarField& uz, const ScalarField& uzbar,
                              const ScalarField& eu, const ScalarField& emu) {
  CoeffProvider p;
  p.row = [&, lambda](double x, int j) {
    double s = (x - grid.origin.real()) / grid.hx;
    return alpha_x_coeff(interp_axis(grid, uz.a, 0, j, s), interp_axis(grid, uzbar.a, 0, j, s),
                         interp_axis(grid, eu.a, 0, j, s), interp_axis(grid, emu.a, 0, j, s),
                         lambda)
        .transpose()
        .eval();
  };
  p.col = [&, lambda](double y, int i) {
    double s = (y - grid.origin.imag()) / grid.hy;
    return alpha_y_coeff(interp_axis(grid, uz.a, 1, i, s), interp_axis(grid, uzbar.a, 1, i, s),
                         interp_axis(grid, eu.a, 1, i, s), interp_axis(grid, emu.a, 1, i, s),
                         lambda)
        .transpose()
        .eval();
  };
  return integrate_psi_impl(grid, lambda, substeps, p);
}

BAFunction slice_solution(const PsiField& pf, const Vec2& c) {
  BAFunction b;
  b.grid = pf.grid;
  b.lambda = pf.lambda;
  b.seed = c;
  b.psi1 = ScalarField(pf.grid, pf.Psi.e[0] * c(0) + pf.Psi.e[1] * c(1));
  b.psi2 = ScalarField(pf.grid, pf.Psi.e[2] * c(0) + pf.Psi.e[3] * c(1));
  b.wrap_x.reserve(pf.wrap_x.size());
  for (const Mat2& w : pf.wrap_x) b.wrap_x.push_back(w * c);
  for (const Mat2& w : pf.wrap_y) b.wrap_y.push_back(w * c);
  b.wronskian_drift = pf.det_drift;
  return b;
}

namespace {

void attach_multipliers(BAFunction& b, const PsiField& pf) {
  if (pf.has_t1) {
    b.mu1 = matched_eigenvalue(pf.T1, b.seed);
    b.has_mu1 = true;
  }
  if (pf.has_t2) {
    b.mu2 = matched_eigenvalue(pf.T2, b.seed);
    b.has_mu2 = true;
  }
}

}  // namespace

BAFunction solve_psi(const SolutionPtr& sol, Complex lambda, Vec2 seed, int substeps) {
  if (seed.norm() == 0.0) fail(Errc::ConfigInvalid, "solve_psi: zero seed");
  const Grid& g = sol->grid;
  if ((g.periodic_x || g.periodic_y) && sol->x_only() && g.periodic_x)
    return solve_psi_pair(sol, lambda, substeps).psi;
  substeps = std::max(substeps, auto_substeps(sol, lambda));
  PsiField pf = integrate_psi_fundamental(sol, lambda, substeps);
  Vec2 c = seed;
  if (pf.has_t1 || pf.has_t2) {
    const Mat2& t = pf.has_t1 ? pf.T1 : pf.T2;
    check_not_degenerate(t);
    Complex mu = label_eigenvalue(t);
    c = normalize_seed(robust_eigenvector(t, mu));
  }
  BAFunction b = slice_solution(pf, c);
  attach_multipliers(b, pf);
  return b;
}

int auto_substeps(const SolutionPtr& sol, Complex lambda, double tol) {
  double umax = sol->u.a.real().abs().maxCoeff();
  double emax = std::exp(umax);
  double al = std::abs(lambda);
  double nu = 0.5 * emax * (1.0 / std::sqrt(al) + std::sqrt(al)) + 1.0;
  double minf = 0.5 * emax * std::max(al, 1.0 / al) + 1.0;
  double len = sol->grid.Lx() + sol->grid.Ly();
  double h = std::pow(120.0 * tol / (len * minf * nu * nu * nu * nu), 0.25);
  double hcell = std::min(sol->grid.hx, sol->grid.hy);
  int s = static_cast<int>(std::ceil(hcell / h));
  return std::min(std::max(s, 1), 4096);
}

MonodromyPair psi_monodromies(const SolutionPtr& sol, Complex lambda, int substeps) {
  if (lambda == Complex(0, 0)) fail(Errc::LambdaZero, "psi system: lambda = 0");
  const Grid& g = sol->grid;
  CoeffProvider cp = provider_from_solution(sol, lambda);
  MonodromyPair mp;
  if (g.periodic_x) {
    Mat2 m = Mat2::Identity();
    double h = g.hx / substeps;
    auto gen = [&](double x) { return cp.row(x, 0); };
    for (int i = 0; i < g.nx; ++i)
      for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, g.x(i) + k * h, h);
    mp.T1 = m;
    mp.has_t1 = true;
  }
  if (g.periodic_y) {
    Mat2 m = Mat2::Identity();
    double h = g.hy / substeps;
    auto gen = [&](double y) { return cp.col(y, 0); };
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, g.y(j) + k * h, h);
    mp.T2 = m;
    mp.has_t2 = true;
  }
  return mp;
}

namespace {

// Directional field assembly for one eigen-branch. Strongly decaying
// directions are integrated against the flow, seeded from the wrapped value
// mu * psi, so the branch never loses accuracy to the dominant one.
BAFunction assemble_branch(const SolutionPtr& sol, Complex lambda, int substeps,
                           const CoeffProvider& cp, const Vec2& c, Complex mu1, Complex mu2,
                           double* seam) {
  const Grid& g = sol->grid;
  const double cutoff = std::exp(-4.0);
  BAFunction b;
  b.grid = g;
  b.lambda = lambda;
  b.seed = c;
  b.mu1 = mu1;
  b.mu2 = mu2;
  b.has_mu1 = g.periodic_x;
  b.has_mu2 = g.periodic_y;
  b.psi1 = ScalarField(g);
  b.psi2 = ScalarField(g);

  auto cell_y_dir = [&](Vec2 v, int i, int j, double dir) {
    double h = dir * g.hy / substeps;
    double t0 = dir > 0 ? g.y(j) : g.y(j + 1);
    auto gen = [&](double y) { return cp.col(y, i); };
    Mat2 m = Mat2::Identity();
    for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, t0 + k * h, h);
    return (m * v).eval();
  };
  auto cell_x_dir = [&](Vec2 v, int i, int j, double dir) {
    double h = dir * g.hx / substeps;
    double t0 = dir > 0 ? g.x(i) : g.x(i + 1);
    auto gen = [&](double x) { return cp.row(x, j); };
    Mat2 m = Mat2::Identity();
    for (int k = 0; k < substeps; ++k) m = ode::step_left(m, gen, t0 + k * h, h);
    return (m * v).eval();
  };

  // base column
  std::vector<Vec2> col(static_cast<size_t>(g.ny));
  bool down = g.periodic_y && std::abs(mu2) < cutoff;
  if (!down) {
    col[0] = c;
    for (int j = 0; j + 1 < g.ny; ++j) col[static_cast<size_t>(j + 1)] = cell_y_dir(col[static_cast<size_t>(j)], 0, j, +1);
  } else {
    Vec2 v = mu2 * c;  // value at y0 + Ly by quasi-periodicity
    for (int j = g.ny - 1; j >= 0; --j) {
      v = cell_y_dir(v, 0, j, -1);
      col[static_cast<size_t>(j)] = v;
    }
    if (seam) *seam = std::max(*seam, (col[0] - c).norm() / std::max(1e-300, c.norm()));
  }

  // rows
  bool back = g.periodic_x && std::abs(mu1) < cutoff;
  if (g.periodic_x) b.wrap_x.assign(static_cast<size_t>(g.ny), Vec2::Zero());
  for (int j = 0; j < g.ny; ++j) {
    if (!back) {
      Vec2 v = col[static_cast<size_t>(j)];
      b.psi1.a(0, j) = v(0);
      b.psi2.a(0, j) = v(1);
      for (int i = 0; i + 1 < g.nx; ++i) {
        v = cell_x_dir(v, i, j, +1);
        b.psi1.a(i + 1, j) = v(0);
        b.psi2.a(i + 1, j) = v(1);
      }
      if (g.periodic_x) b.wrap_x[static_cast<size_t>(j)] = cell_x_dir(v, g.nx - 1, j, +1);
    } else {
      Vec2 v = mu1 * col[static_cast<size_t>(j)];  // value at x0 + Lx
      b.wrap_x[static_cast<size_t>(j)] = v;
      for (int i = g.nx - 1; i >= 1; --i) {
        v = cell_x_dir(v, i, j, -1);
        b.psi1.a(i, j) = v(0);
        b.psi2.a(i, j) = v(1);
      }
      if (seam) {
        Vec2 v0 = cell_x_dir(v, 0, j, -1);
        double sc = std::max(1e-300, col[static_cast<size_t>(j)].norm());
        *seam = std::max(*seam, (v0 - col[static_cast<size_t>(j)]).norm() / sc);
      }
      b.psi1.a(0, j) = col[static_cast<size_t>(j)](0);
      b.psi2.a(0, j) = col[static_cast<size_t>(j)](1);
    }
  }
  if (g.periodic_y) {
    // per-column wrap values at y0 + Ly
    b.wrap_y.assign(static_cast<size_t>(g.nx), Vec2::Zero());
    for (int i = 0; i < g.nx; ++i) {
      Vec2 top(b.psi1.a(i, g.ny - 1), b.psi2.a(i, g.ny - 1));
      if (!down)
        b.wrap_y[static_cast<size_t>(i)] = cell_y_dir(top, i, g.ny - 1, +1);
      else
        b.wrap_y[static_cast<size_t>(i)] = mu2 * Vec2(b.psi1.a(i, 0), b.psi2.a(i, 0));
    }
  }
  return b;
}

}  // namespace

BAPair solve_psi_pair(const SolutionPtr& sol, Complex lambda, int substeps) {
  const Grid& g = sol->grid;
  substeps = std::max(substeps, auto_substeps(sol, lambda));
  if (!g.periodic_x && !g.periodic_y)
    fail(Errc::NoPeriod, "solve_psi_pair: needs a periodic axis for the eigen-branches");
  if (!g.periodic_x || !sol->x_only()) {
    // generic fallback through the fundamental field
    PsiField pf = integrate_psi_fundamental(sol, lambda, substeps);
    const Mat2& t = pf.has_t1 ? pf.T1 : pf.T2;
    check_not_degenerate(t);
    Complex mu = label_eigenvalue(t);
    Complex mu_inv = 1.0 / mu;  // Wronskian = 1
    BAPair pair{slice_solution(pf, normalize_seed(robust_eigenvector(t, mu))),
                slice_solution(pf, normalize_seed(robust_eigenvector(t, mu_inv)))};
    attach_multipliers(pair.psi, pf);
    attach_multipliers(pair.partner, pf);
    return pair;
  }

  CoeffProvider cp = provider_from_solution(sol, lambda);
  MonodromyPair mp = psi_monodromies(sol, lambda, substeps);
  check_not_degenerate(mp.T1);
  Complex mu_big = label_eigenvalue(mp.T1);
  Complex mu_small = 1.0 / mu_big;  // Wronskian = 1
  Vec2 c_big = normalize_seed(robust_eigenvector(mp.T1, mu_big));
  Vec2 c_small = normalize_seed(robust_eigenvector(mp.T1, mu_small));
  auto rayleigh2 = [&](const Vec2& c) {
    if (!mp.has_t2) return Complex(1, 0);
    return matched_eigenvalue(mp.T2, c);
  };
  BAPair pair;
  double seam = 0.0;
  pair.psi = assemble_branch(sol, lambda, substeps, cp, c_big, mu_big, rayleigh2(c_big), &seam);
  pair.partner =
      assemble_branch(sol, lambda, substeps, cp, c_small, mu_small, rayleigh2(c_small), &seam);
  pair.seam_defect = seam;
  return pair;
}

DualBAFunction dual_from_sigma_star(const BAFunction& psi_partner) {
  DualBAFunction d;
  d.grid = psi_partner.grid;
  d.lambda = psi_partner.lambda;
  // (phi1, phi2) = J (psi1, psi2) = (psi2, -psi1)
  d.phi1 = psi_partner.psi2;
  d.phi2 = Complex(-1, 0) * psi_partner.psi1;
  d.mu1 = psi_partner.mu1;
  d.mu2 = psi_partner.mu2;
  d.has_mu1 = psi_partner.has_mu1;
  d.has_mu2 = psi_partner.has_mu2;
  return d;
}

double psi_system_residual(const BAFunction& psi, const SolutionPtr& sol) {
  ScalarField p1 = drop_periodicity(psi.psi1), p2 = drop_periodicity(psi.psi2);
  ScalarField d1 = dz(p1), d2 = dz(p2), b1 = dzbar(p1), b2 = dzbar(p2);
  const Complex lam = psi.lambda;
  Eigen::ArrayXXcd uz = sol->u_z.a, uzb = sol->u_zbar.a;
  Eigen::ArrayXXcd eu = sol->u.a.real().exp().cast<Complex>();
  Eigen::ArrayXXcd emu = (-sol->u.a.real()).exp().cast<Complex>();
  Complex ih(0, 0.5);
  ScalarField r1{p1.grid, d1.a - (0.5 * uz * p1.a + ih * emu * p2.a)};
  ScalarField r2{p1.grid, d2.a - (ih / lam * eu * p1.a - 0.5 * uz * p2.a)};
  ScalarField r3{p1.grid, b1.a - (-0.5 * uzb * p1.a + ih * lam * eu * p2.a)};
  ScalarField r4{p1.grid, b2.a - (ih * emu * p1.a + 0.5 * uzb * p2.a)};
  double scale = std::max({max_abs(psi.psi1), max_abs(psi.psi2), 1e-300});
  return std::max({max_abs_interior(r1, 4), max_abs_interior(r2, 4), max_abs_interior(r3, 4),
                   max_abs_interior(r4, 4)}) /
         scale;
}

double phi_system_residual(const DualBAFunction& phi, const SolutionPtr& sol) {
  ScalarField p1 = drop_periodicity(phi.phi1), p2 = drop_periodicity(phi.phi2);
  ScalarField d1 = dz(p1), d2 = dz(p2), b1 = dzbar(p1), b2 = dzbar(p2);
  const Complex lam = phi.lambda;
  Eigen::ArrayXXcd uz = sol->u_z.a, uzb = sol->u_zbar.a;
  Eigen::ArrayXXcd eu = sol->u.a.real().exp().cast<Complex>();
  Eigen::ArrayXXcd emu = (-sol->u.a.real()).exp().cast<Complex>();
  Complex ih(0, 0.5);
  ScalarField r1{p1.grid, d1.a + (0.5 * uz * p1.a + ih / lam * eu * p2.a)};
  ScalarField r2{p1.grid, d2.a + (ih * emu * p1.a - 0.5 * uz * p2.a)};
  ScalarField r3{p1.grid, b1.a + (-0.5 * uzb * p1.a + ih * emu * p2.a)};
  ScalarField r4{p1.grid, b2.a + (ih * lam * eu * p1.a + 0.5 * uzb * p2.a)};
  double scale = std::max({max_abs(phi.phi1), max_abs(phi.phi2), 1e-300});
  return std::max({max_abs_interior(r1, 4), max_abs_interior(r2, 4), max_abs_interior(r3, 4),
                   max_abs_interior(r4, 4)}) /
         scale;
}

EigenProducts eigen_products(const BAFunction& psi, const DualBAFunction& phi) {
  if (std::abs(psi.lambda - phi.lambda) > 0.0)
    fail(Errc::InconsistentLambda, "eigen_products: psi and phi at different lambda");
  EigenProducts pr;
  pr.grid = psi.grid;
  pr.lambda = psi.lambda;
  pr.xi11 = psi.psi1 * phi.phi1;
  pr.xi12 = psi.psi1 * phi.phi2;
  pr.xi21 = psi.psi2 * phi.phi1;
  pr.xi22 = psi.psi2 * phi.phi2;
  pr.yfield = pr.xi11 + pr.xi22;
  pr.y = mean(pr.yfield);
  pr.y_spread = max_abs(pr.yfield - ScalarField(pr.grid, Eigen::ArrayXXcd::Constant(
                                                              pr.grid.nx, pr.grid.ny, pr.y)));
  if (psi.has_mu1) {
    pr.mu_psi = psi.mu1;
    pr.mu_phi = phi.mu1;
  } else if (psi.has_mu2) {
    pr.mu_psi = psi.mu2;
    pr.mu_phi = phi.mu2;
  }
  return pr;
}

Mat2Field p_matrix(const EigenProducts& pr) {
  Mat2Field p(pr.grid);
  p.e[0] = pr.xi11.a / pr.yfield.a;
  p.e[1] = pr.xi12.a / pr.yfield.a;
  p.e[2] = pr.xi21.a / pr.yfield.a;
  p.e[3] = pr.xi22.a / pr.yfield.a;
  return p;
}

ProjectorReport projector_defects(const EigenProducts& pr) {
  Mat2Field p = p_matrix(pr);
  Mat2Field p2 = matmul(p, p);
  ScalarField tr{pr.grid, p.e[0] + p.e[3] - 1.0};
  return {max_abs(p2 - p), max_abs(tr)};
}

ResidueFit p_matrix_and_residues(const std::vector<EigenProducts>& near_zero,
                                 const std::vector<EigenProducts>& near_infinity) {
  if (near_zero.empty()) fail(Errc::InsufficientSamples, "p_matrix_and_residues: no samples");
  auto trace_field = [](const EigenProducts& pr) {
    return ScalarField{pr.grid, (pr.xi11.a - pr.xi22.a) / pr.yfield.a};
  };
  ResidueFit out;
  {
    std::vector<Complex> lams;
    std::vector<ScalarField> tr;
    for (const auto& pr : near_zero) {
      lams.push_back(pr.lambda);
      tr.push_back(trace_field(pr));
    }
    PuiseuxBasis basis = make_puiseux_basis(lams, {1, 3, 5});
    auto coef = fit_fields(basis, tr);
    out.cond0 = basis.cond;
    // tr(diag(1,-1) P) = -2i dz u lambda^{1/2} + O(lambda^{3/2})
    out.du = ScalarField{coef[0].grid, Complex(0, 0.5) * coef[0].a};
  }
  if (!near_infinity.empty()) {
    std::vector<Complex> lams;
    std::vector<ScalarField> tr;
    for (const auto& pr : near_infinity) {
      lams.push_back(pr.lambda);
      tr.push_back(trace_field(pr));
    }
    PuiseuxBasis basis = make_puiseux_basis(lams, {-1, -3, -5});
    auto coef = fit_fields(basis, tr);
    out.cond_inf = basis.cond;
    out.dubar = ScalarField{coef[0].grid, Complex(0, 0.5) * coef[0].a};
    out.has_dubar = true;
  }
  return out;
}

GaugedPsi gauge_tilde(const BAFunction& psi, const SolutionPtr& sol) {
  Complex rootl = sqrt_lambda(psi.lambda);
  GaugedPsi gp;
  gp.grid = psi.grid;
  gp.lambda = psi.lambda;
  Eigen::ArrayXXcd ehu = (0.5 * sol->u.a.real()).exp().cast<Complex>();
  gp.t1 = ScalarField{psi.grid, psi.psi1.a * ehu / rootl};
  gp.t2 = ScalarField{psi.grid, psi.psi2.a / ehu};

  ScalarField w1 = drop_periodicity(gp.t1), w2 = drop_periodicity(gp.t2);
  ScalarField d1 = dz(w1), d2 = dz(w2), b1 = dzbar(w1), b2 = dzbar(w2);
  Eigen::ArrayXXcd uz = sol->u_z.a;
  Eigen::ArrayXXcd e2u = (2.0 * sol->u.a.real()).exp().cast<Complex>();
  Complex ih(0, 0.5);
  ScalarField r1{w1.grid, d1.a - (uz * w1.a + ih / rootl * w2.a)};
  ScalarField r2{w1.grid, d2.a - (ih / rootl * w1.a - uz * w2.a)};
  ScalarField r3{w1.grid, b1.a - (ih * rootl * e2u * w2.a)};
  ScalarField r4{w1.grid, b2.a - (ih * rootl / e2u * w1.a)};
  double scale = std::max({max_abs(gp.t1), max_abs(gp.t2), 1e-300});
  gp.system_residual = std::max({max_abs_interior(r1, 4), max_abs_interior(r2, 4),
                                 max_abs_interior(r3, 4), max_abs_interior(r4, 4)}) /
                       scale;
  return gp;
}

FermiReport fermi_kernel_check(const BAFunction& psi, const SolutionPtr& sol) {
  ScalarField g = drop_periodicity(psi.psi1 * psi.psi2);
  ScalarField lap = dzbar(dz(g));
  ScalarField r{g.grid, lap.a + (2.0 * sol->u.a.real()).cosh() * g.a};
  double scale = std::max(max_abs(g), 1e-300);
  FermiReport rep{max_abs_interior(r, 4) / scale, 0.0};

  double defect = 0.0;
  if (!psi.wrap_x.empty() && psi.has_mu1) {
    Complex musq = psi.mu1 * psi.mu1;
    for (int j = 0; j < psi.grid.ny; ++j) {
      Complex base = psi.psi1.a(0, j) * psi.psi2.a(0, j);
      Complex wrap = psi.wrap_x[static_cast<size_t>(j)](0) * psi.wrap_x[static_cast<size_t>(j)](1);
      defect = std::max(defect, std::abs(wrap / (base * musq) - 1.0));
    }
  }
  if (!psi.wrap_y.empty() && psi.has_mu2) {
    Complex musq = psi.mu2 * psi.mu2;
    for (int i = 0; i < psi.grid.nx; ++i) {
      Complex base = psi.psi1.a(i, 0) * psi.psi2.a(i, 0);
      Complex wrap = psi.wrap_y[static_cast<size_t>(i)](0) * psi.wrap_y[static_cast<size_t>(i)](1);
      defect = std::max(defect, std::abs(wrap / (base * musq) - 1.0));
    }
  }
  rep.multiplier_sq_defect = defect;
  return rep;
}

}  // namespace cmcforge
