#include "cmcforge/sinh_gordon.hpp"

#include <cmath>

namespace cmcforge {

namespace {

struct PendState {
  double u, du;
};

PendState rk4_step(PendState s, double h) {
  auto f = [](PendState p) { return PendState{p.du, -2.0 * std::sinh(2.0 * p.u)}; };
  PendState k1 = f(s);
  PendState k2 = f({s.u + 0.5 * h * k1.u, s.du + 0.5 * h * k1.du});
  PendState k3 = f({s.u + 0.5 * h * k2.u, s.du + 0.5 * h * k2.du});
  PendState k4 = f({s.u + h * k3.u, s.du + h * k3.du});
  return {s.u + h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
          s.du + h / 6.0 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du)};
}

PendState integrate_to(PendState s, double t, int nsteps) {
  double h = t / nsteps;
  for (int i = 0; i < nsteps; ++i) s = rk4_step(s, h);
  return s;
}

}  // namespace

double pendulum_period(double u0, double du0) {
  double e = pendulum_energy(u0, du0);
  if (e <= 1.0 + 1e-15) return 0.0;  // fixed point
  // The potential cosh(2u) is even, so the period is twice the time between
  // consecutive turning points du = 0.
  double umax = 0.5 * std::acosh(e);
  double wscale = 2.0 * std::sqrt(std::max(1.0, std::cosh(2.0 * umax)));  // ~ angular frequency
  double h = 0.5 / wscale * 0.02;
  PendState s{u0, du0};
  double t = 0.0;
  std::vector<double> events;
  double prev_du = s.du;
  double prev_t = t;
  PendState prev = s;
  int guard = 0;
  while (events.size() < 2 && guard++ < 4000000) {
    PendState nxt = rk4_step(s, h);
    t += h;
    if ((prev_du > 0.0) != (nxt.du > 0.0) || nxt.du == 0.0) {
      // bisect on [prev_t, t] for du = 0
      double lo = prev_t, hi = t;
      PendState base = prev;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        PendState m = integrate_to(base, mid - prev_t, 64);
        if ((prev_du > 0.0) != (m.du > 0.0) || m.du == 0.0)
          hi = mid;
        else
          lo = mid;
      }
      events.push_back(0.5 * (lo + hi));
    }
    prev_du = nxt.du;
    prev_t = t;
    prev = s = nxt;
  }
  if (events.size() < 2) fail(Errc::NonConvergent, "pendulum_period: no return detected");
  return 2.0 * (events[1] - events[0]);
}

double SinhGordonSolution::u_at(double xq) const {
  if (kind == Kind::Vacuum) return 0.0;
  if (kind == Kind::Sampled) fail(Errc::NonConvergent, "u_at: sampled solution has no off-grid values");
  double hf = grid.hx / fine_per_cell;
  double s = (xq - grid.origin.real()) / hf;
  double n = static_cast<double>(fine_u.size() - 1);
  if (grid.periodic_x) s = s - std::floor(s / n) * n;
  int i = static_cast<int>(std::lround(s));
  if (std::abs(s - i) < 1e-9 && i >= 0 && i <= static_cast<int>(n))
    return fine_u[static_cast<size_t>(i)];
  // cubic interpolation
  int a = std::max(0, std::min(static_cast<int>(std::floor(s)) - 1, static_cast<int>(n) - 3));
  double t = s - a;
  double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  double w1 = t * (t - 2) * (t - 3) / 2.0;
  double w2 = -t * (t - 1) * (t - 3) / 2.0;
  double w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * fine_u[a] + w1 * fine_u[a + 1] + w2 * fine_u[a + 2] + w3 * fine_u[a + 3];
}

double SinhGordonSolution::du_at(double xq) const {
  if (kind == Kind::Vacuum) return 0.0;
  if (kind == Kind::Sampled) fail(Errc::NonConvergent, "du_at: sampled solution has no off-grid values");
  double hf = grid.hx / fine_per_cell;
  double s = (xq - grid.origin.real()) / hf;
  double n = static_cast<double>(fine_du.size() - 1);
  if (grid.periodic_x) s = s - std::floor(s / n) * n;
  int i = static_cast<int>(std::lround(s));
  if (std::abs(s - i) < 1e-9 && i >= 0 && i <= static_cast<int>(n))
    return fine_du[static_cast<size_t>(i)];
  int a = std::max(0, std::min(static_cast<int>(std::floor(s)) - 1, static_cast<int>(n) - 3));
  double t = s - a;
  double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  double w1 = t * (t - 2) * (t - 3) / 2.0;
  double w2 = -t * (t - 1) * (t - 3) / 2.0;
  double w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * fine_du[a] + w1 * fine_du[a + 1] + w2 * fine_du[a + 2] + w3 * fine_du[a + 3];
}

std::array<double, 6> SinhGordonSolution::x_jets(double x) const {
  double u = u_at(x), u1 = du_at(x);
  double sh = std::sinh(2.0 * u), ch = std::cosh(2.0 * u);
  double u2 = -2.0 * sh;
  double u3 = -4.0 * ch * u1;
  double u4 = -8.0 * sh * u1 * u1 - 4.0 * ch * u2;
  double u5 = -16.0 * ch * u1 * u1 * u1 - 24.0 * sh * u1 * u2 - 4.0 * ch * u3;
  return {u, u1, u2, u3, u4, u5};
}

ScalarField residual_field(const SinhGordonSolution& sol) {
  ScalarField lap = dzbar(dz(sol.u));
  ScalarField out(sol.grid);
  out.a = lap.a + 0.5 * (2.0 * sol.u.a).sinh();
  return out;
}

SolutionPtr vacuum(const Grid& grid) {
  auto sol = std::make_shared<SinhGordonSolution>();
  sol->grid = grid;
  sol->kind = SinhGordonSolution::Kind::Vacuum;
  sol->u = ScalarField(grid);
  sol->u_z = ScalarField(grid);
  sol->u_zbar = ScalarField(grid);
  sol->residual_max = 0.0;
  sol->energy = 1.0;
  return sol;
}

SolutionPtr one_dimensional(const Grid& grid, double u0, double du0) {
  double e = pendulum_energy(u0, du0);
  if (e <= 1.0 + 1e-15) return vacuum(grid);

  double period = pendulum_period(u0, du0);
  if (grid.periodic_x) {
    double k = grid.Lx() / period;
    double kr = std::lround(k);
    if (kr < 1.0 || std::abs(grid.Lx() - kr * period) > 1e-8)
      fail(Errc::NotPeriodicOnGrid,
           "one_dimensional: orbit period " + std::to_string(period) +
               " does not divide the x-extent " + std::to_string(grid.Lx()),
           period);
  }

  auto sol = std::make_shared<SinhGordonSolution>();
  sol->grid = grid;
  sol->kind = SinhGordonSolution::Kind::OneDimensional;
  sol->u0 = u0;
  sol->du0 = du0;
  sol->energy = e;
  sol->period = period;

  // RK4 at substep hx/8, refined until the energy drift over the table is
  // below 1e-10 relative.
  int per_cell = 8;
  for (;; per_cell *= 2) {
    int n = grid.nx * per_cell;
    double h = grid.hx / per_cell;
    std::vector<double> fu(static_cast<size_t>(n + 1)), fdu(static_cast<size_t>(n + 1));
    PendState s{u0, du0};
    double drift = 0.0;
    fu[0] = s.u;
    fdu[0] = s.du;
    for (int i = 1; i <= n; ++i) {
      s = rk4_step(s, h);
      fu[static_cast<size_t>(i)] = s.u;
      fdu[static_cast<size_t>(i)] = s.du;
      drift = std::max(drift, std::abs(pendulum_energy(s.u, s.du) - e) / e);
    }
    if (drift <= 1e-10 || per_cell >= 512) {
      sol->fine_per_cell = per_cell;
      sol->fine_u = std::move(fu);
      sol->fine_du = std::move(fdu);
      sol->energy_drift = drift;
      break;
    }
  }

  ScalarField u(grid), uz(grid);
  for (int i = 0; i < grid.nx; ++i) {
    double uv = sol->fine_u[static_cast<size_t>(i * sol->fine_per_cell)];
    double dv = sol->fine_du[static_cast<size_t>(i * sol->fine_per_cell)];
    for (int j = 0; j < grid.ny; ++j) {
      u.a(i, j) = uv;
      uz.a(i, j) = 0.5 * dv;  // dz u = u'(x)/2 for u = u(x)
    }
  }
  sol->u = u;
  sol->u_z = uz;
  sol->u_zbar = uz;  // real u
  sol->residual_max = max_abs(residual_field(*sol));
  return sol;
}

SolutionPtr from_samples(const Grid& grid, const Eigen::ArrayXXcd& u) {
  auto sol = std::make_shared<SinhGordonSolution>();
  sol->grid = grid;
  sol->kind = SinhGordonSolution::Kind::Sampled;
  sol->u = ScalarField(grid, u);
  sol->u_z = dz(sol->u);
  sol->u_zbar = dzbar(sol->u);
  sol->residual_max = max_abs(residual_field(*sol));
  return sol;
}

}  // namespace cmcforge
