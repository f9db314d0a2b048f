// Solutions u of  dz dzbar u + sinh(2u)/2 = 0  on a grid: the vacuum u = 0
// and one-dimensional u(x) from the pendulum reduction u'' + 2 sinh(2u) = 0.
#pragma once

#include <memory>
#include <vector>

#include "cmcforge/grid.hpp"

namespace cmcforge {

struct SinhGordonSolution {
  enum class Kind { Vacuum, OneDimensional, Sampled };

  Grid grid;
  Kind kind = Kind::Vacuum;
  ScalarField u, u_z, u_zbar;
  double residual_max = 0.0;

  // One-dimensional payload.
  double u0 = 0.0, du0 = 0.0;
  double energy = 1.0;        // E = du^2/2 + cosh(2u)
  double period = 0.0;        // orbit period in x (0 for vacuum)
  double energy_drift = 0.0;  // measured relative drift of E over the table
  int fine_per_cell = 0;
  std::vector<double> fine_u, fine_du;  // samples on [x0, x0 + Lx], step hx/fine_per_cell

  bool x_only() const { return kind != Kind::Sampled; }

  // Off-grid samplers, exact on the fine lattice, cubic in between; only for
  // x_only solutions.
  double u_at(double x) const;
  double du_at(double x) const;   // du/dx
  // x-jets d^k u / dx^k for k = 0..5 from the pendulum equation.
  std::array<double, 6> x_jets(double x) const;
};

using SolutionPtr = std::shared_ptr<const SinhGordonSolution>;

// Pendulum energy E(u, u') = u'^2/2 + cosh(2u).
inline double pendulum_energy(double u, double du) { return 0.5 * du * du + std::cosh(2.0 * u); }

// Orbit period of u'' = -2 sinh(2u) through (u0, du0); bisection refinement of
// the turning-point return map to 1e-12. The fixed point (0,0) has period 0.
double pendulum_period(double u0, double du0);

SolutionPtr vacuum(const Grid& grid);

// Errors: NotPeriodicOnGrid when the x-axis is periodic but Lx is not an
// integer number of orbit periods within 1e-8 (payload carries the period).
SolutionPtr one_dimensional(const Grid& grid, double u0, double du0);

// Wrap arbitrary samples (e.g. a deliberate non-solution); residual reported
// honestly, off-grid sampling unavailable.
SolutionPtr from_samples(const Grid& grid, const Eigen::ArrayXXcd& u);

// dz dzbar u + sinh(2u)/2, with the module stencils.
ScalarField residual_field(const SinhGordonSolution& sol);

}  // namespace cmcforge
