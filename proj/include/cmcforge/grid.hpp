// Rectangular z-grids, complex scalar fields, 4th-order Wirtinger stencils,
// matrix-valued fields, and small DFT helpers used by the Poincare solver.
#pragma once

#include <array>

#include "cmcforge/algebra.hpp"

namespace cmcforge {

struct Grid {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  Complex origin{0.0, 0.0};
  bool periodic_x = false, periodic_y = false;

  double Lx() const { return nx * hx; }
  double Ly() const { return ny * hy; }
  Complex gamma1() const { return Complex(Lx(), 0.0); }
  Complex gamma2() const { return Complex(0.0, Ly()); }
  double x(int i) const { return origin.real() + i * hx; }
  double y(int j) const { return origin.imag() + j * hy; }
  Complex z(int i, int j) const { return Complex(x(i), y(j)); }

  // Validates nx, ny >= 8 and positive spacings. Errors: GridTooSmall.
  static Grid make(int nx, int ny, double hx, double hy, Complex origin = Complex(0, 0),
                   bool periodic_x = false, bool periodic_y = false);
  static Grid make_extent(int nx, int ny, double lx, double ly, Complex origin = Complex(0, 0),
                          bool periodic_x = false, bool periodic_y = false) {
    return make(nx, ny, lx / nx, ly / ny, origin, periodic_x, periodic_y);
  }
};

struct ScalarField {
  Grid grid;
  Eigen::ArrayXXcd a;  // (nx, ny), a(i, j) = value at z(i, j)

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(g), a(Eigen::ArrayXXcd::Zero(g.nx, g.ny)) {}
  ScalarField(const Grid& g, Eigen::ArrayXXcd v) : grid(g), a(std::move(v)) {}

  Complex at(int i, int j) const { return a(i, j); }
};

// x/y derivatives of a raw array on a grid; 4th-order central on periodic
// axes, 4th-order one-sided at non-periodic edges. Needs >= 5 points.
Eigen::ArrayXXcd ddx_arr(const Grid& g, const Eigen::ArrayXXcd& f);
Eigen::ArrayXXcd ddy_arr(const Grid& g, const Eigen::ArrayXXcd& f);

ScalarField ddx(const ScalarField& f);
ScalarField ddy(const ScalarField& f);
ScalarField dz(const ScalarField& f);      // (d/dx - i d/dy)/2
ScalarField dzbar(const ScalarField& f);   // (d/dx + i d/dy)/2
ScalarField dz_pow(const ScalarField& f, int order);  // repeated dz

ScalarField conj(const ScalarField& f);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(Complex s, const ScalarField& a);

Complex mean(const ScalarField& f);
double max_abs(const ScalarField& f);
// Max over points at least `margin` cells away from every non-periodic edge.
double max_abs_interior(const ScalarField& f, int margin);
bool has_nan(const ScalarField& f);

// Torus average <f>: mean of samples; exact composite trapezoid on a
// periodic grid.
inline Complex torus_average(const ScalarField& f) { return mean(f); }

struct Mat2Field {
  Grid grid;
  std::array<Eigen::ArrayXXcd, 4> e;  // row-major entries: e[2*r + c]

  Mat2Field() = default;
  explicit Mat2Field(const Grid& g) : grid(g) {
    for (auto& x : e) x = Eigen::ArrayXXcd::Zero(g.nx, g.ny);
  }

  Mat2 at(int i, int j) const {
    return mat2(e[0](i, j), e[1](i, j), e[2](i, j), e[3](i, j));
  }
  void set(int i, int j, const Mat2& m) {
    e[0](i, j) = m(0, 0);
    e[1](i, j) = m(0, 1);
    e[2](i, j) = m(1, 0);
    e[3](i, j) = m(1, 1);
  }
};

Mat2Field dz(const Mat2Field& f);
Mat2Field dzbar(const Mat2Field& f);
Mat2Field operator+(const Mat2Field& a, const Mat2Field& b);
Mat2Field operator-(const Mat2Field& a, const Mat2Field& b);
Mat2Field operator*(Complex s, const Mat2Field& a);
// Pointwise matrix product and commutator.
Mat2Field matmul(const Mat2Field& a, const Mat2Field& b);
Mat2Field commutator(const Mat2Field& a, const Mat2Field& b);
double max_abs(const Mat2Field& f);
double max_abs_interior(const Mat2Field& f, int margin);

// Solve grad tau = (dz tau, dzbar tau) = (gz, gzb) in the least-squares sense.
// Doubly periodic grids use an exact DFT mode solve; otherwise a 4th-order
// marching quadrature along the base column and rows. The constant is fixed
// by tau(z0) = 0.
ScalarField integrate_gradient(const ScalarField& gz, const ScalarField& gzb);

// Cumulative path integral along x of a sampled integrand (local cubic rule,
// O(h^4)); out[0] = 0.
std::vector<Complex> cumulative_integral(const std::vector<Complex>& f, double h);

// Cubic interpolation of a field at fractional index s along one axis
// (axis 0: vary i with j = fixed; axis 1: vary j with i = fixed).
Complex interp_axis(const Grid& g, const Eigen::ArrayXXcd& a, int axis, int fixed, double s);

}  // namespace cmcforge
