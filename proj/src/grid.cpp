#include "cmcforge/grid.hpp"

#include <cmath>

namespace cmcforge {

Grid Grid::make(int nx, int ny, double hx, double hy, Complex origin, bool periodic_x,
                bool periodic_y) {
  if (nx < 8 || ny < 8) fail(Errc::GridTooSmall, "Grid::make: need nx, ny >= 8");
  if (!(hx > 0.0) || !(hy > 0.0)) fail(Errc::GridTooSmall, "Grid::make: need positive spacings");
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = hx;
  g.hy = hy;
  g.origin = origin;
  g.periodic_x = periodic_x;
  g.periodic_y = periodic_y;
  return g;
}

namespace {

// 4th-order first derivative along one axis of length n; periodic wrap or
// one-sided closure at the edges.
template <class Get, class Set>
void d1_line(int n, double h, bool periodic, Get f, Set out) {
  const double s = 1.0 / (12.0 * h);
  if (periodic) {
    for (int i = 0; i < n; ++i) {
      auto wrap = [n](int k) { return ((k % n) + n) % n; };
      out(i, s * (f(wrap(i - 2)) - 8.0 * f(wrap(i - 1)) + 8.0 * f(wrap(i + 1)) - f(wrap(i + 2))));
    }
    return;
  }
  if (n < 5) fail(Errc::GridTooSmall, "derivative stencil needs >= 5 points per axis");
  out(0, s * (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)));
  out(1, s * (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)));
  for (int i = 2; i < n - 2; ++i)
    out(i, s * (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)));
  out(n - 2, s * (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)));
  out(n - 1,
      s * (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)));
}

}  // namespace

Eigen::ArrayXXcd ddx_arr(const Grid& g, const Eigen::ArrayXXcd& f) {
  Eigen::ArrayXXcd out(f.rows(), f.cols());
  for (int j = 0; j < f.cols(); ++j)
    d1_line(
        static_cast<int>(f.rows()), g.hx, g.periodic_x, [&](int i) { return f(i, j); },
        [&](int i, Complex v) { out(i, j) = v; });
  return out;
}

Eigen::ArrayXXcd ddy_arr(const Grid& g, const Eigen::ArrayXXcd& f) {
  Eigen::ArrayXXcd out(f.rows(), f.cols());
  for (int i = 0; i < f.rows(); ++i)
    d1_line(
        static_cast<int>(f.cols()), g.hy, g.periodic_y, [&](int j) { return f(i, j); },
        [&](int j, Complex v) { out(i, j) = v; });
  return out;
}

ScalarField ddx(const ScalarField& f) { return {f.grid, ddx_arr(f.grid, f.a)}; }
ScalarField ddy(const ScalarField& f) { return {f.grid, ddy_arr(f.grid, f.a)}; }

ScalarField dz(const ScalarField& f) {
  return {f.grid, 0.5 * (ddx_arr(f.grid, f.a) - Complex(0, 1) * ddy_arr(f.grid, f.a))};
}

ScalarField dzbar(const ScalarField& f) {
  return {f.grid, 0.5 * (ddx_arr(f.grid, f.a) + Complex(0, 1) * ddy_arr(f.grid, f.a))};
}

ScalarField dz_pow(const ScalarField& f, int order) {
  ScalarField g = f;
  for (int k = 0; k < order; ++k) g = dz(g);
  return g;
}

ScalarField conj(const ScalarField& f) { return {f.grid, f.a.conjugate()}; }
ScalarField operator+(const ScalarField& a, const ScalarField& b) { return {a.grid, a.a + b.a}; }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return {a.grid, a.a - b.a}; }
ScalarField operator*(const ScalarField& a, const ScalarField& b) { return {a.grid, a.a * b.a}; }
ScalarField operator*(Complex s, const ScalarField& a) { return {a.grid, s * a.a}; }

Complex mean(const ScalarField& f) { return f.a.mean(); }
double max_abs(const ScalarField& f) { return f.a.abs().maxCoeff(); }

double max_abs_interior(const ScalarField& f, int margin) {
  const Grid& g = f.grid;
  int i0 = g.periodic_x ? 0 : margin, i1 = g.periodic_x ? g.nx : g.nx - margin;
  int j0 = g.periodic_y ? 0 : margin, j1 = g.periodic_y ? g.ny : g.ny - margin;
  double worst = 0.0;
  for (int i = i0; i < i1; ++i)
    for (int j = j0; j < j1; ++j) worst = std::max(worst, std::abs(f.a(i, j)));
  return worst;
}

bool has_nan(const ScalarField& f) { return !((f.a == f.a).all()); }

Mat2Field dz(const Mat2Field& f) {
  Mat2Field out;
  out.grid = f.grid;
  for (int k = 0; k < 4; ++k)
    out.e[k] = 0.5 * (ddx_arr(f.grid, f.e[k]) - Complex(0, 1) * ddy_arr(f.grid, f.e[k]));
  return out;
}

Mat2Field dzbar(const Mat2Field& f) {
  Mat2Field out;
  out.grid = f.grid;
  for (int k = 0; k < 4; ++k)
    out.e[k] = 0.5 * (ddx_arr(f.grid, f.e[k]) + Complex(0, 1) * ddy_arr(f.grid, f.e[k]));
  return out;
}

Mat2Field operator+(const Mat2Field& a, const Mat2Field& b) {
  Mat2Field out = a;
  for (int k = 0; k < 4; ++k) out.e[k] += b.e[k];
  return out;
}

Mat2Field operator-(const Mat2Field& a, const Mat2Field& b) {
  Mat2Field out = a;
  for (int k = 0; k < 4; ++k) out.e[k] -= b.e[k];
  return out;
}

Mat2Field operator*(Complex s, const Mat2Field& a) {
  Mat2Field out = a;
  for (int k = 0; k < 4; ++k) out.e[k] *= s;
  return out;
}

Mat2Field matmul(const Mat2Field& a, const Mat2Field& b) {
  Mat2Field out;
  out.grid = a.grid;
  out.e[0] = a.e[0] * b.e[0] + a.e[1] * b.e[2];
  out.e[1] = a.e[0] * b.e[1] + a.e[1] * b.e[3];
  out.e[2] = a.e[2] * b.e[0] + a.e[3] * b.e[2];
  out.e[3] = a.e[2] * b.e[1] + a.e[3] * b.e[3];
  return out;
}

Mat2Field commutator(const Mat2Field& a, const Mat2Field& b) {
  return matmul(a, b) - matmul(b, a);
}

double max_abs(const Mat2Field& f) {
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, f.e[k].abs().maxCoeff());
  return worst;
}

double max_abs_interior(const Mat2Field& f, int margin) {
  double worst = 0.0;
  for (int k = 0; k < 4; ++k)
    worst = std::max(worst, max_abs_interior(ScalarField{f.grid, f.e[k]}, margin));
  return worst;
}

std::vector<Complex> cumulative_integral(const std::vector<Complex>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<Complex> out(static_cast<size_t>(n), Complex(0, 0));
  if (n < 4) {
    for (int i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
  }
  auto cell = [&](int i) {
    // integral over [x_i, x_{i+1}] of the cubic through points i-1..i+2
    int a = std::max(0, std::min(i - 1, n - 4));
    double t = i - a;  // 0, 1 or 2: offset of the left cell edge in the stencil
    // integrate the Lagrange basis on [t, t+1] (unit spacing)
    auto I = [&](int k) {
      // basis polynomial l_k over nodes {0,1,2,3}; integrate numerically exact
      // via hard-coded antiderivative coefficients
      static const double M[3][4] = {
          {3.0 / 8, 19.0 / 24, -5.0 / 24, 1.0 / 24},    // cell [0,1]
          {-1.0 / 24, 13.0 / 24, 13.0 / 24, -1.0 / 24}, // cell [1,2]
          {1.0 / 24, -5.0 / 24, 19.0 / 24, 3.0 / 8},    // cell [2,3]
      };
      return M[static_cast<int>(t)][k];
    };
    Complex s(0, 0);
    for (int k = 0; k < 4; ++k) s += I(k) * f[static_cast<size_t>(a + k)];
    return h * s;
  };
  for (int i = 1; i < n; ++i) out[static_cast<size_t>(i)] = out[static_cast<size_t>(i - 1)] + cell(i - 1);
  return out;
}

Complex interp_axis(const Grid& g, const Eigen::ArrayXXcd& a, int axis, int fixed, double s) {
  const int n = axis == 0 ? static_cast<int>(a.rows()) : static_cast<int>(a.cols());
  const bool periodic = axis == 0 ? g.periodic_x : g.periodic_y;
  auto get = [&](int k) -> Complex {
    if (periodic) k = ((k % n) + n) % n;
    else k = std::max(0, std::min(k, n - 1));
    return axis == 0 ? a(k, fixed) : a(fixed, k);
  };
  if (periodic) s = s - std::floor(s / n) * n;
  int i = static_cast<int>(std::lround(s));
  if (std::abs(s - i) < 1e-9) return get(i);
  int base = static_cast<int>(std::floor(s)) - 1;
  if (!periodic) base = std::max(0, std::min(base, n - 4));
  double t = s - base;
  double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  double w1 = t * (t - 2) * (t - 3) / 2.0;
  double w2 = -t * (t - 1) * (t - 3) / 2.0;
  double w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * get(base) + w1 * get(base + 1) + w2 * get(base + 2) + w3 * get(base + 3);
}

namespace {

Eigen::MatrixXcd dft_matrix(int n, double sign) {
  Eigen::MatrixXcd w(n, n);
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      w(p, i) = std::exp(Complex(0, sign * 2.0 * M_PI * p * i / n));
  return w;
}

}  // namespace

ScalarField integrate_gradient(const ScalarField& gz, const ScalarField& gzb) {
  const Grid& g = gz.grid;
  if (g.periodic_x && g.periodic_y) {
    const int nx = g.nx, ny = g.ny;
    Eigen::MatrixXcd wx = dft_matrix(nx, -1.0), wy = dft_matrix(ny, -1.0);
    Eigen::MatrixXcd fz = wx * gz.a.matrix() * wy.transpose();
    Eigen::MatrixXcd fzb = wx * gzb.a.matrix() * wy.transpose();
    Eigen::MatrixXcd th = Eigen::MatrixXcd::Zero(nx, ny);
    for (int p = 0; p < nx; ++p) {
      for (int q = 0; q < ny; ++q) {
        if (p == 0 && q == 0) continue;
        double kx = 2.0 * M_PI * (p <= nx / 2 ? p : p - nx) / g.Lx();
        double ky = 2.0 * M_PI * (q <= ny / 2 ? q : q - ny) / g.Ly();
        Complex mz = 0.5 * Complex(0, kx) + 0.5 * ky;   // symbol of dz on e^{i(kx x + ky y)}
        Complex mzb = 0.5 * Complex(0, kx) - 0.5 * ky;  // symbol of dzbar
        double den = std::norm(mz) + std::norm(mzb);
        th(p, q) = (std::conj(mz) * fz(p, q) + std::conj(mzb) * fzb(p, q)) / den;
      }
    }
    Eigen::MatrixXcd ix = dft_matrix(nx, 1.0), iy = dft_matrix(ny, 1.0);
    Eigen::ArrayXXcd tau = (ix * th * iy.transpose()).array() / double(nx * ny);
    tau -= tau(0, 0);
    return {g, tau};
  }

  // Marching quadrature: tau_x = gz + gzb, tau_y = i (gz - gzb); base column
  // first, then each row.
  Eigen::ArrayXXcd tx = gz.a + gzb.a;
  Eigen::ArrayXXcd ty = Complex(0, 1) * (gz.a - gzb.a);
  Eigen::ArrayXXcd tau(g.nx, g.ny);
  std::vector<Complex> col(static_cast<size_t>(g.ny));
  for (int j = 0; j < g.ny; ++j) col[static_cast<size_t>(j)] = ty(0, j);
  auto colint = cumulative_integral(col, g.hy);
  for (int j = 0; j < g.ny; ++j) {
    std::vector<Complex> row(static_cast<size_t>(g.nx));
    for (int i = 0; i < g.nx; ++i) row[static_cast<size_t>(i)] = tx(i, j);
    auto rowint = cumulative_integral(row, g.hx);
    for (int i = 0; i < g.nx; ++i) tau(i, j) = colint[static_cast<size_t>(j)] + rowint[static_cast<size_t>(i)];
  }
  return {g, tau};
}

}  // namespace cmcforge
