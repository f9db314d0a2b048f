#include "cmcforge/mesh.hpp"

#include <cmath>
#include <fstream>

namespace cmcforge {

R4Field quaternion_coords(const Mat2Field& f) {
  R4Field q;
  q.grid = f.grid;
  Eigen::ArrayXXcd a = 0.5 * (f.e[0] + f.e[3].conjugate());
  Eigen::ArrayXXcd b = 0.5 * (f.e[1] - f.e[2].conjugate());
  q.x0 = a.real();
  q.x1 = a.imag();
  q.x2 = b.real();
  q.x3 = b.imag();
  return q;
}

namespace {

using V4 = Eigen::Vector4d;

V4 at(const R4Field& q, int i, int j) {
  return V4(q.x0(i, j), q.x1(i, j), q.x2(i, j), q.x3(i, j));
}

double det3(const V4& a, const V4& b, const V4& c, int skip) {
  double m[3][3];
  for (int r = 0, cidx = 0; r < 4; ++r) {
    if (r == skip) continue;
    m[0][cidx] = a(r);
    m[1][cidx] = b(r);
    m[2][cidx] = c(r);
    ++cidx;
  }
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// generalized cross product: d orthogonal to a, b, c
V4 cross4(const V4& a, const V4& b, const V4& c) {
  return V4(det3(a, b, c, 0), -det3(a, b, c, 1), det3(a, b, c, 2), -det3(a, b, c, 3));
}

}  // namespace

DiscreteCurvature discrete_mean_curvature(const Mat2Field& f) {
  const Grid& g = f.grid;
  R4Field q = quaternion_coords(f);
  DiscreteCurvature out;
  out.h = Eigen::ArrayXXd::Zero(g.nx, g.ny);

  auto wrap = [](int k, int n) { return ((k % n) + n) % n; };
  double sum = 0.0;
  int count = 0;
  std::vector<std::pair<int, int>> interior;
  int i0 = g.periodic_x ? 0 : 2, i1 = g.periodic_x ? g.nx : g.nx - 2;
  int j0 = g.periodic_y ? 0 : 2, j1 = g.periodic_y ? g.ny : g.ny - 2;
  for (int i = i0; i < i1; ++i)
    for (int j = j0; j < j1; ++j) {
      V4 c = at(q, i, j);
      V4 xp = at(q, wrap(i + 1, g.nx), j), xm = at(q, wrap(i - 1, g.nx), j);
      V4 yp = at(q, i, wrap(j + 1, g.ny)), ym = at(q, i, wrap(j - 1, g.ny));
      V4 fx = (xp - xm) / (2.0 * g.hx);
      V4 fy = (yp - ym) / (2.0 * g.hy);
      V4 lap = (xp - 2.0 * c + xm) / (g.hx * g.hx) + (yp - 2.0 * c + ym) / (g.hy * g.hy);
      V4 n = cross4(c, fy, fx);  // orientation matched to the frame normal
      double nn = n.norm();
      if (nn < 1e-14) continue;
      n /= nn;
      double v2 = 0.5 * (fx.squaredNorm() + fy.squaredNorm());
      double h = lap.dot(n) / (2.0 * v2);
      out.h(i, j) = h;
      sum += h;
      ++count;
      interior.emplace_back(i, j);
    }
  out.h_mean = count ? sum / count : 0.0;
  double dev = 0.0;
  for (auto [i, j] : interior) dev = std::max(dev, std::abs(out.h(i, j) - out.h_mean));
  out.h_max_dev = dev;
  return out;
}

void write_obj(const std::string& path, const Mat2Field& f, const Mat2Field& n) {
  const Grid& g = f.grid;
  R4Field q = quaternion_coords(f);
  R4Field qn = quaternion_coords(n);
  V4 pole = -(at(q, 0, 0) + at(qn, 0, 0)).normalized();

  // orthonormal basis of the pole complement by Gram-Schmidt over the
  // least-aligned coordinate axes
  std::array<int, 4> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(pole(a)) < std::abs(pole(b)); });
  std::array<V4, 3> basis;
  int got = 0;
  for (int k = 0; k < 4 && got < 3; ++k) {
    V4 e = V4::Zero();
    e(order[static_cast<size_t>(k)]) = 1.0;
    e -= e.dot(pole) * pole;
    for (int m = 0; m < got; ++m) e -= e.dot(basis[static_cast<size_t>(m)]) * basis[static_cast<size_t>(m)];
    if (e.norm() < 1e-8) continue;
    basis[static_cast<size_t>(got++)] = e.normalized();
  }

  std::ofstream out(path);
  if (!out.good()) fail(Errc::ConfigInvalid, "write_obj: cannot open " + path);
  out << "# cmc-forge surface mesh, stereographic chart from the antipode of f(z0)\n";
  out.precision(12);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      V4 p = at(q, i, j);
      double den = 1.0 - p.dot(pole);
      double vx = p.dot(basis[0]) / den;
      double vy = p.dot(basis[1]) / den;
      double vz = p.dot(basis[2]) / den;
      if (!std::isfinite(vx) || !std::isfinite(vy) || !std::isfinite(vz))
        fail(Errc::ConfigInvalid, "write_obj: non-finite vertex");
      out << "v " << vx << " " << vy << " " << vz << "\n";
    }
  auto vid = [&](int i, int j) { return 1 + (i % g.nx) + g.nx * (j % g.ny); };
  int imax = g.periodic_x ? g.nx : g.nx - 1;
  int jmax = g.periodic_y ? g.ny : g.ny - 1;
  for (int j = 0; j < jmax; ++j)
    for (int i = 0; i < imax; ++i)
      out << "f " << vid(i, j) << " " << vid(i + 1, j) << " " << vid(i + 1, j + 1) << " "
          << vid(i, j + 1) << "\n";
}

void write_csv(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out.good()) fail(Errc::ConfigInvalid, "write_csv: cannot open " + path);
  out << "x,y,value\n";
  out.precision(12);
  const Grid& g = field.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out << g.x(i) << "," << g.y(j) << "," << std::abs(field.a(i, j)) << "\n";
}

}  // namespace cmcforge
