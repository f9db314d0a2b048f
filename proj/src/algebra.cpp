#include "cmcforge/algebra.hpp"

#include <cmath>

namespace cmcforge {

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

bool is_su2(const Mat2& m, double tol) {
  Mat2 d = m * m.adjoint() - Mat2::Identity();
  return d.cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - Complex(1, 0)) <= tol;
}

bool is_su2_algebra(const Mat2& m, double tol) {
  Mat2 d = m.adjoint() + m;
  return d.cwiseAbs().maxCoeff() <= tol && std::abs(m.trace()) <= tol;
}

Mat2 exp_traceless(const Mat2& m) {
  // m^2 = -det(m) I, so exp(m) = cosh(nu) I + sinh(nu)/nu m with nu^2 = -det m.
  Complex nu2 = -m.determinant();
  Complex nu = std::sqrt(nu2);
  Complex ch, shn;  // cosh(nu), sinh(nu)/nu
  if (std::abs(nu) < 1e-8) {
    ch = 1.0 + nu2 / 2.0 + nu2 * nu2 / 24.0;
    shn = 1.0 + nu2 / 6.0 + nu2 * nu2 / 120.0;
  } else {
    ch = std::cosh(nu);
    shn = std::sinh(nu) / nu;
  }
  return ch * Mat2::Identity() + shn * m;
}

Complex sqrt_lambda(Complex lambda) {
  if (lambda == Complex(0, 0) || (lambda.imag() == 0.0 && lambda.real() <= 0.0))
    fail(Errc::OnBranchCut, "sqrt_lambda: lambda on the cut (-inf, 0]");
  Complex r = std::sqrt(lambda);
  if (r.real() < 0.0) r = -r;
  return r;
}

Complex half_power(Complex lambda, int p) {
  if (p % 2 == 0) return std::pow(lambda, p / 2);
  Complex s = sqrt_lambda(lambda);
  return std::pow(s, p);
}

Mat2 LoopMatrix::eval(Complex lambda) const {
  if (c.empty()) return Mat2::Zero();
  if (lambda == Complex(0, 0)) {
    if (jmin < 0) fail(Errc::LambdaZero, "LoopMatrix::eval at lambda = 0 with a pole");
    if (jmin > 0) return Mat2::Zero();
    return c[0];
  }
  Mat2 acc = c.back();
  for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) acc = c[static_cast<size_t>(k)] + lambda * acc;
  // acc = sum c_k lambda^{k - 0} evaluated from the top; shift by lambda^{jmin}.
  return std::pow(lambda, jmin) * acc;
}

LoopMatrix& LoopMatrix::operator+=(const LoopMatrix& o) {
  int lo = std::min(jmin, o.jmin), hi = std::max(jmax(), o.jmax());
  std::vector<Mat2> out(static_cast<size_t>(hi - lo + 1), Mat2::Zero());
  for (int j = jmin; j <= jmax(); ++j) out[static_cast<size_t>(j - lo)] += coeff(j);
  for (int j = o.jmin; j <= o.jmax(); ++j) out[static_cast<size_t>(j - lo)] += o.coeff(j);
  jmin = lo;
  c = std::move(out);
  return *this;
}

LoopMatrix& LoopMatrix::operator*=(Complex s) {
  for (auto& m : c) m *= s;
  return *this;
}

LoopMatrix operator+(LoopMatrix a, const LoopMatrix& b) {
  a += b;
  return a;
}

LoopMatrix operator*(Complex s, LoopMatrix a) {
  a *= s;
  return a;
}

LoopMatrix reality_involution(const LoopMatrix& xi, int g) {
  LoopMatrix out;
  out.jmin = g - 1 - xi.jmax();
  out.c.assign(xi.c.size(), Mat2::Zero());
  for (int j = out.jmin; j <= out.jmax(); ++j)
    out.coeff(j) = -xi.coeff(g - 1 - j).conjugate().transpose();
  return out;
}

double reality_defect(const LoopMatrix& xi, int g) {
  double worst = 0.0;
  for (int j = xi.jmin; j <= xi.jmax(); ++j) {
    int k = g - 1 - j;
    Mat2 partner = xi.has(k) ? xi.coeff(k) : Mat2::Zero();
    Mat2 d = xi.coeff(j) + partner.conjugate().transpose();
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  return worst;
}

bool satisfies_reality(const LoopMatrix& xi, int g, double tol) {
  return reality_defect(xi, g) <= tol;
}

Mat2 eval_shifted(const LoopMatrix& xi, int g, Complex lambda) {
  Complex shift = half_power(lambda, -(g - 1));
  return shift * xi.eval(lambda);
}

}  // namespace cmcforge
