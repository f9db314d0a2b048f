// Complex 2x2 matrices, su(2) predicates, the bilinear pairing, and
// matrix Laurent polynomials in the spectral parameter lambda.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cmcforge/errors.hpp"

namespace cmcforge {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline Mat2 mat2(Complex a, Complex b, Complex c, Complex d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

// upsilon = [[0,1],[0,0]], the normalized leading coefficient of Lambda_g loops.
inline Mat2 upsilon() { return mat2(0, 1, 0, 0); }

// J = [[0,1],[-1,0]]; J^2 = -1. Maps a solution of the psi system to a
// solution of the dual system.
inline Mat2 sympl_j() { return mat2(0, 1, -1, 0); }

// Fixed su(2) direction with <eps,eps> = 1 under the pairing below. Diagonal,
// so its stabilizer is the diagonal torus.
inline Mat2 epsilon_su2() { return mat2(Complex(0, 1), 0, 0, Complex(0, -1)); }

// Bilinear extension of the round inner product of S^3 = SU(2) to all complex
// 2x2 matrices: the polarization of det,
//   <a,b> = (tr a tr b - tr(ab)) / 2,
// which restricts to -tr(ab)/2 on sl(2,C). Normalized so that <1,1> = 1 and
// <eps,eps> = 1; it reproduces v^2 = 4 e^{2u} Q Qbar for the Sym immersion.
inline Complex pairing(const Mat2& a, const Mat2& b) {
  return 0.5 * (a.trace() * b.trace() - (a * b).trace());
}

double max_abs(const Mat2& m);

bool is_su2(const Mat2& m, double tol = 1e-12);
bool is_su2_algebra(const Mat2& m, double tol = 1e-12);

// exp(m) for traceless m via cosh/sinh closed form.
Mat2 exp_traceless(const Mat2& m);

// Principal branch, cut along (-inf, 0]; Re >= 0. Errors: OnBranchCut.
Complex sqrt_lambda(Complex lambda);

// lambda^{p/2} for integer p, via the principal sqrt_lambda branch.
Complex half_power(Complex lambda, int p);

// Matrix-valued Laurent polynomial sum_{j=jmin}^{jmax} c_j lambda^j.
struct LoopMatrix {
  int jmin = 0;
  std::vector<Mat2> c;  // c[k] is the coefficient of lambda^{jmin+k}

  int jmax() const { return jmin + static_cast<int>(c.size()) - 1; }
  const Mat2& coeff(int j) const { return c[static_cast<size_t>(j - jmin)]; }
  Mat2& coeff(int j) { return c[static_cast<size_t>(j - jmin)]; }
  bool has(int j) const { return j >= jmin && j <= jmax(); }

  // Horner evaluation. Errors: LambdaZero when jmin < 0 and lambda = 0.
  Mat2 eval(Complex lambda) const;

  LoopMatrix& operator+=(const LoopMatrix& o);
  LoopMatrix& operator*=(Complex s);
};

LoopMatrix operator+(LoopMatrix a, const LoopMatrix& b);
LoopMatrix operator*(Complex s, LoopMatrix a);

// Reality condition of Lambda_g: lambda^{g-1} conj(xi(1/conj(lambda)))^T = -xi(lambda),
// i.e. coefficientwise c_j = -conj(c_{g-1-j})^T. Returns the max coefficient
// defect.
double reality_defect(const LoopMatrix& xi, int g);
bool satisfies_reality(const LoopMatrix& xi, int g, double tol = 1e-12);

// Reality involution R(xi)_j = -conj(xi_{g-1-j})^T. R is an antilinear
// involution; fixed points satisfy the reality condition.
LoopMatrix reality_involution(const LoopMatrix& xi, int g);

// The shift exponent l with lambda^{-l} xi su(2)-valued on the circle.
// l = (g-1)/2; half-integer for even g, handled through half_power.
inline double l_exponent(int g) { return 0.5 * (g - 1); }

// lambda^{-l} xi(lambda) for |lambda| = 1, principal sheet. For even g the
// half-integer power carries a global sheet sign that is_su2_algebra does not
// see. Errors: OnBranchCut (lambda on the cut with even g), LambdaZero.
Mat2 eval_shifted(const LoopMatrix& xi, int g, Complex lambda);

}  // namespace cmcforge
