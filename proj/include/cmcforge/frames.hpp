// Flat connection alpha_lambda from u, extended frames dF = F alpha with
// monodromies, the Sym immersion into SU(2) and its geometric residuals.
#pragma once

#include "cmcforge/sinh_gordon.hpp"

namespace cmcforge {

// alpha(d/dx), alpha(d/dy) assembled from pointwise data; complex e^{u} is
// allowed (linearization studies deform u off the real line).
Mat2 alpha_x_coeff(Complex uz, Complex uzbar, Complex eu, Complex emu, Complex lam);
Mat2 alpha_y_coeff(Complex uz, Complex uzbar, Complex eu, Complex emu, Complex lam);

struct ConnectionForm {
  Grid grid;
  SolutionPtr sol;
  ScalarField eu, emu;  // e^{u}, e^{-u} on the grid
  double flatness_report = 0.0;  // max Maurer-Cartan residual over 3 sample lambdas
  bool residual_warning = false;

  // alpha(d/dx) and alpha(d/dy) at a grid point.
  Mat2 A(int i, int j, Complex lam) const;
  Mat2 B(int i, int j, Complex lam) const;
  // Off-grid evaluation; exact for x-only solutions.
  Mat2 A_at(double x, double y, Complex lam) const;
  Mat2 B_at(double x, double y, Complex lam) const;
  bool exact_off_grid() const { return sol->x_only(); }
};

ConnectionForm build_alpha(const SolutionPtr& sol);

// 2 d(alpha) + [alpha ^ alpha] evaluated on (d/dx, d/dy), as a matrix field.
Mat2Field mc_residual(const ConnectionForm& cf, Complex lambda);
// The three lambda-coefficients of the Maurer-Cartan residual, recovered from
// 3 sampled lambdas; they vanish separately iff u solves sinh-Gordon.
std::array<Mat2Field, 3> mc_residual_coeffs(const ConnectionForm& cf);

struct ExtendedFrame {
  Grid grid;
  Complex lambda{1.0, 0.0};
  Mat2Field F;                // F(z), F(z0) = 1
  std::vector<Mat2> wrap_x;   // F(x0 + Lx, y_j) per row, when periodic_x
  std::vector<Mat2> wrap_y;   // F(x_i, y0 + Ly) per column, when periodic_y
  Mat2 M1 = Mat2::Identity(), M2 = Mat2::Identity();
  bool has_m1 = false, has_m2 = false;
  Complex mu{1.0, 0.0};       // labeled eigenvalue of the primary monodromy
  double det_drift = 0.0, unit_drift = 0.0, max_renorm = 0.0;
};

// Deterministic eigenvalue labeling: |mu| >= 1, ties broken by
// Im log mu in [0, pi).
Complex label_eigenvalue(const Mat2& m);

// RK4 along the base column then along rows (or transposed when rows_first);
// SU(2)/det drift is renormalized every 16 steps. Errors: LambdaZero,
// NonConvergent.
ExtendedFrame integrate_frame(const ConnectionForm& cf, Complex lambda, int substeps = 2,
                              bool rows_first = false);

struct Immersion {
  Grid grid;
  Mat2Field f, N;
  double H = 0.0;
  Complex Q{0.0, 0.0};
  ScalarField v2;
  Complex lambda0, lambda1;
  SolutionPtr sol;

  double useful_identity_defect() const;  // |4 Q Qbar (H^2+1) - 1|
};

// f = F_{lambda1} F_{lambda0}^{-1}, H = i(l0+l1)/(l0-l1), Q = i(1/l1-1/l0)/4,
// v^2 = e^{2u}/(H^2+1), N = F_{lambda1} eps F_{lambda0}^{-1}.
// Errors: SymPointsEqual, SymPointsOffCircle.
Immersion sym_bobenko(const ExtendedFrame& f0, const ExtendedFrame& f1, const SolutionPtr& sol);

struct FrenetReport {
  double normal_eq;   // dz N - (-H dz f + 2 v^{-2} Q dzbar f)
  double second_eq;   // dz dz f - (2 u_z dz f - Q N)
  double laplace_eq;  // 2 dzbar dz f - (-v^2 f + v^2 H N)
};
FrenetReport frenet_residuals(const Immersion& imm);

// max |2 d*omega - H [omega ^ omega]| with omega = f^{-1} df; H_used defaults
// to the immersion's H (pass something else as a negative control).
double mean_curvature_relation_check(const Immersion& imm, double h_used);
inline double mean_curvature_relation_check(const Immersion& imm) {
  return mean_curvature_relation_check(imm, imm.H);
}

// Path-independence defect: frames integrated column-first vs row-first.
double path_independence_defect(const ConnectionForm& cf, Complex lambda, int substeps = 2);

Mat2Field ddx(const Mat2Field& f);
Mat2Field ddy(const Mat2Field& f);
Mat2Field mulscalar(const ScalarField& s, const Mat2Field& f);
Mat2Field inverse_field(const Mat2Field& f);  // pointwise 2x2 inverse

}  // namespace cmcforge
