// Polynomial Killing fields by coefficientwise Lax integration, spectral-curve
// extraction from det xi, monodromy asymptotics dp+-, the variation of the
// Baker-Akhiezer function, and isospectral / non-isospectral deformation
// generators with first-order spectral-motion diagnostics.
#pragma once

#include "cmcforge/frames.hpp"
#include "cmcforge/jacobi.hpp"

namespace cmcforge {

// ---- potentials -----------------------------------------------------------

// genus-1 family (lambda^{-1} + q0) E12 + (-conj(q0) - lambda) E21; branch
// points -conj(q0) and -1/q0.
LoopMatrix potential_g1(Complex q0);
// q0 = -1: commutes with the vacuum connection at every lambda.
LoopMatrix vacuum_potential_g1();
// genus-2 window [-1, 2] built from a free c1 coefficient by the reality
// closure c0 = -conj(c1)^T, c2 = -conj(upsilon)^T.
LoopMatrix potential_g2(const Mat2& c1);

double lambda_g_defect(const LoopMatrix& xi0, int g);  // reality + normalization
bool in_lambda_g(const LoopMatrix& xi0, int g, double tol = 1e-10);

// ---- Lax flow --------------------------------------------------------------

struct PolynomialKillingField {
  Grid grid;
  int genus = 1;
  LoopMatrix xi0;
  std::vector<LoopMatrix> xi;  // index i + nx*j
  double det_spread = 0.0;     // max over 16 circle samples of the z-spread
  double reality_drift = 0.0;
  double trace_drift = 0.0;

  const LoopMatrix& at(int i, int j) const {
    return xi[static_cast<size_t>(i + grid.nx * j)];
  }
};

// RK4 coefficientwise integration of d xi = [xi, alpha]; the out-of-window
// brackets vanish for matched potentials and their drift shows up in the
// reported diagnostics. Errors: BadPotential (validate), LambdaZero.
PolynomialKillingField integrate_killing(const LoopMatrix& xi0, const ConnectionForm& alpha,
                                         int substeps = 2, bool validate = true);

// z-independent field from a bare loop (extraction round-trips, no flow).
PolynomialKillingField constant_killing_field(const Grid& grid, const LoopMatrix& xi0);

// max entry difference against F^{-1} xi0 F at the sampled lambdas.
double conjugation_route_defect(const PolynomialKillingField& pkf, const ConnectionForm& alpha,
                                const std::vector<Complex>& lambdas, int substeps = 4);

// Eigenvector consistency: xi phi = nu phi and psi^t xi = nu psi^t for the
// dual pair at lambda, with nu^2 = -det xi. Returns the worst normalized
// residual.
double eigenvector_consistency(const PolynomialKillingField& pkf, const BAPair& pair,
                               const DualBAFunction& phi);

// ---- spectral curve ---------------------------------------------------------

struct SpectralCurve {
  int genus = 0;
  std::vector<Complex> branch_points;          // inside the unit disk
  std::vector<Complex> branch_points_mirror;   // 1/conj(alpha)
  std::vector<Complex> poly;                   // m(lambda) = lambda det xi, ascending
  double a_sign = 1.0;                         // a = a_sign * det xi > 0 on S^1
  Complex lambda0{1.0, 0.0}, lambda1{-1.0, 0.0};
  double min_root_gap = 0.0;
  double circle_positivity = 0.0;  // min over 32 samples of a(lambda)
  std::vector<int> sheet_tags;     // branch of nu vs the principal sqrt on the circle
};

// Coefficients of lambda det xi recovered from >= 2g+3 unit-circle
// evaluations, roots by the companion matrix, mirror pairing enforced.
// Errors: DegenerateCurve.
SpectralCurve curve_from_killing(const PolynomialKillingField& pkf, Complex l0, Complex l1);

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs_ascending);

// ---- curve conditions and dp -------------------------------------------------

struct CurveConditionsReport {
  double sym_point_defect;      // max over Sym points, both periods: min ||T -+ 1||
  double sigma_involution;      // |det T - 1| at sampled lambda
  double eta_involution;        // |conj(mu(1/conj(lambda))) - mu(lambda)|
  double rho_involution;        // same content through the inverse
  double singular_part_det;     // |det| of the 2x2 singular-part matrix
  double singular_part_expected;
  std::string condition1 = "structural: root set closed under lambda -> 1/conj(lambda)";
};
// Errors: InsufficientSamples, NoPeriod.
CurveConditionsReport verify_curve_conditions(const SolutionPtr& sol, Complex l0, Complex l1,
                                              int substeps = 8);

struct DpReport {
  Complex p_plus_m1, p_plus_1, p_minus_m1, p_minus_1;  // fitted coefficients
  Complex p_plus_1_expected;   // -i <(dz u)^2>
  Complex p_minus_1_expected;  // (i/2) <cosh 2u>
  double rel_err_leading;      // p_plus_m1 against i/2
  double rel_err_plus;         // p_plus_1 against the grid average
  double rel_err_minus;
};
// Fit of ln mu_k = gamma_k p+ + conj(gamma_k) p- near lambda = 0 over the
// sample ray t e^{i theta}. Errors: PeriodsDegenerate, FitIllConditioned.
DpReport dp_expansion(const SolutionPtr& sol, double t0 = 1e-2, int nsamples = 6,
                      double theta = M_PI / 2, int substeps = 8);

// ---- variation of psi ---------------------------------------------------------

struct PsiDotResult {
  ScalarField dot1, dot2;
  double rank1_form_defect;    // matrix form against the rank-1 rewriting
  double linearized_residual;  // against the linearized psi system
};
// psi_dot = (lambda - a)^{-1} [(lambda+a) xi11 psi1 + 2 lambda xi12 psi2,
//                              2 a xi21 psi1 + (lambda+a) xi22 psi2].
// Errors: LambdaEqualsAnchor.
PsiDotResult vary_psi(const EigenProducts& products_at_a, const BAFunction& psi,
                      const SolutionPtr& sol);

// Finite-difference oracle: deform u by t udot, re-solve psi, compare the
// divided difference with psi_dot. Returns errors for each t.
std::vector<double> vary_psi_fd_errors(const EigenProducts& products_at_a,
                                       const BAFunction& psi, const SolutionPtr& sol,
                                       const std::vector<double>& ts, int substeps = 4);

// ---- deformation generators ----------------------------------------------------

// Laurent loop plus one simple pole: q(lambda) + res / (lambda - pole).
struct RationalLoop {
  LoopMatrix q;
  Mat2 res = Mat2::Zero();
  Complex pole{0.0, 0.0};
  bool has_pole = false;
  Mat2 eval(Complex lambda) const;
};

struct DeformationGenerator {
  enum class Kind { Isospectral, NonIsospectral };
  Kind kind = Kind::Isospectral;
  Complex anchor;
  Mat2 q_gen;  // rank-1 projector data (iso) or the local-parameter derivative
  RationalLoop xi_dot;
  double removable_defect = 0.0;  // |[S, xi](a)| / scale
  double q_second_singular = 0.0;
  double trace_defect = 0.0;
};

// Errors: NotBranchPoint.
DeformationGenerator isospectral_generator(const LoopMatrix& xi0, const SpectralCurve& curve,
                                           Complex a);
// Local-parameter derivative by central differences at lambda = a + delta^2.
// Errors: NotBranchPoint, CurveTooDegenerate.
DeformationGenerator nonisospectral_generator(const LoopMatrix& xi0, const SpectralCurve& curve,
                                              Complex a, double delta = 1e-3);

// Reality-symmetrized evaluation 1/2 (xd(lambda) - lambda^{g-1}
// conj(xd(1/conj(lambda)))^T); keeps det eta-symmetric along the sweep.
Mat2 eval_reality_symmetrized(const RationalLoop& xd, int g, Complex lambda);

// Residual of the linearized Lax equation d xi_dot = [xi_dot, alpha] +
// [xi, alpha_dot(udot)] for the generator extended over the grid through the
// kernel-vector fields at the anchor; evaluated at lambda_sample.
double linearized_lax_residual(const PolynomialKillingField& pkf,
                               const DeformationGenerator& gen, const SolutionPtr& sol,
                               Complex lambda_sample, int substeps = 4);

// Roots of lambda (lambda - a)^k det(xi0 + t xi_dot) tracked to the nearest
// old root; k = 1 for rational xi_dot.
struct RootMotion {
  std::vector<double> ts;
  std::vector<std::vector<Complex>> roots;  // per t, matched to curve roots
};
RootMotion track_roots_under_deformation(const LoopMatrix& xi0, const DeformationGenerator& gen,
                                         const std::vector<double>& ts, bool symmetrize);

// log-log slope of |values| against ts by least squares
double loglog_slope(const std::vector<double>& ts, const std::vector<double>& values);

// ---- matched potential from the monodromy -------------------------------------

struct FittedPotential {
  LoopMatrix xi0;
  int genus = 0;
  std::vector<Complex> branch_points;  // inside the disk
  double fit_residual = 0.0;           // Laurent-window fit quality
  double reality_defect = 0.0;
};
// Locates the branch points tr M(lambda) = +-2 inside the annulus, scales the
// traceless monodromy part onto the Laurent window [-1, g], and projects onto
// the reality condition. Errors: NonConvergent, DegenerateCurve.
FittedPotential fit_potential_from_monodromy(const SolutionPtr& sol, int substeps = 8);

}  // namespace cmcforge
