// The first-order systems for psi and its dual phi at arbitrary spectral
// parameter, eigenfunction products xi_ij and y, the projector P, the
// lambda^{1/2} gauge, and asymptotic fits near lambda = 0 and infinity.
#pragma once

#include "cmcforge/fit.hpp"
#include "cmcforge/sinh_gordon.hpp"

namespace cmcforge {

// Fundamental solution of the psi system: dPsi/dx = A^T Psi, dPsi/dy = B^T Psi
// with alpha's A, B. Columns span the solution space at fixed lambda.
struct PsiField {
  Grid grid;
  Complex lambda{1.0, 0.0};
  Mat2Field Psi;  // Psi(z0) = 1
  std::vector<Mat2> wrap_x, wrap_y;
  Mat2 T1 = Mat2::Identity(), T2 = Mat2::Identity();
  bool has_t1 = false, has_t2 = false;
  double det_drift = 0.0;  // Wronskian drift
};

PsiField integrate_psi_fundamental(const SolutionPtr& sol, Complex lambda, int substeps = 4);

// Forward transfer matrices over one x-period (base row) and one y-period
// (base column). Errors: LambdaZero.
struct MonodromyPair {
  Mat2 T1 = Mat2::Identity(), T2 = Mat2::Identity();
  bool has_t1 = false, has_t2 = false;
};
MonodromyPair psi_monodromies(const SolutionPtr& sol, Complex lambda, int substeps = 4);

// Substeps per grid cell keeping the RK4 truncation of the psi system below
// tol across the domain; grows like max(|lambda|, 1/|lambda|)^{5/4}.
int auto_substeps(const SolutionPtr& sol, Complex lambda, double tol = 1e-7);

// Same integration with explicitly supplied coefficient fields (complex u
// allowed); used by linearization studies.
PsiField integrate_psi_fields(const Grid& grid, Complex lambda, int substeps,
                              const ScalarField& uz, const ScalarField& uzbar,
                              const ScalarField& eu, const ScalarField& emu);

struct BAFunction {
  Grid grid;
  Complex lambda{1.0, 0.0};
  ScalarField psi1, psi2;
  Vec2 seed{1.0, 0.0};
  Complex mu1{1.0, 0.0}, mu2{1.0, 0.0};
  bool has_mu1 = false, has_mu2 = false;
  std::vector<Vec2> wrap_x, wrap_y;  // psi at x0+Lx per row / y0+Ly per column
  double wronskian_drift = 0.0;
};

struct DualBAFunction {
  Grid grid;
  Complex lambda{1.0, 0.0};
  ScalarField phi1, phi2;
  Complex mu1{1.0, 0.0}, mu2{1.0, 0.0};
  bool has_mu1 = false, has_mu2 = false;
};

// Extract the solution Psi(z) c from a fundamental field.
BAFunction slice_solution(const PsiField& pf, const Vec2& c);

// On a grid with a periodic axis the seed is replaced by the monodromy
// eigenvector on the |mu| >= 1 branch, first component scaled to 1 (second
// when the first is < 1e-12). Errors: LambdaZero, DegenerateMonodromy.
BAFunction solve_psi(const SolutionPtr& sol, Complex lambda, Vec2 seed = Vec2(1.0, 1.0),
                     int substeps = 4);

struct BAPair {
  BAFunction psi;      // |mu| >= 1 branch
  BAFunction partner;  // the sigma^* branch with inverse multipliers
  double seam_defect = 0.0;  // closure defect of direction-split integration
};
// Branch-stable: strongly decaying directions are integrated backward from
// the wrapped end so both eigen-branches stay accurate at extreme lambda.
BAPair solve_psi_pair(const SolutionPtr& sol, Complex lambda, int substeps = 4);

// Eigenvector of t for eigenvalue mu, from the larger of the two row choices.
Vec2 robust_eigenvector(const Mat2& t, Complex mu);
// Eigenvalue of t on the eigendirection nearest to c (Rayleigh would lose the
// decaying branch through a strongly growing transfer matrix). The Wronskian
// is taken as 1 for the small eigenvalue.
Complex matched_eigenvalue(const Mat2& t, const Vec2& c);

// phi = J sigma^* psi: (phi1, phi2) = (partner2, -partner1).
DualBAFunction dual_from_sigma_star(const BAFunction& psi_partner);

// Stencil residuals of the defining systems (one-sided derivatives: the
// solutions are only quasi-periodic).
double psi_system_residual(const BAFunction& psi, const SolutionPtr& sol);
double phi_system_residual(const DualBAFunction& phi, const SolutionPtr& sol);

struct EigenProducts {
  Grid grid;
  Complex lambda{1.0, 0.0};
  ScalarField xi11, xi12, xi21, xi22;
  ScalarField yfield;  // psi^t phi, constant for valid inputs
  Complex y{0.0, 0.0};
  double y_spread = 0.0;
  Complex mu_psi{1.0, 0.0}, mu_phi{1.0, 0.0};
};

// Errors: InconsistentLambda.
EigenProducts eigen_products(const BAFunction& psi, const DualBAFunction& phi);

// P = psi phi^t / (psi^t phi), entrywise xi_ij / y.
Mat2Field p_matrix(const EigenProducts& pr);
struct ProjectorReport {
  double idempotency;  // max |P^2 - P|
  double trace;        // max |tr P - 1|
};
ProjectorReport projector_defects(const EigenProducts& pr);

// Puiseux fits of tr(diag(1,-1) P) near lambda = 0 (and infinity): the
// lambda^{1/2} coefficient recovers -2i dz u. Errors: FitIllConditioned.
struct ResidueFit {
  ScalarField du;      // from samples near 0
  ScalarField dubar;   // from samples near infinity (empty if not supplied)
  bool has_dubar = false;
  double cond0 = 0.0, cond_inf = 0.0;
};
ResidueFit p_matrix_and_residues(const std::vector<EigenProducts>& near_zero,
                                 const std::vector<EigenProducts>& near_infinity);

// psi-tilde = diag(lambda^{-1/2} e^{u/2}, e^{-u/2}) psi and the residual of
// the gauged system it must satisfy. Errors: OnBranchCut.
struct GaugedPsi {
  Grid grid;
  Complex lambda;
  ScalarField t1, t2;
  double system_residual = 0.0;
};
GaugedPsi gauge_tilde(const BAFunction& psi, const SolutionPtr& sol);

// (dz dzbar + cosh 2u)(psi1 psi2) residual and the multiplier-squared defect
// of the product under the periods.
struct FermiReport {
  double kernel_residual;
  double multiplier_sq_defect;
};
FermiReport fermi_kernel_check(const BAFunction& psi, const SolutionPtr& sol);

}  // namespace cmcforge
