// Homogeneous Jacobi fields from eigenfunction products, supplementation of
// normal fields to parametric Jacobi fields, the Killing-field criterion,
// and the inhomogeneous fields with their period defects.
#pragma once

#include "cmcforge/baker_akhiezer.hpp"
#include "cmcforge/frames.hpp"

namespace cmcforge {

struct SymContext {
  Complex lambda0{1.0, 0.0}, lambda1{-1.0, 0.0};
  double H = 0.0;
  Complex Q{0.0, -0.5};

  // Errors: SymPointsEqual, SymPointsOffCircle.
  static SymContext from_points(Complex l0, Complex l1);
};

struct JacobiData {
  Grid grid;
  Complex lambda;
  ScalarField omega, tau, sigma, phi_aux;
  Complex y{0.0, 0.0};
  SymContext sym;
};

// omega = xi11 - xi22, tau = i xi21 / (e^u Q), sigma = -i xi12 / (e^u conj Q),
// phi_aux = -i (e^{-u} xi21 + lambda^{-1} e^{u} xi12). The products are
// rescaled to y = -2 lambda^{-1/2} (the value the first-component-1 seeds
// produce on the vacuum), so all fields carry an O(1) normalization.
// Errors: ZeroHopf.
JacobiData homogeneous_from_products(const EigenProducts& pr, const SymContext& sym,
                                     const SolutionPtr& sol);

// max |dz dzbar w + cosh(2u) w| over the grid.
double homogeneous_jacobi_residual(const ScalarField& w, const SolutionPtr& sol);

struct IdentityReport {
  double iv;        // (dz w)^2 - phi^2 - (y^2 - w^2)/lambda
  double v_first;   // dz phi - 2 dz u dz w
  double v_second;  // w/lambda - 2 phi dz u + dz^2 w
};
IdentityReport check_identities_iv_v(const JacobiData& jd, const SolutionPtr& sol);

// udot = i w (lambda-l0)(lambda-l1) / (lambda (l0-l1)).
ScalarField udot_from_field(const JacobiData& jd);
// udot assembled from tau, sigma and omega (Hdot = 0 case).
ScalarField udot_assembled(const JacobiData& jd, const SolutionPtr& sol);

struct SupplementResult {
  ScalarField tau, sigma;
  double compat_tau;      // dzbar of the dz-data minus dz of the dzbar-data
  double compat_sigma;
  double inhom_residual;  // residual of omega against the implied right side
};
// Integrates the tau/sigma gradient data by the discrete Poincare solve;
// constants fixed by tau(z0) = sigma(z0) = 0. Errors: NotJacobi (omega fails
// the implied inhomogeneous equation beyond 1e-3), ConfigInvalid (Qdot != 0
// with H = 0: the implied Hdot is undefined).
SupplementResult supplement(const ScalarField& omega, Complex qdot, const SymContext& sym,
                            const SolutionPtr& sol);

struct VariationDecomposition {
  ScalarField tau, sigma, omega;  // fdot = tau dz f + sigma dzbar f + omega N
  ScalarField udot;               // assembled via the Hdot = 0 relation
  double udot_max = 0.0;
};
// Components of an arbitrary variation field in the moving frame.
VariationDecomposition decompose_variation(const Mat2Field& fdot, const Immersion& imm);
// fdot = g1 f - f g0 for su(2) generators. Errors: NotSkew.
VariationDecomposition killing_from_isometry(const Mat2& g0, const Mat2& g1,
                                             const Immersion& imm);

struct InhomogeneousJacobi {
  Grid grid;
  double hfrak = 0.0;  // -Hdot / (2(H^2+1))
  ScalarField omega_hat, omega_plus, omega_minus;
  ScalarField tau_plus, tau_minus, sigma_plus, sigma_minus;
  double inhom_residual = 0.0;  // omega_hat against Hdot e^{2u} / (2(H^2+1))
  // period defects of g = dz(tau)/2 + tau dz u over gamma_1, against the
  // closed-form predictions
  double defect_minus_measured_vs_predicted = 0.0;
  double defect_plus_measured_vs_predicted = 0.0;
  Complex period_integral{0.0, 0.0};  // int over one x-period of 2(dz u)^2 dw - cosh(2u) dwbar
};
// Errors: NoPeriod (x-axis not periodic).
InhomogeneousJacobi inhomogeneous_build(const SolutionPtr& sol, const SymContext& sym,
                                        double hdot);

// pointwise pairing of two matrix fields
ScalarField pairing_field(const Mat2Field& a, const Mat2Field& b);

}  // namespace cmcforge
