// Least-squares Puiseux fitting: expand sampled functions of lambda in a
// prescribed set of half-integer powers lambda^{e/2}.
#pragma once

#include "cmcforge/grid.hpp"

namespace cmcforge {

struct PuiseuxBasis {
  std::vector<Complex> lambdas;
  std::vector<int> half_exponents;  // basis lambda^{e/2}
  Eigen::MatrixXcd pinv;            // (nbasis x nsamples) pseudo-inverse
  double cond = 0.0;
};

// Errors: FitIllConditioned when the Vandermonde condition number exceeds
// cond_limit; InsufficientSamples when nsamples < nbasis.
PuiseuxBasis make_puiseux_basis(const std::vector<Complex>& lambdas,
                                const std::vector<int>& half_exponents,
                                double cond_limit = 1e12);

// Coefficients of one sampled scalar function.
Eigen::VectorXcd fit_values(const PuiseuxBasis& basis, const Eigen::VectorXcd& samples);

// Coefficient fields of a sampled field family (one field per lambda).
std::vector<ScalarField> fit_fields(const PuiseuxBasis& basis,
                                    const std::vector<ScalarField>& samples);

// max |a-b| / maxabs(b) when b has scale, plain max |a-b| below the floor.
double rel_field_error(const ScalarField& a, const ScalarField& b, double floor_scale = 1e-8);

}  // namespace cmcforge
