#include "cmcforge/fit.hpp"

namespace cmcforge {

PuiseuxBasis make_puiseux_basis(const std::vector<Complex>& lambdas,
                                const std::vector<int>& half_exponents, double cond_limit) {
  const int ns = static_cast<int>(lambdas.size());
  const int nb = static_cast<int>(half_exponents.size());
  if (ns < nb) fail(Errc::InsufficientSamples, "make_puiseux_basis: fewer samples than basis functions");
  Eigen::MatrixXcd v(ns, nb);
  for (int s = 0; s < ns; ++s)
    for (int k = 0; k < nb; ++k)
      v(s, k) = half_power(lambdas[static_cast<size_t>(s)], half_exponents[static_cast<size_t>(k)]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0), smin = svd.singularValues()(nb - 1);
  double cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (cond > cond_limit)
    fail(Errc::FitIllConditioned, "make_puiseux_basis: condition number " + std::to_string(cond));
  PuiseuxBasis b;
  b.lambdas = lambdas;
  b.half_exponents = half_exponents;
  b.cond = cond;
  Eigen::VectorXcd sinv = svd.singularValues().cast<Complex>();
  for (int k = 0; k < nb; ++k) sinv(k) = 1.0 / sinv(k);
  b.pinv = svd.matrixV() * sinv.asDiagonal() * svd.matrixU().adjoint();
  return b;
}

Eigen::VectorXcd fit_values(const PuiseuxBasis& basis, const Eigen::VectorXcd& samples) {
  return basis.pinv * samples;
}

std::vector<ScalarField> fit_fields(const PuiseuxBasis& basis,
                                    const std::vector<ScalarField>& samples) {
  const int nb = static_cast<int>(basis.half_exponents.size());
  const int ns = static_cast<int>(samples.size());
  std::vector<ScalarField> out;
  out.reserve(static_cast<size_t>(nb));
  for (int k = 0; k < nb; ++k) {
    ScalarField c(samples[0].grid);
    for (int s = 0; s < ns; ++s) c.a += basis.pinv(k, s) * samples[static_cast<size_t>(s)].a;
    out.push_back(std::move(c));
  }
  return out;
}

double rel_field_error(const ScalarField& a, const ScalarField& b, double floor_scale) {
  double scale = max_abs(b);
  double diff = max_abs(a - b);
  return scale < floor_scale ? diff : diff / scale;
}

}  // namespace cmcforge
