// Quaternion coordinates of SU(2)-valued fields, a vertex-only discrete
// mean-curvature estimate, and OBJ export through stereographic projection.
#pragma once

#include <string>

#include "cmcforge/frames.hpp"

namespace cmcforge {

struct R4Field {
  Grid grid;
  Eigen::ArrayXXd x0, x1, x2, x3;  // f = x0 + x1 i + x2 j + x3 k
};

// Projection of each matrix onto the quaternion subspace
// [[a, b], [-conj b, conj a]].
R4Field quaternion_coords(const Mat2Field& f);

// Mean curvature from vertex positions only: H = <f_xx + f_yy, N> / (2 v^2)
// with N the unit 4D cross product of (f, f_x, f_y) and v^2 = (|f_x|^2 +
// |f_y|^2)/2; second-order stencils, interior points on non-periodic grids.
struct DiscreteCurvature {
  double h_mean = 0.0;
  double h_max_dev = 0.0;  // max |H(z) - h_mean| over the sampled interior
  Eigen::ArrayXXd h;
};
DiscreteCurvature discrete_mean_curvature(const Mat2Field& f);

// Stereographic projection to R^3, vertices + quad faces (modular indices on
// periodic axes). The projection center is the antipode of the normal-shifted
// point (f(z0) + N(z0))/sqrt(2), which stays off the surface; the antipode of
// f(z0) itself lies on any surface that contains antipodal pairs (the flat
// torus does). Errors: ConfigInvalid on NaN vertices.
void write_obj(const std::string& path, const Mat2Field& f, const Mat2Field& n);

// Residual field as CSV rows "x,y,value" with a header.
void write_csv(const std::string& path, const ScalarField& field);

}  // namespace cmcforge
