// Small RK4 steppers for linear 2x2 matrix ODEs along a line.
#pragma once

#include <functional>

#include "cmcforge/algebra.hpp"

namespace cmcforge::ode {

// One RK4 step of dX/dt = L(t) X.
template <class F>
Mat2 step_left(const Mat2& x, F&& l, double t, double h) {
  Mat2 k1 = l(t) * x;
  Mat2 k2 = l(t + 0.5 * h) * (x + 0.5 * h * k1);
  Mat2 k3 = l(t + 0.5 * h) * (x + 0.5 * h * k2);
  Mat2 k4 = l(t + h) * (x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of dX/dt = X R(t).
template <class F>
Mat2 step_right(const Mat2& x, F&& r, double t, double h) {
  Mat2 k1 = x * r(t);
  Mat2 k2 = (x + 0.5 * h * k1) * r(t + 0.5 * h);
  Mat2 k3 = (x + 0.5 * h * k2) * r(t + 0.5 * h);
  Mat2 k4 = (x + h * k3) * r(t + h);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of the inhomogeneous system dX/dt = L(t) X + S(t).
template <class F, class G>
Mat2 step_affine(const Mat2& x, F&& l, G&& s, double t, double h) {
  Mat2 k1 = l(t) * x + s(t);
  Mat2 k2 = l(t + 0.5 * h) * (x + 0.5 * h * k1) + s(t + 0.5 * h);
  Mat2 k3 = l(t + 0.5 * h) * (x + 0.5 * h * k2) + s(t + 0.5 * h);
  Mat2 k4 = l(t + h) * (x + h * k3) + s(t + h);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace cmcforge::ode
