// Exact symbolic recursion over the jet algebra generated by
// u1 = dz u, u2 = dz^2 u, ... and exponential weights e^{2mu}. The dzbar
// substitution uses dzbar dz u = -sinh(2u)/2 and never introduces mixed jets.
#pragma once

#include <map>
#include <string>

#include <gmpxx.h>

#include "cmcforge/baker_akhiezer.hpp"
#include "cmcforge/sinh_gordon.hpp"

namespace cmcforge {

using Rational = mpq_class;

struct JetMonomial {
  int expw = 0;           // m in e^{2mu}
  std::vector<int> jets;  // jets[i] = exponent of u_{i+1}, trailing zeros trimmed

  int weight() const {
    int w = 0;
    for (size_t i = 0; i < jets.size(); ++i) w += static_cast<int>(i + 1) * jets[i];
    return w;
  }
  int top_jet() const { return static_cast<int>(jets.size()); }  // 0 when jet-free
  void trim();

  friend bool operator==(const JetMonomial& a, const JetMonomial& b) {
    return a.expw == b.expw && a.jets == b.jets;
  }
  // graded lexicographic: (total jet weight, exponential weight, exponents)
  friend bool operator<(const JetMonomial& a, const JetMonomial& b) {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    if (a.expw != b.expw) return a.expw < b.expw;
    return a.jets < b.jets;
  }
};

class JetPolynomial {
 public:
  JetPolynomial() = default;

  static JetPolynomial constant(const Rational& c);
  static JetPolynomial jet(int k, int power = 1);  // u_k^power
  static JetPolynomial exp_weight(int m);          // e^{2mu}
  static JetPolynomial sinh2u();                   // (e^{2u} - e^{-2u})/2
  static JetPolynomial cosh2u();

  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  int max_jet_order() const;
  const std::map<JetMonomial, Rational>& terms() const { return terms_; }

  JetPolynomial& operator+=(const JetPolynomial& o);
  JetPolynomial& operator-=(const JetPolynomial& o);
  friend JetPolynomial operator+(JetPolynomial a, const JetPolynomial& b) { return a += b; }
  friend JetPolynomial operator-(JetPolynomial a, const JetPolynomial& b) { return a -= b; }
  friend JetPolynomial operator*(const JetPolynomial& a, const JetPolynomial& b);
  friend JetPolynomial operator*(const Rational& c, JetPolynomial a);
  friend bool operator==(const JetPolynomial& a, const JetPolynomial& b) {
    return a.terms_ == b.terms_;
  }

  JetPolynomial d() const;     // dz
  JetPolynomial dbar() const;  // dzbar; defined for exponential-weight-free input

  // dz-antiderivative within the jet algebra, integration constant 0.
  // Errors: NotIntegrable.
  JetPolynomial integrate_d() const;

  // canonical text form, e.g. "u3 - 2*u1^3" or "1/2*e2u^-1"
  std::string str() const;

  // Pointwise evaluation; jets by repeated dz stencils. Errors: OrderTooHigh
  // (jets beyond order 5).
  ScalarField evaluate(const SolutionPtr& sol) const;

  void add_term(const JetMonomial& m, const Rational& c);

 private:
  std::map<JetMonomial, Rational> terms_;
};

struct PSLevel {
  JetPolynomial omega, phi, tau, sigma;
};

// One recursion step: tau_n = d omega_n - phi_n,
// omega_{n+1} = d tau_n + 2 tau_n u1, phi_{n+1} = Int d(2 d omega_{n+1} u1),
// sigma_{n+1} = -e^{-2u} (d omega_n + phi_n). The phi_n input must satisfy
// d phi_n = 2 d omega_n u1. Errors: NotIntegrable.
struct PSStep {
  JetPolynomial omega_next, phi_next, tau_n, sigma_next;
};
PSStep ps_step(const JetPolynomial& omega_n, const JetPolynomial& phi_n);

// Levels 0..n_max with omega_1 = u1, phi_1 = u1^2, phi_0 = -1/2, tau_0 = 1/2.
std::vector<PSLevel> ps_table(int n_max);

// Coefficient of lambda^n in Phi^2 - (dz Omega)^2 - 1/4 - Omega^2/lambda,
// which must be the zero polynomial. table must reach level n+1.
JetPolynomial generating_residual_at(const std::vector<PSLevel>& table, int n);
// Residuals for n = 0..n_max; requires n_max <= 8. Errors: OrderTooHigh.
std::vector<JetPolynomial> generating_identity_check(int n_max);

ScalarField evaluate_on_solution(const JetPolynomial& p, const SolutionPtr& sol);

// Puiseux fits of the product ratios against the symbolic flows, through
// order n_max at lambda = 0 and the conjugated table at lambda = infinity.
struct SeriesMatchReport {
  // [n] = relative error of the fitted coefficient field against the
  // symbolic one (absolute below floor 1e-8)
  std::vector<double> omega0, tau0, sigma0, phi0;   // lambda -> 0
  std::vector<double> omega_inf, tau_inf, sigma_inf;  // lambda -> infinity
};
SeriesMatchReport series_match(const std::vector<EigenProducts>& near_zero,
                               const std::vector<EigenProducts>& near_infinity,
                               const SolutionPtr& sol, int n_max);

// Golden-file serialization: lines "omega1 = u1" etc. for n <= n_max.
std::string serialize_table(const std::vector<PSLevel>& table, int n_max);

}  // namespace cmcforge
