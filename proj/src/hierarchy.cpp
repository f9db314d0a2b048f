#include "cmcforge/hierarchy.hpp"

#include <sstream>

namespace cmcforge {

void JetMonomial::trim() {
  while (!jets.empty() && jets.back() == 0) jets.pop_back();
}

void JetPolynomial::add_term(const JetMonomial& m, const Rational& c) {
  if (c == 0) return;
  JetMonomial key = m;
  key.trim();
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

JetPolynomial JetPolynomial::constant(const Rational& c) {
  JetPolynomial p;
  p.add_term(JetMonomial{}, c);
  return p;
}

JetPolynomial JetPolynomial::jet(int k, int power) {
  JetPolynomial p;
  JetMonomial m;
  m.jets.assign(static_cast<size_t>(k), 0);
  m.jets[static_cast<size_t>(k - 1)] = power;
  p.add_term(m, 1);
  return p;
}

JetPolynomial JetPolynomial::exp_weight(int m) {
  JetPolynomial p;
  JetMonomial mono;
  mono.expw = m;
  p.add_term(mono, 1);
  return p;
}

JetPolynomial JetPolynomial::sinh2u() {
  JetPolynomial p;
  JetMonomial plus, minus;
  plus.expw = 1;
  minus.expw = -1;
  p.add_term(plus, Rational(1, 2));
  p.add_term(minus, Rational(-1, 2));
  return p;
}

JetPolynomial JetPolynomial::cosh2u() {
  JetPolynomial p;
  JetMonomial plus, minus;
  plus.expw = 1;
  minus.expw = -1;
  p.add_term(plus, Rational(1, 2));
  p.add_term(minus, Rational(1, 2));
  return p;
}

int JetPolynomial::max_jet_order() const {
  int m = 0;
  for (const auto& [mono, c] : terms_) m = std::max(m, mono.top_jet());
  return m;
}

JetPolynomial& JetPolynomial::operator+=(const JetPolynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

JetPolynomial& JetPolynomial::operator-=(const JetPolynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

JetPolynomial operator*(const JetPolynomial& a, const JetPolynomial& b) {
  JetPolynomial out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      JetMonomial m;
      m.expw = ma.expw + mb.expw;
      m.jets.assign(std::max(ma.jets.size(), mb.jets.size()), 0);
      for (size_t i = 0; i < ma.jets.size(); ++i) m.jets[i] += ma.jets[i];
      for (size_t i = 0; i < mb.jets.size(); ++i) m.jets[i] += mb.jets[i];
      out.add_term(m, ca * cb);
    }
  return out;
}

JetPolynomial operator*(const Rational& c, JetPolynomial a) {
  JetPolynomial out;
  for (const auto& [m, cc] : a.terms_) out.add_term(m, c * cc);
  return out;
}

JetPolynomial JetPolynomial::d() const {
  JetPolynomial out;
  for (const auto& [m, c] : terms_) {
    for (size_t i = 0; i < m.jets.size(); ++i) {
      if (m.jets[i] == 0) continue;
      JetMonomial d = m;
      d.jets[i] -= 1;
      if (d.jets.size() < i + 2) d.jets.resize(i + 2, 0);
      d.jets[i + 1] += 1;
      out.add_term(d, c * m.jets[i]);
    }
    if (m.expw != 0) {
      JetMonomial d = m;
      if (d.jets.empty()) d.jets.resize(1, 0);
      d.jets[0] += 1;
      out.add_term(d, c * 2 * m.expw);
    }
  }
  return out;
}

namespace {

// dzbar u_k = dz^{k-1} (dzbar dz u) with dzbar dz u = -(e^{2u} - e^{-2u})/4
const JetPolynomial& dbar_of_jet(int k) {
  static std::vector<JetPolynomial> cache;
  if (cache.empty()) {
    JetPolynomial s;
    JetMonomial plus, minus;
    plus.expw = 1;
    minus.expw = -1;
    s.add_term(plus, Rational(-1, 4));
    s.add_term(minus, Rational(1, 4));
    cache.push_back(s);  // dbar u1
  }
  while (static_cast<int>(cache.size()) < k) cache.push_back(cache.back().d());
  return cache[static_cast<size_t>(k - 1)];
}

}  // namespace

JetPolynomial JetPolynomial::dbar() const {
  JetPolynomial out;
  for (const auto& [m, c] : terms_) {
    if (m.expw != 0)
      fail(Errc::NotIntegrable,
           "JetPolynomial::dbar: exponential weights would need mixed jets");
    for (size_t i = 0; i < m.jets.size(); ++i) {
      if (m.jets[i] == 0) continue;
      JetMonomial rest = m;
      rest.jets[i] -= 1;
      rest.trim();
      JetPolynomial factor;
      factor.add_term(rest, c * m.jets[i]);
      out += factor * dbar_of_jet(static_cast<int>(i) + 1);
    }
  }
  return out;
}

namespace {

// ordering used to peel the antiderivative: top jet index first, then
// exponents compared from the highest jet downward
bool peel_less(const JetMonomial& a, const JetMonomial& b) {
  if (a.top_jet() != b.top_jet()) return a.top_jet() < b.top_jet();
  for (int i = a.top_jet() - 1; i >= 0; --i) {
    int ea = a.jets[static_cast<size_t>(i)], eb = b.jets[static_cast<size_t>(i)];
    if (ea != eb) return ea < eb;
  }
  return false;
}

}  // namespace

JetPolynomial JetPolynomial::integrate_d() const {
  JetPolynomial rem = *this;
  JetPolynomial acc;
  for (int guard = 0; !rem.is_zero(); ++guard) {
    if (guard > 20000) fail(Errc::NotIntegrable, "integrate_d: no progress");
    auto lead = rem.terms_.begin();
    for (auto it = rem.terms_.begin(); it != rem.terms_.end(); ++it)
      if (peel_less(lead->first, it->first)) lead = it;
    const JetMonomial& t = lead->first;
    if (t.expw != 0)
      fail(Errc::NotIntegrable, "integrate_d: exponential weight in the integrand");
    int k = t.top_jet();
    if (k <= 1) fail(Errc::NotIntegrable, "integrate_d: residual constant or pure-u1 term");
    if (t.jets[static_cast<size_t>(k - 1)] != 1)
      fail(Errc::NotIntegrable, "integrate_d: repeated top jet");
    JetMonomial cand = t;
    cand.jets[static_cast<size_t>(k - 1)] -= 1;
    cand.jets[static_cast<size_t>(k - 2)] += 1;
    cand.trim();
    Rational coef = lead->second / cand.jets[static_cast<size_t>(k - 2)];
    JetPolynomial alpha;
    alpha.add_term(cand, coef);
    acc += alpha;
    rem -= alpha.d();
  }
  return acc;
}

std::string JetPolynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational ac = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    std::vector<std::string> factors;
    if (ac != 1 || (m.jets.empty() && m.expw == 0)) factors.push_back(ac.get_str());
    if (m.expw != 0) {
      std::ostringstream f;
      f << "e2u";
      if (m.expw != 1) f << "^" << m.expw;
      factors.push_back(f.str());
    }
    for (size_t i = 0; i < m.jets.size(); ++i) {
      if (m.jets[i] == 0) continue;
      std::ostringstream f;
      f << "u" << (i + 1);
      if (m.jets[i] != 1) f << "^" << m.jets[i];
      factors.push_back(f.str());
    }
    for (size_t i = 0; i < factors.size(); ++i) {
      if (i) os << "*";
      os << factors[i];
    }
  }
  return os.str();
}

ScalarField JetPolynomial::evaluate(const SolutionPtr& sol) const {
  int order = max_jet_order();
  if (order > 5) fail(Errc::OrderTooHigh, "JetPolynomial::evaluate: jets beyond order 5");
  std::vector<ScalarField> jets;
  jets.reserve(static_cast<size_t>(order));
  ScalarField cur = sol->u;
  for (int k = 1; k <= order; ++k) {
    cur = dz(cur);
    jets.push_back(cur);
  }
  Eigen::ArrayXd u = sol->u.a.real();
  ScalarField out(sol->grid);
  for (const auto& [m, c] : terms_) {
    Eigen::ArrayXXcd term =
        Eigen::ArrayXXcd::Constant(sol->grid.nx, sol->grid.ny, Complex(c.get_d(), 0));
    if (m.expw != 0) term *= (2.0 * m.expw * sol->u.a.real()).exp().cast<Complex>();
    for (size_t i = 0; i < m.jets.size(); ++i)
      for (int p = 0; p < m.jets[i]; ++p) term *= jets[i].a;
    out.a += term;
  }
  return out;
}

ScalarField evaluate_on_solution(const JetPolynomial& p, const SolutionPtr& sol) {
  return p.evaluate(sol);
}

PSStep ps_step(const JetPolynomial& omega_n, const JetPolynomial& phi_n) {
  JetPolynomial u1 = JetPolynomial::jet(1);
  JetPolynomial dw = omega_n.d();
  if (!(phi_n.d() == Rational(2) * (dw * u1)))
    fail(Errc::NotIntegrable, "ps_step: phi_n inconsistent with omega_n");
  PSStep out;
  out.tau_n = dw - phi_n;
  out.omega_next = out.tau_n.d() + Rational(2) * (out.tau_n * u1);
  out.phi_next = (Rational(2) * (out.omega_next.d() * u1)).integrate_d();
  out.sigma_next = Rational(-1) * (JetPolynomial::exp_weight(-1) * (dw + phi_n));
  return out;
}

std::vector<PSLevel> ps_table(int n_max) {
  std::vector<PSLevel> table(static_cast<size_t>(n_max + 1));
  table[0].omega = JetPolynomial();
  table[0].phi = JetPolynomial::constant(Rational(-1, 2));
  table[0].tau = JetPolynomial::constant(Rational(1, 2));  // d omega_0 - phi_0
  table[0].sigma = JetPolynomial();
  if (n_max >= 1) {
    table[1].omega = JetPolynomial::jet(1);
    table[1].phi = JetPolynomial::jet(1, 2);
    table[1].tau = table[1].omega.d() - table[1].phi;
    // sigma_1 = -e^{-2u} (d omega_0 + phi_0) = e^{-2u}/2
    table[1].sigma = Rational(1, 2) * JetPolynomial::exp_weight(-1);
  }
  for (int n = 1; n < n_max; ++n) {
    PSStep s = ps_step(table[static_cast<size_t>(n)].omega, table[static_cast<size_t>(n)].phi);
    table[static_cast<size_t>(n + 1)].omega = s.omega_next;
    table[static_cast<size_t>(n + 1)].phi = s.phi_next;
    table[static_cast<size_t>(n)].tau = s.tau_n;
    table[static_cast<size_t>(n + 1)].sigma = s.sigma_next;
    table[static_cast<size_t>(n + 1)].tau =
        table[static_cast<size_t>(n + 1)].omega.d() - table[static_cast<size_t>(n + 1)].phi;
  }
  return table;
}

JetPolynomial generating_residual_at(const std::vector<PSLevel>& table, int n) {
  // coefficient of lambda^n of Phi^2 - (dz Omega)^2 - 1/4 - Omega^2/lambda,
  // stripped of the overall (-1)^n
  JetPolynomial r;
  for (int i = 0; i <= n; ++i) {
    r += table[static_cast<size_t>(i)].phi * table[static_cast<size_t>(n - i)].phi;
    if (i >= 1 && n - i >= 1)
      r -= table[static_cast<size_t>(i)].omega.d() * table[static_cast<size_t>(n - i)].omega.d();
  }
  for (int i = 1; i <= n; ++i)
    r += table[static_cast<size_t>(i)].omega * table[static_cast<size_t>(n + 1 - i)].omega;
  if (n == 0) r -= JetPolynomial::constant(Rational(1, 4));
  return r;
}

std::vector<JetPolynomial> generating_identity_check(int n_max) {
  if (n_max > 8) fail(Errc::OrderTooHigh, "generating_identity_check: n_max > 8");
  auto table = ps_table(n_max + 1);
  std::vector<JetPolynomial> out;
  for (int n = 0; n <= n_max; ++n) out.push_back(generating_residual_at(table, n));
  return out;
}

std::string serialize_table(const std::vector<PSLevel>& table, int n_max) {
  std::ostringstream os;
  for (int n = 1; n <= n_max; ++n) {
    os << "omega" << n << " = " << table[static_cast<size_t>(n)].omega.str() << "\n";
    os << "phi" << n << " = " << table[static_cast<size_t>(n)].phi.str() << "\n";
  }
  return os.str();
}

SeriesMatchReport series_match(const std::vector<EigenProducts>& near_zero,
                               const std::vector<EigenProducts>& near_infinity,
                               const SolutionPtr& sol, int n_max) {
  if (near_zero.empty()) fail(Errc::InsufficientSamples, "series_match: no samples near 0");
  auto table = ps_table(n_max + 1);

  Eigen::ArrayXXcd eu = sol->u.a.real().exp().cast<Complex>();
  auto ratio_fields = [&](const EigenProducts& pr) {
    // (r_omega, r_tau, r_sigma, r_phi): the normalization-free combinations
    std::array<Eigen::ArrayXXcd, 4> out;
    out[0] = (pr.xi11.a - pr.xi22.a) / pr.yfield.a;
    out[1] = pr.xi21.a / (eu * pr.yfield.a);
    out[2] = pr.xi12.a / (eu * pr.yfield.a);
    out[3] = -(pr.xi21.a / eu + eu * pr.xi12.a / pr.lambda) / (2.0 * pr.yfield.a);
    return out;
  };

  SeriesMatchReport rep;
  const Grid& g = sol->grid;
  auto fit_against = [&](const std::vector<Complex>& lams,
                         const std::vector<std::vector<ScalarField>>& samples, bool at_infinity) {
    // basis (-lambda)^n at 0, (-1/lambda)^n at infinity, one extra order to
    // absorb truncation
    std::vector<Complex> basis_args;
    for (Complex l : lams) basis_args.push_back(at_infinity ? -1.0 / l : -l);
    std::vector<int> exps;
    for (int n = 0; n <= n_max + 1; ++n) exps.push_back(2 * n);  // integer powers
    PuiseuxBasis basis = make_puiseux_basis(basis_args, exps);
    std::vector<std::vector<ScalarField>> coefs;
    for (const auto& fam : samples) coefs.push_back(fit_fields(basis, fam));
    return coefs;
  };

  // lambda -> 0
  {
    std::vector<Complex> lams;
    std::vector<ScalarField> fo, ft, fs, fp;
    for (const auto& pr : near_zero) {
      lams.push_back(pr.lambda);
      auto r = ratio_fields(pr);
      Complex rl = sqrt_lambda(pr.lambda);
      fo.push_back(ScalarField{g, Complex(0, -0.5) * r[0] * rl});
      ft.push_back(ScalarField{g, r[1] * rl});
      fs.push_back(ScalarField{g, -r[2] * rl});
      fp.push_back(ScalarField{g, r[3] * rl});
    }
    auto coefs = fit_against(lams, {fo, ft, fs, fp}, false);
    for (int n = 0; n <= n_max; ++n) {
      ScalarField symo = evaluate_on_solution(table[static_cast<size_t>(n)].omega, sol);
      ScalarField symt = evaluate_on_solution(table[static_cast<size_t>(n)].tau, sol);
      ScalarField syms = evaluate_on_solution(table[static_cast<size_t>(n)].sigma, sol);
      ScalarField symp = evaluate_on_solution(table[static_cast<size_t>(n)].phi, sol);
      rep.omega0.push_back(rel_field_error(coefs[0][static_cast<size_t>(n)], symo));
      rep.tau0.push_back(rel_field_error(coefs[1][static_cast<size_t>(n)], symt));
      rep.sigma0.push_back(rel_field_error(coefs[2][static_cast<size_t>(n)], syms));
      rep.phi0.push_back(rel_field_error(coefs[3][static_cast<size_t>(n)], symp));
    }
  }

  // lambda -> infinity: the |mu| >= 1 rule lands on the sigma-swapped sheet,
  // so the measured ratios flip sign relative to the analytic continuation;
  // coefficients pair with the conjugated flows (tau against sigma-bar).
  if (!near_infinity.empty()) {
    std::vector<Complex> lams;
    std::vector<ScalarField> fo, ft, fs;
    for (const auto& pr : near_infinity) {
      lams.push_back(pr.lambda);
      auto r = ratio_fields(pr);
      Complex irl = 1.0 / sqrt_lambda(pr.lambda);
      fo.push_back(ScalarField{g, Complex(0, -0.5) * r[0] * irl});
      ft.push_back(ScalarField{g, r[1] * irl});
      fs.push_back(ScalarField{g, -r[2] * irl});
    }
    auto coefs = fit_against(lams, {fo, ft, fs}, true);
    for (int n = 0; n <= n_max; ++n) {
      ScalarField symo = conj(evaluate_on_solution(table[static_cast<size_t>(n)].omega, sol));
      ScalarField syms = conj(evaluate_on_solution(table[static_cast<size_t>(n)].sigma, sol));
      ScalarField symt = conj(evaluate_on_solution(table[static_cast<size_t>(n)].tau, sol));
      rep.omega_inf.push_back(rel_field_error(coefs[0][static_cast<size_t>(n)], symo));
      rep.tau_inf.push_back(rel_field_error(coefs[1][static_cast<size_t>(n)], syms));
      rep.sigma_inf.push_back(rel_field_error(coefs[2][static_cast<size_t>(n)], symt));
    }
  }
  return rep;
}

}  // namespace cmcforge
