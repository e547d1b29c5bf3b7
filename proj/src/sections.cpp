#include "gqred/sections.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "gqred/exterior.hpp"
#include "gqred/quadrature.hpp"

namespace gqred {

namespace {

Complex ipow(Complex z, int e) {
  Complex r(1, 0);
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

int corrected_degree(const ProjectiveFactor& f, int k) {
  if ((f.dim + 1) % 2 != 0)
    throw StructuralError("factor CP^" + std::to_string(f.dim) +
                          " has no half-form bundle");
  const int D = k * f.scale - (f.dim + 1) / 2;
  if (D < 0) throw StructuralError("twisted degree negative at this k");
  return D;
}

void enumerate_degrees(int slots, int total, IVec& cur, int pos,
                       std::vector<IVec>& out) {
  if (pos == slots - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur[pos] = v;
    enumerate_degrees(slots, total - v, cur, pos + 1, out);
  }
}

}  // namespace

SectionBasis full_basis(const ModelManifold& model, int k, bool corrected) {
  SectionBasis basis;
  basis.k = k;
  basis.corrected = corrected;
  std::vector<std::vector<IVec>> per_factor;
  for (int i = 0; i < model.factor_count(); ++i) {
    const auto& f = model.factor(i);
    const int D = corrected ? corrected_degree(f, k) : k * f.scale;
    std::vector<IVec> list;
    IVec cur(f.dim + 1);
    enumerate_degrees(f.dim + 1, D, cur, 0, list);
    per_factor.push_back(std::move(list));
  }
  std::vector<int> idx(model.factor_count(), 0);
  while (true) {
    IVec e(model.hom_count());
    for (int i = 0; i < model.factor_count(); ++i)
      e.segment(model.hom_offset(i), model.factor(i).dim + 1) =
          per_factor[i][idx[i]];
    basis.exponents.push_back(e);
    int i = 0;
    for (; i < model.factor_count(); ++i) {
      if (++idx[i] < static_cast<int>(per_factor[i].size())) break;
      idx[i] = 0;
    }
    if (i == model.factor_count()) break;
  }
  return basis;
}

Section monomial_section(const SectionBasis& basis, int index) {
  Section s;
  s.basis = basis;
  s.coeffs = CVec::Zero(basis.dim());
  s.coeffs[index] = Complex(1, 0);
  return s;
}

namespace {

// Target lattice weight of invariant monomials as a rational per torus
// generator; nullopt-like flag when not integral (empty invariant space).
bool invariant_weight_target(const ActionSpec& action, int k, bool corrected,
                             std::vector<long long>& target) {
  const int d = action.dim();
  target.assign(d, 0);
  for (int j = 0; j < d; ++j) {
    long long num = static_cast<long long>(k) * action.shift[j].num;
    long long den = action.shift[j].den;
    if (corrected) {
      long long wsum = 0;
      for (int a = 0; a < action.weights.cols(); ++a)
        wsum += action.weights(j, a);
      num = 2 * num - wsum * den;
      den = 2 * den;
    }
    if (num % den != 0) return false;
    target[j] = num / den;
  }
  return true;
}

}  // namespace

std::vector<IVec> invariant_exponents(const ActionSpec& action,
                                      const ModelManifold& model, int k,
                                      bool corrected) {
  std::vector<long long> target;
  if (!invariant_weight_target(action, k, corrected, target)) return {};
  std::vector<IVec> out;
  for (const IVec& e : full_basis(model, k, corrected).exponents) {
    bool ok = true;
    for (int j = 0; j < action.dim() && ok; ++j) {
      long long w = 0;
      for (int a = 0; a < model.hom_count(); ++a)
        w += static_cast<long long>(action.weights(j, a)) * e[a];
      ok = (w == target[j]);
    }
    if (ok) out.push_back(e);
  }
  return out;
}

SectionBasis invariant_basis(const ActionSpec& action,
                             const ModelManifold& model, int k,
                             bool corrected) {
  SectionBasis basis;
  basis.k = k;
  basis.corrected = corrected;
  basis.exponents = invariant_exponents(action, model, k, corrected);
  return basis;
}

bool is_invariant(const ActionSpec& action, const ModelManifold& model,
                  const Section& s) {
  std::vector<long long> target;
  if (!invariant_weight_target(action, s.basis.k, s.basis.corrected, target))
    return s.coeffs.norm() == 0.0;
  const Real scale = s.coeffs.cwiseAbs().maxCoeff();
  for (int idx = 0; idx < s.basis.dim(); ++idx) {
    if (std::abs(s.coeffs[idx]) <= 1e-14 * scale) continue;
    for (int j = 0; j < action.dim(); ++j) {
      long long w = 0;
      for (int a = 0; a < model.hom_count(); ++a)
        w += static_cast<long long>(action.weights(j, a)) *
             s.basis.exponents[idx][a];
      if (w != target[j]) return false;
    }
  }
  return true;
}

Complex polynomial_value(const ModelManifold& model, const Section& s,
                         const CVec& Z) {
  Complex total(0, 0);
  for (int idx = 0; idx < s.basis.dim(); ++idx) {
    if (s.coeffs[idx] == Complex(0, 0)) continue;
    Complex term = s.coeffs[idx];
    for (int a = 0; a < model.hom_count(); ++a)
      term *= ipow(Z[a], s.basis.exponents[idx][a]);
    total += term;
  }
  return total;
}

namespace {

Real framed_denominator(const ModelManifold& model, const SectionBasis& basis,
                        const CVec& Z) {
  Real denom = 1.0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const auto& f = model.factor(i);
    const int D = basis.corrected ? corrected_degree(f, basis.k)
                                  : basis.k * f.scale;
    const Real nrm =
        std::sqrt(Z.segment(model.hom_offset(i), f.dim + 1).squaredNorm());
    denom *= std::pow(nrm, D);
    if (basis.corrected) denom *= std::pow(static_cast<Real>(f.scale), 0.25 * f.dim);
  }
  return denom;
}

}  // namespace

Complex framed_value(const ModelManifold& model, const Section& s,
                     const ChartPoint& p) {
  const CVec Z = homogeneous(model, p);
  return polynomial_value(model, s, Z) / framed_denominator(model, s.basis, Z);
}

Real magnitude(const ModelManifold& model, const Section& s,
               const ChartPoint& p) {
  return std::norm(framed_value(model, s, p));
}

namespace {

// dz_1 ^ ... ^ dz_n over the real coordinate basis.
AltForm chart_volume_form(int n) {
  AltForm form = AltForm::scalar(2 * n, Complex(1, 0));
  for (int a = 0; a < n; ++a) {
    CVec comp = CVec::Zero(2 * n);
    comp[2 * a] = Complex(1, 0);
    comp[2 * a + 1] = Complex(0, 1);
    form = form.wedge(AltForm::covector(comp));
  }
  return form;
}

}  // namespace

Complex half_form_pairing_sq(const ModelManifold& model, const ChartPoint& p,
                             const HalfFormValue& nu, const HalfFormValue& mu) {
  if (nu.chart != p.chart || mu.chart != p.chart)
    throw PreconditionError("half-form pairing requires matching charts");
  const int n = model.complex_dim();
  const AltForm dz = chart_volume_form(n);
  const AltForm top = (dz * nu.nu_sq).wedge((dz * mu.nu_sq).conjugate());
  const Complex coeff = top.component((1u << (2 * n)) - 1);
  return coeff / (pairing_orientation(n) * liouville_at(model, p));
}

Complex half_form_pairing(const ModelManifold& model, const ChartPoint& p,
                          const HalfFormValue& nu, const HalfFormValue& mu,
                          Complex previous) {
  const Complex sq = half_form_pairing_sq(model, p, nu, mu);
  Complex root = std::sqrt(sq);
  // Branch continuity: prefer the root nearer the previous value.
  if (std::abs(root - previous) > std::abs(-root - previous)) root = -root;
  return root;
}

Real corrected_half_form_factor(const ModelManifold& model,
                                const ChartPoint& p) {
  Real v = 1.0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const auto& f = model.factor(i);
    const Real w =
        1.0 + p.affine.segment(model.affine_offset(i), f.dim).squaredNorm();
    v *= std::pow(w, 0.5 * (f.dim + 1)) /
         std::pow(static_cast<Real>(f.scale), 0.5 * f.dim);
  }
  return v;
}

Real divergence_ratio(const ActionSpec& action, const ModelManifold& model,
                      const Vec& xi, const ChartPoint& p) {
  const Vec w = hom_weights(action, xi);
  Real div = 0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Real wch = w[h0 + p.chart[i]];
    const Real denom = 1.0 + p.affine.segment(a0, m).squaredNorm();
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i]) continue;
      const Real mu = kTwoPi * (w[h0 + a] - wch);
      const Real zsq = std::norm(p.affine[a0 + pos]);
      div += 2.0 * mu * (1.0 - (m + 1) * zsq / denom);
      ++pos;
    }
  }
  return div;
}

Real half_form_drift(const ActionSpec& action, const ModelManifold& model,
                     const Vec& xi, const ChartPoint& x0) {
  if (xi.norm() == 0.0) return 0.0;
  const auto f = [&](Real t) {
    const ChartPoint q = complex_flow(action, model, xi, t, x0);
    return 0.5 * divergence_ratio(action, model, xi, q);
  };
  return integrate_gk(f, 0.0, 1.0, 1e-13, 1e-15);
}

Real predicted_magnitude_flow(const ActionSpec& action,
                              const ModelManifold& model, const Section& s,
                              const Vec& xi, const ChartPoint& x0) {
  if (!is_invariant(action, model, s))
    throw PreconditionError("predicted_magnitude_flow needs an invariant section");
  Real value = magnitude(model, s, x0) *
               std::exp(-static_cast<Real>(s.basis.k) * rho(action, model, xi, x0));
  if (s.basis.corrected)
    value *= std::exp(-half_form_drift(action, model, xi, x0));
  return value;
}

Mat horizontal_frame(const ActionSpec& action, const ModelManifold& model,
                     const ChartPoint& x0) {
  const int d = action.dim();
  const int n2 = model.real_dim();
  if (n2 == 2 * d) return Mat(n2, 0);
  const MetricData md = metric_at(model, x0);
  const Mat G = generators(action, model, x0);
  Mat C(2 * d, n2);
  for (int j = 0; j < d; ++j) {
    C.row(j) = (G.col(j).transpose() * md.omega);  // omega(X_j, .)
    C.row(d + j) = (G.col(j).transpose() * md.B);  // B(X_j, .)
  }
  Eigen::FullPivLU<Mat> lu(C);
  lu.setThreshold(1e-10);
  Mat ker = lu.kernel();
  const int hdim = n2 - 2 * d;
  if (ker.cols() != hdim)
    throw NumericError("horizontal space has unexpected dimension");

  Mat frame(n2, hdim);
  int built = 0;
  int next = 0;
  const auto bdot = [&](const Vec& a, const Vec& b) {
    return static_cast<Real>(a.transpose() * md.B * b);
  };
  while (built < hdim) {
    if (next >= ker.cols())
      throw NumericError("failed to build a horizontal frame");
    Vec h = ker.col(next++);
    for (int j = 0; j < built; ++j)
      h -= bdot(frame.col(j), h) * frame.col(j);
    const Real nrm = std::sqrt(std::max(bdot(h, h), 0.0));
    if (nrm < 1e-8) continue;
    h /= nrm;
    frame.col(built++) = h;
    if (built < hdim) frame.col(built++) = md.J * h;  // J-adapted pair
  }
  return frame;
}

Real descend_contract(const ActionSpec& action, const ModelManifold& model,
                      const Section& r, const ChartPoint& x0) {
  if (!r.basis.corrected)
    throw PreconditionError("descend_contract needs a corrected section");
  if (!is_invariant(action, model, r))
    throw PreconditionError("descend_contract needs an invariant section");
  const int n = model.complex_dim();
  const int d = action.dim();
  orbit_volume(action, model, x0);  // throws at fixed points

  const Mat G = generators(action, model, x0);
  AltForm beta = chart_volume_form(n);
  for (int j = 0; j < d; ++j)
    beta = beta.interior(G.col(j).cast<Complex>());

  const Mat frame = horizontal_frame(action, model, x0);
  std::vector<CVec> fv;
  for (int c = 0; c < frame.cols(); ++c) fv.push_back(frame.col(c).cast<Complex>());

  const Complex bb = beta.wedge(beta.conjugate()).eval(fv);

  const MetricData md = metric_at(model, x0);
  const AltForm omega = AltForm::two_form(md.omega);
  AltForm eps_red = AltForm::wedge_power(omega, n - d);
  Real fact = 1.0;
  for (int j = 2; j <= n - d; ++j) fact *= j;
  const Complex ev = eps_red.eval(fv) / fact;

  const Complex pairing_sq = bb / (pairing_orientation(n - d) * ev);
  if (!(pairing_sq.real() > 0) ||
      std::abs(pairing_sq.imag()) > 1e-8 * std::abs(pairing_sq.real()))
    throw NumericError("descended half-form pairing is not positive");

  // ell-part magnitude |s|^2 = |p(Z)|^2 / prod |Z_i|^{2 k c_i}.
  const CVec Z = homogeneous(model, x0);
  Real denom = 1.0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const auto& f = model.factor(i);
    const Real nrm =
        std::sqrt(Z.segment(model.hom_offset(i), f.dim + 1).squaredNorm());
    denom *= std::pow(nrm, 2 * r.basis.k * f.scale);
  }
  const Real s_mag = std::norm(polynomial_value(model, r, Z)) / denom;
  return s_mag * std::sqrt(pairing_sq.real());
}

Real quantum_operator_residual(const ActionSpec& action,
                               const ModelManifold& model, const Section& s,
                               const Vec& xi, const ChartPoint& p) {
  const Vec w = hom_weights(action, xi);
  const CVec Z = homogeneous(model, p);
  const int k = s.basis.k;

  // Complex rates of the group flow on the chart coordinates and on the
  // homogeneous lift (chart coordinate frozen at 1).
  CVec zrate(model.hom_count());
  Complex lie_term(0, 0);
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const Real wch = w[h0 + p.chart[i]];
    for (int a = 0; a <= m; ++a) {
      zrate[h0 + a] = Complex(0, -kTwoPi * (w[h0 + a] - wch));
      if (a != p.chart[i]) lie_term += 0.5 * zrate[h0 + a];
    }
  }

  // X(f) for the dehomogenized polynomial: sum over terms of the log-rate
  // weighted by exponents (chart coordinates contribute rate 0).
  Complex f(0, 0), Xf(0, 0);
  for (int idx = 0; idx < s.basis.dim(); ++idx) {
    if (s.coeffs[idx] == Complex(0, 0)) continue;
    Complex term = s.coeffs[idx];
    Complex lograte(0, 0);
    for (int a = 0; a < model.hom_count(); ++a) {
      term *= ipow(Z[a], s.basis.exponents[idx][a]);
      lograte += static_cast<Real>(s.basis.exponents[idx][a]) * zrate[a];
    }
    f += term;
    Xf += lograte * term;
  }

  // Connection term -k dK(X) with K the Kaehler potential of the chart.
  Complex dK(0, 0);
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Real c = model.factor(i).scale;
    const Real denomw = 1.0 + p.affine.segment(a0, m).squaredNorm();
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i]) continue;
      dK += c * std::conj(p.affine[a0 + pos]) * zrate[h0 + a] *
            p.affine[a0 + pos] / denomw;
      ++pos;
    }
  }

  const Real phi = moment(action, model, p).dot(xi);
  Complex Q = Xf - static_cast<Real>(k) * dK * f - Complex(0, k * phi) * f;
  if (s.basis.corrected) Q += lie_term * f;
  return std::abs(Q) / (kTwoPi * std::max(std::abs(f), 1e-300));
}

void write_section(const std::string& path, const Section& s) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot open " + path);
  out.precision(17);
  out << s.basis.k << ' ' << (s.basis.corrected ? 1 : 0) << '\n';
  for (int idx = 0; idx < s.basis.dim(); ++idx) {
    for (int a = 0; a < s.basis.exponents[idx].size(); ++a)
      out << s.basis.exponents[idx][a] << ' ';
    out << s.coeffs[idx].real() << ' ' << s.coeffs[idx].imag() << '\n';
  }
}

Section read_section(const std::string& path, const ModelManifold& model) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path);
  Section s;
  int corrected = 0;
  if (!(in >> s.basis.k >> corrected))
    throw StructuralError("malformed section file header");
  s.basis.corrected = corrected != 0;
  std::vector<Complex> coeffs;
  while (true) {
    IVec e(model.hom_count());
    bool ok = true;
    for (int a = 0; a < model.hom_count(); ++a)
      if (!(in >> e[a])) {
        ok = false;
        break;
      }
    if (!ok) break;
    Real re, im;
    if (!(in >> re >> im)) throw StructuralError("malformed section line");
    s.basis.exponents.push_back(e);
    coeffs.emplace_back(re, im);
  }
  s.coeffs = Eigen::Map<CVec>(coeffs.data(), coeffs.size());
  return s;
}

}  // namespace gqred
