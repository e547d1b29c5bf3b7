#include "gqred/reduction.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gqred/exterior.hpp"

namespace gqred {

ReducedSection map_A(const ActionSpec& action, const ModelManifold& model,
                     const Section& s) {
  if (s.basis.corrected)
    throw PreconditionError("map_A acts on uncorrected sections");
  if (!is_invariant(action, model, s))
    throw PreconditionError("map_A needs an invariant section");
  return ReducedSection{s};
}

ReducedSection map_B(const ActionSpec& action, const ModelManifold& model,
                     const Section& r) {
  if (!r.basis.corrected)
    throw PreconditionError("map_B acts on corrected sections");
  if (!is_invariant(action, model, r))
    throw PreconditionError("map_B needs an invariant section");
  return ReducedSection{r};
}

Real bk_pointwise_ratio(const ActionSpec& action, const ModelManifold& model,
                        const ChartPoint& x0) {
  // Ratio of the descended contraction pairing to the upstairs half-form
  // pairing of the common chart factor; section-independent.
  const int n = model.complex_dim();
  const int d = action.dim();
  const Mat G = generators(action, model, x0);

  AltForm beta = AltForm::scalar(2 * n, Complex(1, 0));
  {
    // chart (n,0)-volume form
    for (int a = 0; a < n; ++a) {
      CVec comp = CVec::Zero(2 * n);
      comp[2 * a] = Complex(1, 0);
      comp[2 * a + 1] = Complex(0, 1);
      beta = beta.wedge(AltForm::covector(comp));
    }
  }
  for (int j = 0; j < d; ++j) beta = beta.interior(G.col(j).cast<Complex>());

  const Mat frame = horizontal_frame(action, model, x0);
  std::vector<CVec> fv;
  for (int c = 0; c < frame.cols(); ++c)
    fv.push_back(frame.col(c).cast<Complex>());
  const Complex bb = beta.wedge(beta.conjugate()).eval(fv);

  const MetricData md = metric_at(model, x0);
  AltForm eps_red = AltForm::wedge_power(AltForm::two_form(md.omega), n - d);
  Real fact = 1.0;
  for (int j = 2; j <= n - d; ++j) fact *= j;
  const Complex ev = eps_red.eval(fv) / fact;

  const Complex pairing_sq = bb / (pairing_orientation(n - d) * ev);
  if (!(pairing_sq.real() > 0) ||
      std::abs(pairing_sq.imag()) > 1e-8 * pairing_sq.real())
    throw NumericError("descended half-form pairing is not positive");
  return std::sqrt(pairing_sq.real()) /
         corrected_half_form_factor(model, x0);
}

Complex reduced_value(const ActionSpec& action, const ModelManifold& model,
                      const ReducedSection& rs, const ChartPoint& p) {
  Complex v = framed_value(model, rs.upstairs, p);
  if (rs.upstairs.basis.corrected)
    v *= std::sqrt(bk_pointwise_ratio(action, model, p));
  return v;
}

namespace {

// Exponents of a monomial on the affine (non-pivot) slots of a slice node's
// fiber; two monomials pair to a nonzero fiber average iff these agree mod
// the trapezoid resolution.
bool fiber_resonant(const ModelManifold& model, const ZeroSetRule& rule, int s,
                    const IVec& a, const IVec& b) {
  const int L = rule.fiber_nodes_per_angle();
  const SliceNode& node = rule.slice_node(s);
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    int pivot = 0;
    for (int aa = 1; aa <= m; ++aa)
      if (node.u_full[h0 + aa] > node.u_full[h0 + pivot]) pivot = aa;
    for (int aa = 0; aa <= m; ++aa) {
      if (aa == pivot) continue;
      if (((a[h0 + aa] - b[h0 + aa]) % L + L) % L != 0) return false;
    }
  }
  return true;
}

// sum over the rule of w * f * m_i m_j * (corrected ratio) / vol(G.x) for
// the given basis with the fiber average carried out exactly (the trapezoid
// sum of a pure phase is L^n or 0).
CMat reduced_gram_matrix(const ActionSpec& action, const ModelManifold& model,
                         const ZeroSetRule& rule, const SectionBasis& basis,
                         const Observable* symbol) {
  const int dim = basis.dim();
  const int n = model.complex_dim();
  CMat gram = CMat::Zero(dim, dim);

  for (int s = 0; s < rule.slice_count(); ++s) {
    const ChartPoint p = rule.point(s, Vec::Zero(n));
    const Real w = rule.node_weight(s) *
                   std::pow(static_cast<Real>(rule.fiber_nodes_per_angle()), n);
    Real common = w / orbit_volume(action, model, p);
    if (symbol) common *= symbol->eval(p);
    if (basis.corrected) common *= bk_pointwise_ratio(action, model, p);

    // Framed values of each monomial at the theta = 0 node (real there).
    Vec m(dim);
    for (int i = 0; i < dim; ++i) {
      Section mono = monomial_section(basis, i);
      m[i] = framed_value(model, mono, p).real();
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        if (!fiber_resonant(model, rule, s, basis.exponents[i],
                            basis.exponents[j]))
          continue;
        gram(i, j) += common * m[i] * m[j];
      }
  }
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < i; ++j) gram(i, j) = std::conj(gram(j, i));
  return gram;
}

int derived_fiber_nodes(const ModelManifold& model, int k) {
  int cmax = 1;
  for (const auto& f : model.factors()) cmax = std::max(cmax, f.scale);
  return k * cmax + 2;
}

int derived_slice_nodes(const ModelManifold& model, int k) {
  int cmax = 1;
  for (const auto& f : model.factors()) cmax = std::max(cmax, f.scale);
  return std::max(24, k * cmax / 2 + 12);
}

}  // namespace

Complex reduced_inner(const ActionSpec& action, const ModelManifold& model,
                      const ZeroSetRule& rule, const ReducedSection& v,
                      const ReducedSection& w, const Observable* symbol) {
  const SectionBasis& bv = v.upstairs.basis;
  const SectionBasis& bw = w.upstairs.basis;
  if (bv.k != bw.k || bv.corrected != bw.corrected)
    throw StructuralError("mismatched reduced sections");
  const int n = model.complex_dim();
  const int d = action.dim();
  Complex total(0, 0);
  for (int s = 0; s < rule.slice_count(); ++s) {
    const ChartPoint p = rule.point(s, Vec::Zero(n));
    const Real weight =
        rule.node_weight(s) *
        std::pow(static_cast<Real>(rule.fiber_nodes_per_angle()), n) /
        orbit_volume(action, model, p);
    Real fac = symbol ? symbol->eval(p) : 1.0;
    if (bv.corrected) fac *= bk_pointwise_ratio(action, model, p);
    const CVec Z = homogeneous(model, p);
    Complex node(0, 0);
    for (int i = 0; i < bv.dim(); ++i) {
      if (v.upstairs.coeffs[i] == Complex(0, 0)) continue;
      for (int j = 0; j < bw.dim(); ++j) {
        if (w.upstairs.coeffs[j] == Complex(0, 0)) continue;
        if (!fiber_resonant(model, rule, s, bv.exponents[i], bw.exponents[j]))
          continue;
        Section mi{bv, CVec::Zero(bv.dim())};
        mi.coeffs[i] = v.upstairs.coeffs[i];
        Section mj{bw, CVec::Zero(bw.dim())};
        mj.coeffs[j] = w.upstairs.coeffs[j];
        node += framed_value(model, mi, p) *
                std::conj(framed_value(model, mj, p));
      }
    }
    total += weight * fac * node;
  }
  return std::pow(bv.k / kTwoPi, 0.5 * (n - d)) * total;
}

std::vector<Section> orthonormal_invariant_sections(const ActionSpec& action,
                                                    const ModelManifold& model,
                                                    int k, bool corrected) {
  const SectionBasis basis = invariant_basis(action, model, k, corrected);
  std::vector<Section> out;
  const int n = model.complex_dim();
  for (int i = 0; i < basis.dim(); ++i) {
    Section s = monomial_section(basis, i);
    const Real nrm2 = std::pow(k / kTwoPi, 0.5 * n) *
                      monomial_norm_exact(model, basis, basis.exponents[i]);
    s.coeffs[i] = Complex(1.0 / std::sqrt(nrm2), 0);
    out.push_back(std::move(s));
  }
  return out;
}

GramReport gram_report(const ActionSpec& action, const ModelManifold& model,
                       int k, bool corrected, const GramOptions& opts) {
  const ValidationReport val = validate_scenario(model, action, k);
  if (!val.valid(corrected))
    throw ValidationError("scenario invalid at k=" + std::to_string(k) + "\n" +
                          val.summary());
  GramReport rep;
  rep.k = k;
  rep.corrected = corrected;
  const SectionBasis basis = invariant_basis(action, model, k, corrected);
  rep.dim = basis.dim();
  if (rep.dim == 0) return rep;

  const int n = model.complex_dim();
  rep.gram_up = CMat::Zero(rep.dim, rep.dim);
  for (int i = 0; i < rep.dim; ++i)
    rep.gram_up(i, i) = std::pow(k / kTwoPi, 0.5 * n) *
                        monomial_norm_exact(model, basis, basis.exponents[i]);

  ZeroSetOptions zopts;
  zopts.slice_nodes =
      opts.slice_nodes > 0 ? opts.slice_nodes : derived_slice_nodes(model, k);
  zopts.fiber_nodes =
      opts.fiber_nodes > 0 ? opts.fiber_nodes : derived_fiber_nodes(model, k);
  const ZeroSetRule rule = zero_set_rule(action, model, 1, zopts);

  const int d = action.dim();
  rep.gram_down = std::pow(k / kTwoPi, 0.5 * (n - d)) *
                  reduced_gram_matrix(action, model, rule, basis, nullptr);

  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(rep.gram_down, rep.gram_up);
  rep.mu = ges.eigenvalues();
  const Real lo = rep.mu.minCoeff();
  const Real hi = rep.mu.maxCoeff();
  rep.defect = (hi - lo) / (hi + lo);
  return rep;
}

Real integrate_action_polytope(const ModelManifold& model,
                               const std::function<Real(const ChartPoint&)>& f,
                               int nodes_per_dim) {
  Vec gx, gw;
  gauss_legendre(nodes_per_dim, 0.0, 1.0, gx, gw);
  const int N = model.hom_count();
  Vec u(N);
  const Vec theta = Vec::Zero(N);
  int nvars = model.complex_dim();
  std::vector<int> ctr(nvars, 0);
  KahanSum total;
  bool done = false;
  while (!done) {
    Real w = 1.0;
    int v = 0;
    for (int i = 0; i < model.factor_count(); ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      Real rem = model.factor(i).scale;
      for (int a = 1; a <= m; ++a, ++v) {
        u[h0 + a] = rem * gx[ctr[v]];
        w *= gw[ctr[v]] * rem;
        rem -= u[h0 + a];
      }
      u[h0] = rem;
    }
    total.add(w * f(point_from_action_angle(model, u, theta)));
    for (int j = 0;; ++j) {
      if (j == nvars) {
        done = true;
        break;
      }
      if (++ctr[j] < nodes_per_dim) break;
      ctr[j] = 0;
    }
  }
  return std::pow(kTwoPi, model.complex_dim()) * total.value();
}

namespace {

bool symbol_is_action_only(const ActionSpec& action, const ModelManifold& model,
                           const Observable& f) {
  // Probe along full-torus phase rotations, which fix action coordinates.
  const auto pts = zero_set_sample(action, model, 3);
  for (const ChartPoint& p : pts) {
    const Real base = f.eval(p);
    for (Real t : {0.3141, 0.8312}) {
      ChartPoint q = p;
      for (int a = 0; a < model.complex_dim(); ++a)
        q.affine[a] *= std::exp(Complex(0, t * (a + 1)));
      if (std::abs(f.eval(q) - base) > 1e-9 * (1 + std::abs(base)))
        return false;
    }
  }
  return true;
}

}  // namespace

ToeplitzMatrices toeplitz_pair(const ActionSpec& action,
                               const ModelManifold& model, int k,
                               const Observable& f, const GramOptions& opts) {
  const ValidationReport val = validate_scenario(model, action, k);
  if (!val.valid(true))
    throw ValidationError("corrected scenario invalid at k=" +
                          std::to_string(k) + "\n" + val.summary());
  if (!symbol_is_action_only(action, model, f))
    throw PreconditionError("Toeplitz symbols must be G-invariant functions of "
                            "the moment coordinates");

  ToeplitzMatrices tm;
  tm.symbol = f.tag;
  tm.k = k;
  const SectionBasis basis = invariant_basis(action, model, k, true);
  tm.dim = basis.dim();
  if (tm.dim == 0) throw PreconditionError("empty corrected invariant space");
  const int n = model.complex_dim();
  const int d = action.dim();

  const std::vector<Section> ortho =
      orthonormal_invariant_sections(action, model, k, true);

  // Upstairs Toeplitz matrix: torus weights make it diagonal for symbols of
  // the action coordinates; diagonal entries are polytope integrals.
  tm.upstairs = CMat::Zero(tm.dim, tm.dim);
  int cmax = 1;
  for (const auto& fac : model.factors()) cmax = std::max(cmax, fac.scale);
  const int poly_nodes = k * cmax / 2 + 16;
  for (int i = 0; i < tm.dim; ++i) {
    const Section& si = ortho[i];
    const Real ti = std::pow(k / kTwoPi, 0.5 * n) *
                    integrate_action_polytope(
                        model,
                        [&](const ChartPoint& p) {
                          return f.eval(p) * magnitude(model, si, p);
                        },
                        poly_nodes);
    tm.upstairs(i, i) = ti;
  }
  tm.conjugated = tm.upstairs;  // B_k is the identity matrix in paired bases

  ZeroSetOptions zopts;
  zopts.slice_nodes =
      opts.slice_nodes > 0 ? opts.slice_nodes : derived_slice_nodes(model, k);
  zopts.fiber_nodes =
      opts.fiber_nodes > 0 ? opts.fiber_nodes : derived_fiber_nodes(model, k);
  const ZeroSetRule rule = zero_set_rule(action, model, 1, zopts);

  CMat ghat = CMat::Zero(tm.dim, tm.dim);
  CMat fhat = CMat::Zero(tm.dim, tm.dim);
  {
    const Real pref = std::pow(k / kTwoPi, 0.5 * (n - d));
    for (int s = 0; s < rule.slice_count(); ++s) {
      const ChartPoint p = rule.point(s, Vec::Zero(n));
      const Real w =
          rule.node_weight(s) *
          std::pow(static_cast<Real>(rule.fiber_nodes_per_angle()), n) /
          orbit_volume(action, model, p);
      const Real ratio = bk_pointwise_ratio(action, model, p);
      Vec m(tm.dim);
      for (int i = 0; i < tm.dim; ++i)
        m[i] = framed_value(model, ortho[i], p).real();
      const Real fval = f.eval(p);
      for (int i = 0; i < tm.dim; ++i)
        for (int j = i; j < tm.dim; ++j) {
          if (!fiber_resonant(model, rule, s, basis.exponents[i],
                              basis.exponents[j]))
            continue;
          const Real base = w * ratio * m[i] * m[j];
          ghat(i, j) += pref * base;
          fhat(i, j) += pref * base * fval;
        }
    }
    for (int i = 0; i < tm.dim; ++i)
      for (int j = 0; j < i; ++j) {
        ghat(i, j) = std::conj(ghat(j, i));
        fhat(i, j) = std::conj(fhat(j, i));
      }
  }
  tm.downstairs = ghat.llt().solve(fhat);

  // Operator norm of the difference in the downstairs metric ghat.
  const CMat diff = tm.downstairs - tm.conjugated;
  Eigen::LLT<CMat> llt(ghat);
  const CMat L = llt.matrixL();
  const CMat sim = L.adjoint() * diff *
                   L.adjoint().triangularView<Eigen::Upper>().solve(
                       CMat::Identity(tm.dim, tm.dim));
  Eigen::JacobiSVD<CMat> svd(sim);
  tm.defect = svd.singularValues()[0];
  return tm;
}

Section peak_section(const ActionSpec& action, const ModelManifold& model,
                     int k, const ChartPoint& target) {
  const SectionBasis basis = invariant_basis(action, model, k, false);
  if (basis.dim() == 0)
    throw PreconditionError("empty invariant space; no peak section");
  const Vec u = action_coords(model, target);
  int best = 0;
  Real best_dist = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < basis.dim(); ++i) {
    Real dist = 0;
    for (int a = 0; a < model.hom_count(); ++a) {
      const Real diff = static_cast<Real>(basis.exponents[i][a]) / k - u[a];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  Section s = monomial_section(basis, best);
  const Real nrm2 = std::pow(k / kTwoPi, 0.5 * model.complex_dim()) *
                    monomial_norm_exact(model, basis, basis.exponents[best]);
  s.coeffs[best] = Complex(1.0 / std::sqrt(nrm2), 0);
  return s;
}

int reduced_dimension(const ActionSpec& action, const ModelManifold& model,
                      int k, bool corrected, int quad_level) {
  const int nd = model.complex_dim() - action.dim();
  if (nd == 0) return 1;
  if (nd > 1)
    throw StructuralError("reduced dimension count supports n - d <= 1");
  const ZeroSetRule rule = zero_set_rule(action, model, quad_level);
  const Real vol = integrate_reduced(
      action, model, rule, [](const ChartPoint&) { return 1.0; }, false);
  const Real deg = k * vol / kTwoPi;
  const Real dim = corrected ? deg : deg + 1.0;
  const Real rounded = std::round(dim);
  if (std::abs(dim - rounded) > 1e-6 * std::max(1.0, std::abs(dim)))
    throw NumericError("reduced dimension is not integral: " +
                       std::to_string(dim));
  return static_cast<int>(rounded);
}

}  // namespace gqred
