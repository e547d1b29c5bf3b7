#include "gqred/quadrature.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace gqred {

void gauss_legendre(int n, Vec& nodes, Vec& weights) {
  if (n < 1) throw StructuralError("gauss_legendre needs n >= 1");
  Mat J = Mat::Zero(n, n);
  for (int j = 1; j < n; ++j) {
    const Real b = j / std::sqrt(4.0 * j * j - 1.0);
    J(j, j - 1) = b;
    J(j - 1, j) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int j = 0; j < n; ++j) {
    const Real v0 = es.eigenvectors()(0, j);
    weights[j] = 2.0 * v0 * v0;
  }
}

void gauss_legendre(int n, Real a, Real b, Vec& nodes, Vec& weights) {
  gauss_legendre(n, nodes, weights);
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  nodes = (nodes.array() * half + mid).matrix();
  weights *= half;
}

namespace {

// QUADPACK (G7, K15) abscissae and weights, positive half.
constexpr Real kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr Real kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr Real kWg[4] = {0.129484966168870, 0.279705391489277,
                         0.381830050505119, 0.417959183673469};

struct GkResult {
  Real value;
  Real error;
  Real resabs;  // integral of |f|, for the rounding-noise floor
};

GkResult gk15(const std::function<Real(Real)>& f, Real a, Real b) {
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  Real fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(mid - half * kXgk[i]);
    fv[14 - i] = f(mid + half * kXgk[i]);
  }
  fv[7] = f(mid);
  Real resk = 0, resg = 0, resabs = 0;
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  }
  resk += kWgk[7] * fv[7];
  resabs += kWgk[7] * std::abs(fv[7]);
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  resg += kWg[3] * fv[7];
  GkResult r;
  r.value = resk * half;
  r.error = std::abs((resk - resg) * half);
  r.resabs = resabs * std::abs(half);
  return r;
}

constexpr Real kNoiseFactor = 100.0 * 2.220446049250313e-16;

Real gk_adaptive(const std::function<Real(Real)>& f, Real a, Real b, Real tol,
                 int depth, int max_depth) {
  const GkResult r = gk15(f, a, b);
  if (std::isfinite(r.resabs) &&
      (r.error <= tol || r.error <= kNoiseFactor * r.resabs))
    return r.value;
  if (depth >= max_depth)
    throw NumericError("adaptive Gauss-Kronrod did not converge");
  const Real mid = 0.5 * (a + b);
  return gk_adaptive(f, a, mid, 0.5 * tol, depth + 1, max_depth) +
         gk_adaptive(f, mid, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

Real integrate_gk(const std::function<Real(Real)>& f, Real a, Real b,
                  Real rel_tol, Real abs_tol, int max_depth) {
  const GkResult first = gk15(f, a, b);
  const Real tol = std::isfinite(first.value)
                       ? std::max(abs_tol, rel_tol * std::abs(first.value))
                       : abs_tol;
  if (std::isfinite(first.resabs) &&
      (first.error <= tol || first.error <= kNoiseFactor * first.resabs))
    return first.value;
  const Real floor_tol = std::isfinite(first.value)
                             ? std::max(tol, 1e-15 * std::abs(first.value))
                             : tol;
  const Real v = gk_adaptive(f, a, b, floor_tol, 0, max_depth);
  if (!std::isfinite(v))
    throw NumericError("adaptive Gauss-Kronrod produced a non-finite value");
  return v;
}

void QuadratureRule::dump(const std::string& path) const {
  std::ofstream out(path);
  out.precision(17);
  for (int j = 0; j < count(); ++j) {
    for (int i = 0; i < nodes.rows(); ++i) out << nodes(i, j) << ' ';
    out << weights[j] << '\n';
  }
}

QuadratureRule lie_ball_rule(int d, Real R, int level) {
  if (R <= 0) throw PreconditionError("ball radius must be positive");
  if (level < 1) level = 1;
  QuadratureRule rule;
  rule.domain = QuadDomain::LieBall;
  rule.level = level;
  if (d == 1) {
    Vec x, w;
    gauss_legendre(level + 1, -R, R, x, w);
    rule.nodes = x.transpose();
    rule.weights = w;
  } else if (d == 2) {
    Vec r, wr;
    gauss_legendre(level + 2, 0.0, R, r, wr);
    const int nt = 2 * level + 4;
    const Real wt = kTwoPi / nt;
    rule.nodes.resize(2, r.size() * nt);
    rule.weights.resize(r.size() * nt);
    int idx = 0;
    for (int i = 0; i < r.size(); ++i)
      for (int j = 0; j < nt; ++j) {
        const Real th = kTwoPi * j / nt;
        rule.nodes(0, idx) = r[i] * std::cos(th);
        rule.nodes(1, idx) = r[i] * std::sin(th);
        rule.weights[idx] = wr[i] * r[i] * wt;
        ++idx;
      }
  } else if (d == 3) {
    Vec r, wr, c, wc;
    gauss_legendre(level + 2, 0.0, R, r, wr);
    gauss_legendre(level + 2, -1.0, 1.0, c, wc);
    const int nt = 2 * level + 4;
    const Real wt = kTwoPi / nt;
    rule.nodes.resize(3, r.size() * c.size() * nt);
    rule.weights.resize(r.size() * c.size() * nt);
    int idx = 0;
    for (int i = 0; i < r.size(); ++i)
      for (int l = 0; l < c.size(); ++l)
        for (int j = 0; j < nt; ++j) {
          const Real th = kTwoPi * j / nt;
          const Real s = std::sqrt(std::max(0.0, 1.0 - c[l] * c[l]));
          rule.nodes(0, idx) = r[i] * s * std::cos(th);
          rule.nodes(1, idx) = r[i] * s * std::sin(th);
          rule.nodes(2, idx) = r[i] * c[l];
          rule.weights[idx] = wr[i] * r[i] * r[i] * wc[l] * wt;
          ++idx;
        }
  } else {
    throw StructuralError("lie_ball_rule supports d <= 3");
  }
  return rule;
}

namespace {

int simplex_nodes_for_level(int level) { return 8 * (level + 1); }
int fiber_nodes_for_level(int level) { return 4 << level; }

}  // namespace

Real integrate_M_level(const ModelManifold& model,
                       const std::function<Real(const ChartPoint&)>& f,
                       int level) {
  const int nu = simplex_nodes_for_level(level);
  const int nth = fiber_nodes_for_level(level);
  Vec gx, gw;
  gauss_legendre(nu, 0.0, 1.0, gx, gw);

  const int N = model.hom_count();
  Vec u(N), theta(N);

  // Tensor iteration over (simplex coords, fiber angles) of all factors.
  // Affine action-angle coordinates per factor: m_i Duffy variables in [0,1]
  // and m_i angles; the chart coordinate's action value is the remainder and
  // its angle is gauged to zero.
  int nvars = 0;
  for (int i = 0; i < model.factor_count(); ++i) nvars += model.factor(i).dim;

  std::vector<int> t_idx(nvars, 0), th_idx(nvars, 0);
  KahanSum total;
  const Real dth = kTwoPi / nth;

  // Iterate angles outermost in a single mixed-radix counter.
  std::vector<int> radix(2 * nvars);
  for (int v = 0; v < nvars; ++v) {
    radix[v] = nu;
    radix[nvars + v] = nth;
  }
  std::vector<int> ctr(2 * nvars, 0);
  bool done = false;
  while (!done) {
    Real w = 1.0;
    int v = 0;
    for (int i = 0; i < model.factor_count(); ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      const Real c = model.factor(i).scale;
      Real rem = c;
      for (int a = 1; a <= m; ++a, ++v) {
        const Real t = gx[ctr[v]];
        u[h0 + a] = rem * t;
        w *= gw[ctr[v]] * rem;
        rem -= u[h0 + a];
        theta[h0 + a] = dth * ctr[nvars + v];
        w *= dth;
      }
      u[h0] = rem;
      theta[h0] = 0.0;
    }
    const ChartPoint p = point_from_action_angle(model, u, theta);
    total.add(w * f(p));

    for (int j = 0;; ++j) {
      if (j == 2 * nvars) {
        done = true;
        break;
      }
      if (++ctr[j] < radix[j]) break;
      ctr[j] = 0;
    }
  }
  return total.value();
}

Real integrate_M(const ModelManifold& model,
                 const std::function<Real(const ChartPoint&)>& f,
                 const IntegrateOptions& opts) {
  const Real fine = integrate_M_level(model, f, opts.level);
  if (!opts.check_convergence) return fine;
  const Real coarse = integrate_M_level(model, f, opts.level - 1 >= 0 ? opts.level - 1 : 0);
  const Real scale = std::max(std::abs(fine), std::abs(coarse));
  if (std::abs(fine - coarse) > std::max(opts.rel_tol * scale, opts.abs_tol))
    throw NumericError("integrate_M did not converge across refinement levels: " +
                       std::to_string(coarse) + " vs " + std::to_string(fine));
  return fine;
}

Real total_volume(const ModelManifold& model, int level) {
  IntegrateOptions opts;
  opts.level = level;
  return integrate_M(model, [](const ChartPoint&) { return 1.0; }, opts);
}

}  // namespace gqred
