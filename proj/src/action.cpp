#include "gqred/action.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "gqred/quadrature.hpp"

namespace gqred {

ActionSpec make_action(const ModelManifold& model, IMat weights,
                       std::vector<Rational> shift, Mat xi_basis) {
  ActionSpec a;
  a.weights = std::move(weights);
  a.shift = std::move(shift);
  const int d = a.dim();
  if (a.weights.cols() != model.hom_count())
    throw StructuralError("weight matrix must have one column per homogeneous coordinate");
  if (static_cast<int>(a.shift.size()) != d)
    throw StructuralError("shift must have one entry per torus dimension");
  for (const auto& r : a.shift)
    if (r.den == 0) throw StructuralError("shift denominator must be nonzero");
  if (xi_basis.size() == 0)
    a.xi_basis = Mat::Identity(d, d);
  else
    a.xi_basis = std::move(xi_basis);
  if (a.xi_basis.rows() != d || a.xi_basis.cols() != d)
    throw StructuralError("xi basis must be d x d");
  if (std::abs(std::abs(a.xi_basis.determinant()) - 1.0) > 1e-12)
    throw StructuralError("xi basis must have unit determinant for Haar volume 1");
  Eigen::FullPivLU<Mat> lu(a.weights.cast<Real>());
  if (lu.rank() < d) throw StructuralError("weight matrix must have rank d");
  return a;
}

Vec hom_weights(const ActionSpec& action, const Vec& xi) {
  const Vec lattice = action.xi_basis * xi;
  return action.weights.cast<Real>().transpose() * lattice;
}

Vec moment_raw(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& p) {
  const Vec u = action_coords(model, p);
  Vec m = action.weights.cast<Real>() * u;
  for (int j = 0; j < action.dim(); ++j) m[j] -= action.shift[j].value();
  return m;
}

Vec moment(const ActionSpec& action, const ModelManifold& model,
           const ChartPoint& p) {
  return kTwoPi * (action.xi_basis.transpose() * moment_raw(action, model, p));
}

Vec lambda_in_xi_basis(const ActionSpec& action) {
  Vec lambda(action.dim());
  for (int j = 0; j < action.dim(); ++j) lambda[j] = action.shift[j].value();
  return kTwoPi * (action.xi_basis.transpose() * lambda);
}

CVec generator_complex(const ActionSpec& action, const ModelManifold& model,
                       const ChartPoint& p, const Vec& xi) {
  const Vec w = hom_weights(action, xi);
  CVec v(model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Real wch = w[h0 + p.chart[i]];
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i]) continue;
      v[a0 + pos] = Complex(0, -kTwoPi * (w[h0 + a] - wch)) * p.affine[a0 + pos];
      ++pos;
    }
  }
  return v;
}

Mat generators(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& p) {
  const int d = action.dim();
  Mat G(model.real_dim(), 2 * d);
  for (int j = 0; j < d; ++j) {
    Vec xi = Vec::Zero(d);
    xi[j] = 1.0;
    const CVec X = generator_complex(action, model, p, xi);
    G.col(j) = complex_to_real_tangent(X);
    G.col(d + j) = complex_to_real_tangent(Complex(0, 1) * X);  // J X
  }
  return G;
}

ChartPoint group_flow(const ActionSpec& action, const ModelManifold& model,
                      const Vec& xi, Real t, const ChartPoint& p) {
  const Vec w = hom_weights(action, xi);
  ChartPoint q = p;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Real wch = w[h0 + p.chart[i]];
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i]) continue;
      const Real phase = -kTwoPi * t * (w[h0 + a] - wch);
      q.affine[a0 + pos] *= Complex(std::cos(phase), std::sin(phase));
      ++pos;
    }
  }
  return q;
}

ChartPoint complex_flow(const ActionSpec& action, const ModelManifold& model,
                        const Vec& xi, Real t, const ChartPoint& p) {
  if (t == 0.0) return p;
  const Vec w = hom_weights(action, xi);
  ChartPoint q = p;
  bool unsafe = false;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Real wch = w[h0 + p.chart[i]];
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i]) continue;
      q.affine[a0 + pos] *= std::exp(kTwoPi * t * (w[h0 + a] - wch));
      if (std::abs(q.affine[a0 + pos]) > 10.0) unsafe = true;
      ++pos;
    }
  }
  return unsafe ? renormalize(model, q) : q;
}

FlowDifferential complex_flow_differential(const ActionSpec& action,
                                           const ModelManifold& model,
                                           const Vec& xi, Real t,
                                           const ChartPoint& p) {
  const Vec w = hom_weights(action, xi);
  const CVec Z = homogeneous(model, p);
  CVec Zf(Z.size());
  Vec scale(Z.size());
  for (int a = 0; a < Z.size(); ++a) {
    scale[a] = std::exp(kTwoPi * t * w[a]);
    Zf[a] = scale[a] * Z[a];
  }
  FlowDifferential out;
  out.image = from_homogeneous(model, Zf);
  out.jacobian = CMat::Zero(model.complex_dim(), model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const int told = p.chart[i];
    const int tnew = out.image.chart[i];
    const Complex piv = Zf[h0 + tnew];
    int col = 0;
    for (int b = 0; b <= m; ++b) {
      if (b == told) continue;
      int row = 0;
      for (int a = 0; a <= m; ++a) {
        if (a == tnew) continue;
        Complex d(0, 0);
        if (a == b) d += scale[h0 + a] / piv;
        if (tnew == b) d -= Zf[h0 + a] * scale[h0 + tnew] / (piv * piv);
        out.jacobian(a0 + row, a0 + col) = d;
        ++row;
      }
      ++col;
    }
  }
  return out;
}

Real rho(const ActionSpec& action, const ModelManifold& model, const Vec& xi,
         const ChartPoint& x0) {
  if (moment(action, model, x0).norm() > 1e-10)
    throw PreconditionError("rho requires a zero-set base point");
  if (xi.norm() == 0.0) return 0.0;
  const auto phi = [&](Real t) {
    const ChartPoint q = complex_flow(action, model, xi, t, x0);
    return moment(action, model, q).dot(xi);
  };
  return 2.0 * integrate_gk(phi, 0.0, 1.0, 1e-13, 1e-15);
}

Real orbit_volume(const ActionSpec& action, const ModelManifold& model,
                  const ChartPoint& p) {
  const int d = action.dim();
  std::vector<CVec> X(d);
  for (int j = 0; j < d; ++j) {
    Vec xi = Vec::Zero(d);
    xi[j] = 1.0;
    X[j] = generator_complex(action, model, p, xi);
  }
  Mat gram(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gram(i, j) = metric_pair(model, p, X[i], X[j]);
  const Real det = gram.determinant();
  const Real scale = std::pow(std::max(gram.diagonal().maxCoeff(), 0.0), d);
  if (det <= 1e-24 * std::max(scale, 1e-300))
    throw PreconditionError("orbit volume undefined at a fixed point");
  return std::sqrt(det);
}

Real orbit_volume_quadrature(const ActionSpec& action,
                             const ModelManifold& model, const ChartPoint& p,
                             int nodes_per_dim) {
  const int d = action.dim();
  std::vector<int> ctr(d, 0);
  KahanSum total;
  const Real w = std::pow(1.0 / nodes_per_dim, d);
  bool done = false;
  while (!done) {
    Vec t(d);
    for (int j = 0; j < d; ++j) t[j] = static_cast<Real>(ctr[j]) / nodes_per_dim;
    ChartPoint q = p;
    for (int j = 0; j < d; ++j) {
      Vec xi = Vec::Zero(d);
      xi[j] = 1.0;
      q = group_flow(action, model, xi, t[j], q);
    }
    Mat gram(d, d);
    std::vector<CVec> X(d);
    for (int j = 0; j < d; ++j) {
      Vec xi = Vec::Zero(d);
      xi[j] = 1.0;
      X[j] = generator_complex(action, model, q, xi);
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) gram(i, j) = metric_pair(model, q, X[i], X[j]);
    total.add(w * std::sqrt(std::max(gram.determinant(), 0.0)));
    for (int j = 0;; ++j) {
      if (j == d) {
        done = true;
        break;
      }
      if (++ctr[j] < nodes_per_dim) break;
      ctr[j] = 0;
    }
  }
  return total.value();
}

bool ValidationReport::passed(char code) const {
  for (const auto& c : checks)
    if (c.code == code) return c.pass;
  return false;
}

bool ValidationReport::valid(bool corrected) const {
  const bool base = passed('a') && passed('b') && passed('c');
  return corrected ? (base && passed('e') && passed('f')) : (base && passed('d'));
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << '(' << c.code << ") " << (c.pass ? "pass" : "FAIL") << ": " << c.message
       << '\n';
  return os.str();
}

namespace {

// Enumerates support patterns (one nonempty subset of coordinates per factor)
// on which every weight row is constant; such faces are pointwise G-fixed.
// The zero set meets one iff the face's moment value equals lambda exactly.
bool fixed_face_on_zero_set(const ModelManifold& model, const ActionSpec& action,
                            std::string* where) {
  const int nf = model.factor_count();
  std::vector<int> mask(nf, 1);
  const int d = action.dim();
  while (true) {
    bool constant = true;
    std::vector<long long> value(d, 0);
    for (int i = 0; i < nf && constant; ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      int first = -1;
      for (int a = 0; a <= m; ++a)
        if (mask[i] & (1 << a)) {
          if (first < 0) first = a;
          for (int j = 0; j < d; ++j)
            if (action.weights(j, h0 + a) != action.weights(j, h0 + first))
              constant = false;
        }
      for (int j = 0; j < d; ++j)
        value[j] += static_cast<long long>(model.factor(i).scale) *
                    action.weights(j, h0 + first);
    }
    if (constant) {
      bool hits = true;
      for (int j = 0; j < d; ++j)
        if (value[j] * action.shift[j].den != action.shift[j].num) hits = false;
      if (hits) {
        if (where) {
          std::ostringstream os;
          os << "fixed face with supports";
          for (int i = 0; i < nf; ++i) os << ' ' << mask[i];
          *where = os.str();
        }
        return true;
      }
    }
    // next support pattern
    int i = 0;
    for (; i < nf; ++i) {
      const int full = (1 << (model.factor(i).dim + 1)) - 1;
      if (++mask[i] <= full) break;
      mask[i] = 1;
    }
    if (i == nf) break;
  }
  return false;
}

}  // namespace

MomentSlice solve_moment_slice(const ActionSpec& action,
                               const ModelManifold& model) {
  const int n = model.complex_dim();
  const int d = action.dim();
  Mat A(d, n);
  Vec b(d);
  for (int j = 0; j < d; ++j) {
    Real off = 0;
    for (int i = 0; i < model.factor_count(); ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      const int a0 = model.affine_offset(i);
      for (int a = 1; a <= m; ++a)
        A(j, a0 + a - 1) = action.weights(j, h0 + a) - action.weights(j, h0);
      off += static_cast<Real>(model.factor(i).scale) * action.weights(j, h0);
    }
    b[j] = action.shift[j].value() - off;
  }

  MomentSlice s;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  s.u0 = cod.solve(b);
  s.consistent = (A * s.u0 - b).norm() <= 1e-10 * (1.0 + b.norm());
  Eigen::FullPivLU<Mat> lu(A);
  lu.setThreshold(1e-10);
  s.dim = n - static_cast<int>(lu.rank());
  // kernel() emits a zero column for a trivial kernel
  s.basis = s.dim > 0 ? Mat(lu.kernel()) : Mat(n, 0);
  if (s.basis.cols() != s.dim)
    throw NumericError("moment slice kernel has unexpected dimension");

  // Constraint margins: u_a >= 0 and per-factor sums <= c_i.
  const auto margin = [&](const Vec& u) {
    Real m = std::numeric_limits<Real>::infinity();
    for (int a = 0; a < n; ++a) m = std::min(m, u[a]);
    for (int i = 0; i < model.factor_count(); ++i) {
      const int mdim = model.factor(i).dim;
      const int a0 = model.affine_offset(i);
      m = std::min(m, model.factor(i).scale - u.segment(a0, mdim).sum());
    }
    return m;
  };

  if (!s.consistent) {
    s.feasible = false;
    return s;
  }
  if (s.dim == 0) {
    s.lo = s.hi = 0;
    s.feasible = margin(s.u0) > 1e-12;
    return s;
  }
  if (s.dim == 1) {
    const Vec v = s.basis.col(0);
    Real lo = -std::numeric_limits<Real>::infinity();
    Real hi = std::numeric_limits<Real>::infinity();
    const auto clip = [&](Real g_dot_v, Real slack) {
      // constraint: g.(u0 + s v) <= h  <=>  s * g.v <= slack
      if (g_dot_v > 1e-14)
        hi = std::min(hi, slack / g_dot_v);
      else if (g_dot_v < -1e-14)
        lo = std::max(lo, slack / g_dot_v);
      else if (slack < 0)
        lo = 1, hi = 0;  // infeasible
    };
    for (int a = 0; a < n; ++a) clip(-v[a], s.u0[a]);  // -u_a <= 0
    for (int i = 0; i < model.factor_count(); ++i) {
      const int mdim = model.factor(i).dim;
      const int a0 = model.affine_offset(i);
      clip(v.segment(a0, mdim).sum(),
           model.factor(i).scale - s.u0.segment(a0, mdim).sum());
    }
    s.lo = lo;
    s.hi = hi;
    s.feasible = lo < hi - 1e-12;
    return s;
  }
  // dim >= 2: feasibility probe only (quadrature rules do not support it).
  s.feasible = margin(s.u0) > 1e-12;
  return s;
}

ValidationReport validate_scenario(const ModelManifold& model,
                                   const ActionSpec& action, int k) {
  ValidationReport rep;
  rep.k = k;
  const int d = action.dim();

  const MomentSlice slice = solve_moment_slice(action, model);
  rep.checks.push_back({'a', slice.feasible,
                        slice.feasible ? "0 lies in the moment image"
                                       : "0 is not in the moment map image"});

  // (b) regular value: d Phi full rank at sampled slice points.
  bool regular = slice.feasible;
  if (slice.feasible) {
    std::vector<Vec> us;
    if (slice.dim == 0) {
      us.push_back(slice.u0);
    } else if (slice.dim == 1) {
      for (Real f : {0.2, 0.5, 0.8})
        us.push_back(slice.u0 + (slice.lo + f * (slice.hi - slice.lo)) *
                                    slice.basis.col(0));
    } else {
      us.push_back(slice.u0);
    }
    for (const Vec& ua : us) {
      Vec ufull(model.hom_count()), theta = Vec::Zero(model.hom_count());
      for (int i = 0; i < model.factor_count(); ++i) {
        const int m = model.factor(i).dim;
        const int h0 = model.hom_offset(i);
        const int a0 = model.affine_offset(i);
        Real rest = 0;
        for (int a = 1; a <= m; ++a) {
          ufull[h0 + a] = ua[a0 + a - 1];
          rest += ua[a0 + a - 1];
        }
        ufull[h0] = model.factor(i).scale - rest;
      }
      const ChartPoint p = point_from_action_angle(model, ufull, theta);
      Mat dphi(d, model.real_dim());
      const Mat G = generators(action, model, p);
      const MetricData md = metric_at(model, p);
      for (int j = 0; j < d; ++j)
        dphi.row(j) = (md.omega.transpose() * G.col(j)).transpose() * -1.0;
      Eigen::JacobiSVD<Mat> svd(dphi);
      if (svd.singularValues()[d - 1] <=
          1e-8 * std::max(svd.singularValues()[0], 1e-30))
        regular = false;
    }
  }
  rep.checks.push_back({'b', regular,
                        regular ? "0 is a regular value of the moment map"
                                : "d Phi drops rank on the zero set"});

  std::string where;
  const bool fixed = fixed_face_on_zero_set(model, action, &where);
  rep.checks.push_back({'c', !fixed,
                        fixed ? "action has fixed points on the zero set (" +
                                    where + ")"
                              : "action is free on the zero set"});

  bool lift = true;
  for (int j = 0; j < d; ++j) {
    const long long num = static_cast<long long>(k) * action.shift[j].num;
    if (num % action.shift[j].den != 0) lift = false;
  }
  rep.checks.push_back({'d', lift,
                        lift ? "k lambda is integral; the action lifts to ell^k"
                             : "k lambda is not integral; no lift to ell^k"});

  bool sqrt_exists = true;
  for (int i = 0; i < model.factor_count(); ++i)
    if ((model.factor(i).dim + 1) % 2 != 0) sqrt_exists = false;
  rep.checks.push_back({'e', sqrt_exists,
                        sqrt_exists ? "sqrt K exists (every factor degree even)"
                                    : "canonical bundle has no square root"});

  bool lift_half = sqrt_exists;
  if (sqrt_exists) {
    for (int j = 0; j < d; ++j) {
      long long wsum = 0;
      for (int a = 0; a < model.hom_count(); ++a) wsum += action.weights(j, a);
      // k lambda_j - wsum/2 must be integral.
      const long long num =
          2 * static_cast<long long>(k) * action.shift[j].num -
          wsum * action.shift[j].den;
      if (num % (2 * action.shift[j].den) != 0) lift_half = false;
    }
    for (int i = 0; i < model.factor_count(); ++i)
      if (2 * k * model.factor(i).scale < model.factor(i).dim + 1)
        lift_half = false;
  }
  rep.checks.push_back(
      {'f', lift_half,
       lift_half ? "the action lifts to ell^k (x) sqrt K for this k"
                 : "no lift to ell^k (x) sqrt K at this k parity"});
  return rep;
}

}  // namespace gqred
