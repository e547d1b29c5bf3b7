#include "gqred/integration.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace gqred {

Real monomial_norm_exact(const ModelManifold& model, const SectionBasis& basis,
                         const IVec& exponents) {
  if (exponents.size() != model.hom_count())
    throw StructuralError("exponent vector has wrong length");
  Real log_total = 0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const auto& f = model.factor(i);
    const int h0 = model.hom_offset(i);
    const int D = basis.corrected
                      ? basis.k * f.scale - (f.dim + 1) / 2
                      : basis.k * f.scale;
    int deg = 0;
    Real lg = f.dim * std::log(kTwoPi * f.scale);
    if (basis.corrected) lg -= 0.5 * f.dim * std::log(static_cast<Real>(f.scale));
    for (int a = 0; a <= f.dim; ++a) {
      const int e = exponents[h0 + a];
      if (e < 0) throw StructuralError("negative exponent");
      deg += e;
      lg += std::lgamma(e + 1.0);
    }
    if (deg != D) throw StructuralError("exponent degree does not match k");
    lg -= std::lgamma(D + f.dim + 1.0);
    log_total += lg;
  }
  return std::exp(log_total);
}

Real upstairs_norm_sq(const ModelManifold& model, const Section& s) {
  const int n = model.complex_dim();
  const Real pref = std::pow(s.basis.k / kTwoPi, 0.5 * n);
  KahanSum sum;
  for (int idx = 0; idx < s.basis.dim(); ++idx) {
    const Real c2 = std::norm(s.coeffs[idx]);
    if (c2 == 0) continue;
    sum.add(c2 * monomial_norm_exact(model, s.basis, s.basis.exponents[idx]));
  }
  return pref * sum.value();
}

Real integrate_reduced(const ActionSpec& action, const ModelManifold& model,
                       const ZeroSetRule& rule,
                       const std::function<Real(const ChartPoint&)>& f,
                       bool check_invariance) {
  if (check_invariance) {
    const auto sample = zero_set_sample(action, model, 5);
    for (const ChartPoint& p : sample) {
      const Real base = f(p);
      for (Real t : {0.217, 0.683}) {
        Vec xi = Vec::Constant(action.dim(), 1.0 / std::sqrt(action.dim()));
        const Real moved = f(group_flow(action, model, xi, t, p));
        if (std::abs(moved - base) > 1e-8 * (1.0 + std::abs(base)))
          throw PreconditionError("integrand is not orbit-invariant");
      }
    }
  }
  KahanSum sum;
  rule.for_each([&](const ChartPoint& p, Real w) {
    sum.add(w * f(p) / orbit_volume(action, model, p));
  });
  return sum.value();
}

Real tau(const ActionSpec& action, const ModelManifold& model, const Vec& xi,
         const ChartPoint& x0) {
  if (moment(action, model, x0).norm() > 1e-10)
    throw PreconditionError("tau requires a zero-set base point");
  const int d = action.dim();
  const int n2 = model.real_dim();

  // B-orthonormal basis of T Phi^-1(0) at x0 (kernel of d phi_xi rows).
  const MetricData md0 = metric_at(model, x0);
  const Mat G0 = generators(action, model, x0);
  Mat C(d, n2);
  for (int j = 0; j < d; ++j) C.row(j) = G0.col(j).transpose() * md0.omega;
  Eigen::FullPivLU<Mat> lu(C);
  lu.setThreshold(1e-10);
  Mat ker = lu.kernel();
  if (ker.cols() != n2 - d)
    throw NumericError("zero-set tangent space has unexpected dimension");
  Mat basis(n2, n2 - d);
  int built = 0;
  for (int c = 0; c < ker.cols() && built < n2 - d; ++c) {
    Vec h = ker.col(c);
    for (int j = 0; j < built; ++j)
      h -= (basis.col(j).transpose() * md0.B * h)(0) * basis.col(j);
    const Real nrm = std::sqrt(std::max((h.transpose() * md0.B * h)(0), 0.0));
    if (nrm < 1e-9) continue;
    basis.col(built++) = h / nrm;
  }
  if (built != n2 - d) throw NumericError("failed to frame the zero set");

  // Push the frame through e^{i xi} and append the g-directions J X^{xi_l}.
  const FlowDifferential fd = complex_flow_differential(action, model, xi, 1.0, x0);
  const ChartPoint& p = fd.image;
  std::vector<CVec> cols;
  for (int l = 0; l < d; ++l) {
    Vec e = Vec::Zero(d);
    e[l] = 1.0;
    cols.push_back(Complex(0, 1) * generator_complex(action, model, p, e));
  }
  for (int c = 0; c < basis.cols(); ++c)
    cols.push_back(fd.jacobian * real_to_complex_tangent(basis.col(c)));

  Mat gram(n2, n2);
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j)
      gram(i, j) = metric_pair(model, p, cols[i], cols[j]);
  const Real det = gram.determinant();
  if (!(det > 0)) throw PreconditionError("singular flow differential");
  return std::sqrt(det);
}

namespace {

// Shell mass of the I_k integrand between radii [R1, R2].
Real shell_mass(const ActionSpec& action, const ModelManifold& model,
                const ChartPoint& x0, int k, Real R1, Real R2) {
  const int d = action.dim();
  const auto radial = [&](const Vec& dir) {
    return integrate_gk(
        [&](Real t) {
          const Vec xi = t * dir;
          const Real r = rho(action, model, xi, x0);
          Real jac = 1.0;
          for (int j = 1; j < d; ++j) jac *= t;
          return tau(action, model, xi, x0) * std::exp(-k * r) * jac;
        },
        R1, R2, 1e-10, 1e-280, 30);
  };
  if (d == 1) {
    Vec dir(1);
    dir[0] = 1.0;
    Real total = radial(dir);
    dir[0] = -1.0;
    total += radial(dir);
    return total;
  }
  // Angular trapezoid for d == 2; d == 3 uses a coarse spherical grid.
  KahanSum sum;
  if (d == 2) {
    const int nt = 16;
    for (int j = 0; j < nt; ++j) {
      const Real th = kTwoPi * j / nt;
      Vec dir(2);
      dir << std::cos(th), std::sin(th);
      sum.add(radial(dir) * (kTwoPi / nt));
    }
  } else if (d == 3) {
    const int nt = 8, nc = 6;
    Vec cx, cw;
    gauss_legendre(nc, -1.0, 1.0, cx, cw);
    for (int l = 0; l < nc; ++l)
      for (int j = 0; j < nt; ++j) {
        const Real th = kTwoPi * j / nt;
        const Real s = std::sqrt(1.0 - cx[l] * cx[l]);
        Vec dir(3);
        dir << s * std::cos(th), s * std::sin(th), cx[l];
        sum.add(radial(dir) * cw[l] * (kTwoPi / nt));
      }
  } else {
    throw StructuralError("tail monitor supports d <= 3");
  }
  return sum.value();
}

}  // namespace

TailEstimate tail_monitor(const ActionSpec& action, const ModelManifold& model,
                          const ChartPoint& x0, int k, Real R) {
  if (R <= 0) throw PreconditionError("tail monitor needs R > 0");
  TailEstimate est;
  est.radius = R;

  const Real Rmax = 3.0 * R + 1.0;
  const std::vector<Real> radii = {R, 1.5 * R, 2.0 * R};
  const std::vector<int> ks = {k, 2 * k};

  // masses[r][ik]: shell mass beyond radii[r] at tensor power ks[ik]
  Mat masses(radii.size(), ks.size());
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t ik = 0; ik < ks.size(); ++ik)
      masses(r, ik) =
          shell_mass(action, model, x0, ks[ik], radii[r], Rmax + radii[r]);
  est.observed = masses(0, 0);

  est.monotone_R = true;
  for (std::size_t r = 0; r + 1 < radii.size(); ++r)
    for (std::size_t ik = 0; ik < ks.size(); ++ik)
      if (masses(r + 1, ik) > masses(r, ik)) est.monotone_R = false;
  est.monotone_k = true;
  for (std::size_t r = 0; r < radii.size(); ++r)
    if (masses(r, 1) > masses(r, 0)) est.monotone_k = false;

  // Fit the decay rate by least squares in log m = log b - D R k, then take
  // b as the smallest envelope constant over the sampled grid, so the bound
  // b e^{-R D k} dominates every observed mass.
  const int rows = static_cast<int>(radii.size() * ks.size());
  Mat A(rows, 2);
  Vec y(rows);
  int row = 0;
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t ik = 0; ik < ks.size(); ++ik) {
      A(row, 0) = 1.0;
      A(row, 1) = -radii[r] * ks[ik];
      y[row] = std::log(std::max(masses(r, ik), 1e-300));
      ++row;
    }
  const Vec fit = A.colPivHouseholderQr().solve(y);
  est.D = fit[1];
  Real log_b = -std::numeric_limits<Real>::infinity();
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t ik = 0; ik < ks.size(); ++ik)
      log_b = std::max(log_b, std::log(std::max(masses(r, ik), 1e-300)) +
                                  est.D * radii[r] * ks[ik]);
  est.b = std::exp(log_b);
  return est;
}

Real truncation_radius(const ActionSpec& action, const ModelManifold& model,
                       const ChartPoint& x0, int k, Real target_exponent) {
  const int d = action.dim();
  // Gaussian floor from the rho Hessian: k lambda_min R^2 / 2 = target.
  const Mat G = generators(action, model, x0);
  Mat H(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      H(i, j) = 2.0 * metric_pair(model, x0,
                                  real_to_complex_tangent(G.col(i)),
                                  real_to_complex_tangent(G.col(j)));
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Real lmin = es.eigenvalues()[0];
  if (!(lmin > 0)) throw PreconditionError("degenerate rho Hessian");
  Real R = std::sqrt(2.0 * target_exponent / (k * lmin));

  // Grow until k rho >= target on every sampled ray.
  std::vector<Vec> dirs;
  if (d == 1) {
    Vec e(1);
    e[0] = 1;
    dirs.push_back(e);
    e[0] = -1;
    dirs.push_back(e);
  } else {
    const int nt = 8;
    for (int j = 0; j < nt; ++j) {
      Vec e = Vec::Zero(d);
      e[0] = std::cos(kTwoPi * j / nt);
      e[1] = std::sin(kTwoPi * j / nt);
      if (d == 3) {
        dirs.push_back(e);
        Vec f = Vec::Zero(d);
        f[2] = (j % 2 == 0) ? 1 : -1;
        f[0] = e[0] * 0.5;
        f[1] = e[1] * 0.5;
        dirs.push_back(f / f.norm());
        continue;
      }
      dirs.push_back(e);
    }
  }
  for (int it = 0; it < 60; ++it) {
    Real worst = std::numeric_limits<Real>::infinity();
    for (const Vec& dir : dirs)
      worst = std::min(worst, k * rho(action, model, Vec(R * dir), x0));
    if (worst >= target_exponent) return R;
    R *= 1.25;
  }
  throw NumericError("could not find a truncation radius");
}

}  // namespace gqred
