#include "gqred/densities.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace gqred {

Observable make_observable(const std::string& tag, const ActionSpec& action,
                           const ModelManifold& model) {
  Observable obs;
  obs.tag = tag;
  if (tag == "one") {
    obs.eval = [](const ChartPoint&) { return 1.0; };
  } else if (tag == "moment_sum") {
    obs.eval = [&action, &model](const ChartPoint& p) {
      const Vec u = action_coords(model, p);
      Real s = 0;
      for (int j = 0; j < action.dim(); ++j)
        for (int a = 0; a < model.hom_count(); ++a)
          s += action.weights(j, a) * u[a];
      return s;
    };
  } else if (tag == "mnormsq") {
    obs.eval = [&action, &model](const ChartPoint& p) {
      return moment_raw(action, model, p).squaredNorm();
    };
  } else if (tag == "gauss_moment") {
    obs.eval = [&action, &model](const ChartPoint& p) {
      return std::exp(-moment_raw(action, model, p).squaredNorm());
    };
  } else {
    throw StructuralError("unknown observable tag: " + tag);
  }
  return obs;
}

Real laplace_leading(const Mat& hessian, Real sigma0, Real k) {
  const int d = static_cast<int>(hessian.rows());
  Eigen::LLT<Mat> llt(hessian);
  if (llt.info() != Eigen::Success)
    throw PreconditionError("Laplace approximation needs a positive definite Hessian");
  Real det = 1.0;
  for (int j = 0; j < d; ++j) det *= llt.matrixL()(j, j);
  return std::pow(kTwoPi / k, 0.5 * d) * sigma0 / det;
}

Mat hessian_rho(const ActionSpec& action, const ModelManifold& model,
                const ChartPoint& x0) {
  const int d = action.dim();
  const Mat G = generators(action, model, x0);
  Mat H(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      H(i, j) = 2.0 * metric_pair(model, x0,
                                  real_to_complex_tangent(Vec(G.col(d + i))),
                                  real_to_complex_tangent(Vec(G.col(d + j))));
  return H;
}

namespace {

// Radial part of the truncated g-integral along one ray: the integrand has a
// Gaussian core and exponential tails, so the radial direction uses adaptive
// Gauss-Kronrod (deterministic) while angles use fixed symmetric grids.
Real ray_integral(const ActionSpec& action, const ModelManifold& model,
                  const ChartPoint& x0, int k, const Observable& f,
                  bool corrected, const Vec& dir, Real R, int d,
                  Real rel_tol) {
  const auto g = [&](Real t) {
    const Vec xi = t * dir;
    Real expo = -k * rho(action, model, xi, x0);
    if (corrected) expo -= half_form_drift(action, model, xi, x0);
    Real jac = 1.0;
    for (int j = 1; j < d; ++j) jac *= t;
    const ChartPoint q = complex_flow(action, model, xi, 1.0, x0);
    return tau(action, model, xi, x0) * f.eval(q) * std::exp(expo) * jac;
  };
  return integrate_gk(g, 0.0, R, rel_tol, 1e-280, 40);
}

Real ball_integral(const ActionSpec& action, const ModelManifold& model,
                   const ChartPoint& x0, int k, const Observable& f,
                   bool corrected, const DensityOptions& opts, int angular,
                   Real rel_tol) {
  const int d = action.dim();
  const Real R = truncation_radius(action, model, x0, k, opts.tail_exponent);
  KahanSum sum;
  if (d == 1) {
    for (Real sgn : {-1.0, 1.0}) {
      Vec dir(1);
      dir[0] = sgn;
      sum.add(ray_integral(action, model, x0, k, f, corrected, dir, R, d,
                           rel_tol));
    }
  } else if (d == 2) {
    for (int j = 0; j < angular; ++j) {
      const Real th = kTwoPi * j / angular;
      Vec dir(2);
      dir << std::cos(th), std::sin(th);
      sum.add((kTwoPi / angular) * ray_integral(action, model, x0, k, f,
                                                corrected, dir, R, d, rel_tol));
    }
  } else if (d == 3) {
    Vec cx, cw;
    gauss_legendre(angular / 2 + 1, -1.0, 1.0, cx, cw);
    for (int l = 0; l < cx.size(); ++l)
      for (int j = 0; j < angular; ++j) {
        const Real th = kTwoPi * j / angular;
        const Real s = std::sqrt(std::max(0.0, 1.0 - cx[l] * cx[l]));
        Vec dir(3);
        dir << s * std::cos(th), s * std::sin(th), cx[l];
        sum.add(cw[l] * (kTwoPi / angular) *
                ray_integral(action, model, x0, k, f, corrected, dir, R, d,
                             rel_tol));
      }
  } else {
    throw StructuralError("densities support torus dimension <= 3");
  }
  return sum.value();
}

Real density_core(const ActionSpec& action, const ModelManifold& model,
                  const ChartPoint& x0, int k, const Observable& f,
                  bool corrected, const DensityOptions& opts) {
  if (moment(action, model, x0).norm() > 1e-10)
    throw PreconditionError("density requires a zero-set node");
  const ValidationReport rep = validate_scenario(model, action, k);
  if (!rep.valid(corrected))
    throw ValidationError("scenario invalid at k=" + std::to_string(k) + "\n" +
                          rep.summary());
  const int d = action.dim();
  const int angular = std::max(8, opts.ball_level / 2);
  const Real fine = ball_integral(action, model, x0, k, f, corrected, opts,
                                  angular, 1e-11);
  if (opts.check_convergence) {
    const Real coarse = ball_integral(action, model, x0, k, f, corrected, opts,
                                      (2 * angular) / 3, 1e-9);
    const Real scale = std::max(std::abs(fine), std::abs(coarse));
    if (scale > 0 && std::abs(fine - coarse) > 1e-8 * scale)
      throw NumericError("density quadrature did not converge across levels");
  }
  Real value = std::pow(k / kTwoPi, 0.5 * d) * fine;
  if (corrected)
    value *= std::pow(2.0, 0.5 * d);
  else
    value *= orbit_volume(action, model, x0);
  return value;
}

}  // namespace

Real density_I(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& x0, int k, const Observable& f,
               const DensityOptions& opts) {
  return density_core(action, model, x0, k, f, false, opts);
}

Real density_J(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& x0, int k, const Observable& f,
               const DensityOptions& opts) {
  return density_core(action, model, x0, k, f, true, opts);
}

DensityReport density_limits(const ActionSpec& action,
                             const ModelManifold& model,
                             const std::vector<ChartPoint>& nodes,
                             const std::vector<int>& ks, const Observable& f,
                             const DensityOptions& opts) {
  DensityReport rep;
  rep.observable = f.tag;
  rep.ks = ks;
  const int d = action.dim();
  for (std::size_t ik = 0; ik < ks.size(); ++ik) {
    const int k = ks[ik];
    const ValidationReport val = validate_scenario(model, action, k);
    Real maxI = -1, maxJ = -1;
    for (std::size_t in = 0; in < nodes.size(); ++in) {
      DensityRow row;
      row.node = static_cast<int>(in);
      row.k = k;
      row.moment_coords = action_coords(model, nodes[in]);
      const Real fx = f.eval(nodes[in]);
      row.I_limit =
          std::pow(2.0, -0.5 * d) * fx * orbit_volume(action, model, nodes[in]);
      row.J_limit = fx;
      if (val.valid(false)) {
        row.I = density_I(action, model, nodes[in], k, f, opts);
        row.I_dev = std::abs(row.I - row.I_limit);
        maxI = std::max(maxI, row.I_dev);
      }
      if (val.valid(true)) {
        row.J = density_J(action, model, nodes[in], k, f, opts);
        row.J_dev = std::abs(row.J - row.J_limit);
        maxJ = std::max(maxJ, row.J_dev);
      }
      rep.rows.push_back(std::move(row));
    }
    rep.max_I_dev.push_back(maxI);
    rep.max_J_dev.push_back(maxJ);
  }

  // Diagnostic log-log slope of max deviation against k.
  const auto slope = [&](const std::vector<Real>& devs) {
    std::vector<Real> lx, ly;
    for (std::size_t i = 0; i < devs.size(); ++i)
      if (devs[i] > 0) {
        lx.push_back(std::log(static_cast<Real>(ks[i])));
        ly.push_back(std::log(devs[i]));
      }
    if (lx.size() < 2) return 0.0;
    const int m = static_cast<int>(lx.size());
    Mat A(m, 2);
    Vec y(m);
    for (int i = 0; i < m; ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = lx[i];
      y[i] = ly[i];
    }
    return static_cast<Real>(A.colPivHouseholderQr().solve(y)[1]);
  };
  rep.I_slope = slope(rep.max_I_dev);
  rep.J_slope = slope(rep.max_J_dev);
  return rep;
}

}  // namespace gqred
