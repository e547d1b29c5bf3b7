#ifndef GQRED_SECTIONS_HPP
#define GQRED_SECTIONS_HPP

#include <string>
#include <vector>

#include "gqred/action.hpp"
#include "gqred/manifold.hpp"
#include "gqred/types.hpp"

namespace gqred {

// Monomial basis of H(M; ell^k) or, with `corrected`, of
// H(M; ell^k (x) sqrt K). Each basis element is an exponent vector over all
// homogeneous coordinates with per-factor total degree k c_i, respectively
// k c_i - (m_i + 1)/2. Corrected monomials carry the common half-form factor
// theta with theta^2 the Euler-contracted chart volume form of each factor.
struct SectionBasis {
  int k = 0;
  bool corrected = false;
  std::vector<IVec> exponents;

  int dim() const { return static_cast<int>(exponents.size()); }
};

SectionBasis full_basis(const ModelManifold& model, int k, bool corrected);

// Coefficient vector over a monomial basis.
struct Section {
  SectionBasis basis;
  CVec coeffs;
};

Section monomial_section(const SectionBasis& basis, int index);

// Exponent vectors of the weight-condition solutions: W a = k lambda for the
// uncorrected bundle, W a = k lambda - W 1/2 with the half-form twist.
std::vector<IVec> invariant_exponents(const ActionSpec& action,
                                      const ModelManifold& model, int k,
                                      bool corrected);

// Basis holding only the invariant monomials.
SectionBasis invariant_basis(const ActionSpec& action,
                             const ModelManifold& model, int k, bool corrected);

bool is_invariant(const ActionSpec& action, const ModelManifold& model,
                  const Section& s);

// Value of the coefficient polynomial at a homogeneous representative.
Complex polynomial_value(const ModelManifold& model, const Section& s,
                         const CVec& Z);

// Chart-framed value u with u * conj(u) = |s|^2(p); products u_i conj(u_j) of
// framed values at the same point give the Hermitian pairing (s_i, s_j)(p).
Complex framed_value(const ModelManifold& model, const Section& s,
                     const ChartPoint& p);

// Pointwise magnitude |s|^2(p); for corrected sections this includes the
// half-form pairing of the common factor theta.
Real magnitude(const ModelManifold& model, const Section& s,
               const ChartPoint& p);

// nu^2 at a point, stored as the coefficient of the chart (n,0)-form
// dz_1 ^ ... ^ dz_n.
struct HalfFormValue {
  Complex nu_sq;
  std::vector<int> chart;
};

// (nu, mu)^2 from nu^2 ^ conj(mu^2) = (nu,mu)^2 kappa_n eps_omega, with the
// orientation constant kappa_n fixed so (nu, nu)^2 > 0.
Complex half_form_pairing_sq(const ModelManifold& model, const ChartPoint& p,
                             const HalfFormValue& nu, const HalfFormValue& mu);

// Square root of the pairing; the branch is chosen continuously against
// `previous` (pass (nu,nu) when stepping along a path), defaulting to the
// root with nonnegative real part.
Complex half_form_pairing(const ModelManifold& model, const ChartPoint& p,
                          const HalfFormValue& nu, const HalfFormValue& mu,
                          Complex previous = Complex(1, 0));

// (theta, theta)(p) for the common corrected-basis half-form factor.
Real corrected_half_form_factor(const ModelManifold& model,
                                const ChartPoint& p);

// L_{JX^xi} eps_omega / eps_omega at p (Liouville divergence of J X^xi),
// from the closed-form flow Jacobian.
Real divergence_ratio(const ActionSpec& action, const ModelManifold& model,
                      const Vec& xi, const ChartPoint& p);

// int_0^1 (L_{JX^xi} eps_omega / 2 eps_omega)(e^{i t xi} x0) dt.
Real half_form_drift(const ActionSpec& action, const ModelManifold& model,
                     const Vec& xi, const ChartPoint& x0);

// |s|^2(x0) e^{-k rho(xi,x0)}, with the extra drift factor for corrected
// sections; equals the direct magnitude at e^{i xi} x0.
Real predicted_magnitude_flow(const ActionSpec& action,
                              const ModelManifold& model, const Section& s,
                              const Vec& xi, const ChartPoint& x0);

// |B_k r|^2([x0]) from first principles: contract the squared half-form part
// with the generator polyvector, restrict to the horizontal subspace and
// divide by the reduced Liouville form.
Real descend_contract(const ActionSpec& action, const ModelManifold& model,
                      const Section& r, const ChartPoint& x0);

// B-orthonormal J-adapted basis (h_1, J h_1, h_2, J h_2, ...) of the
// horizontal subspace ker dPhi cap (span X)^perp at a zero-set point,
// as real 2n column vectors.
Mat horizontal_frame(const ActionSpec& action, const ModelManifold& model,
                     const ChartPoint& x0);

// Residual of the quantum operator nabla_{X^xi} - i k phi_xi (plus the Lie
// action on the half-form factor) applied to s at p, normalized by |s|.
// Vanishes exactly on invariant sections.
Real quantum_operator_residual(const ActionSpec& action,
                               const ModelManifold& model, const Section& s,
                               const Vec& xi, const ChartPoint& p);

// Plain-text exchange format: one "exponents... re im" line per coefficient.
void write_section(const std::string& path, const Section& s);
Section read_section(const std::string& path, const ModelManifold& model);

}  // namespace gqred

#endif
