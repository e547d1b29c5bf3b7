#ifndef GQRED_EXTERIOR_HPP
#define GQRED_EXTERIOR_HPP

#include <vector>

#include "gqred/types.hpp"

namespace gqred {

// Complex-valued alternating k-form on a real tangent space of dimension
// <= 16, with components indexed by bitmask over the coordinate basis.
// Used for Liouville forms, half-form squares and the contraction/descent
// algebra on explicit frames.
class AltForm {
 public:
  AltForm(int dim, int degree)
      : dim_(dim), degree_(degree), comp_(std::size_t(1) << dim, Complex(0, 0)) {
    if (dim < 0 || dim > 16) throw StructuralError("AltForm dimension out of range");
    if (degree < 0 || degree > dim) throw StructuralError("AltForm degree out of range");
  }

  static AltForm scalar(int dim, Complex value) {
    AltForm f(dim, 0);
    f.comp_[0] = value;
    return f;
  }

  static AltForm covector(const CVec& comps) {
    AltForm f(static_cast<int>(comps.size()), 1);
    for (int i = 0; i < comps.size(); ++i) f.comp_[std::size_t(1) << i] = comps[i];
    return f;
  }

  static AltForm two_form(const Mat& omega) {
    AltForm f(static_cast<int>(omega.rows()), 2);
    for (int p = 0; p < omega.rows(); ++p)
      for (int q = p + 1; q < omega.cols(); ++q)
        f.comp_[(std::size_t(1) << p) | (std::size_t(1) << q)] = omega(p, q);
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  Complex component(unsigned mask) const { return comp_[mask]; }
  Complex& component(unsigned mask) { return comp_[mask]; }

  AltForm operator*(Complex c) const {
    AltForm r(*this);
    for (auto& v : r.comp_) v *= c;
    return r;
  }

  AltForm operator+(const AltForm& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_)
      throw StructuralError("AltForm shape mismatch");
    AltForm r(*this);
    for (std::size_t i = 0; i < comp_.size(); ++i) r.comp_[i] += o.comp_[i];
    return r;
  }

  AltForm conjugate() const {
    AltForm r(*this);
    for (auto& v : r.comp_) v = std::conj(v);
    return r;
  }

  AltForm wedge(const AltForm& o) const {
    if (o.dim_ != dim_) throw StructuralError("AltForm dimension mismatch");
    AltForm r(dim_, degree_ + o.degree_);
    const unsigned full = 1u << dim_;
    for (unsigned a = 0; a < full; ++a) {
      if (popcount(a) != degree_ || comp_[a] == Complex(0, 0)) continue;
      for (unsigned b = 0; b < full; ++b) {
        if ((a & b) != 0 || popcount(b) != o.degree_) continue;
        const Complex vb = o.comp_[b];
        if (vb == Complex(0, 0)) continue;
        r.comp_[a | b] += shuffle_sign(a, b) * comp_[a] * vb;
      }
    }
    return r;
  }

  // Contraction in the first slot: (i_v f)(w_2,...) = f(v, w_2, ...).
  AltForm interior(const CVec& v) const {
    if (v.size() != dim_) throw StructuralError("vector dimension mismatch");
    if (degree_ == 0) throw StructuralError("cannot contract a 0-form");
    AltForm r(dim_, degree_ - 1);
    const unsigned full = 1u << dim_;
    for (unsigned s = 0; s < full; ++s) {
      if (popcount(s) != degree_ || comp_[s] == Complex(0, 0)) continue;
      int pos = 0;
      for (int bit = 0; bit < dim_; ++bit) {
        const unsigned m = 1u << bit;
        if (!(s & m)) continue;
        const Real sign = (pos % 2 == 0) ? 1.0 : -1.0;
        r.comp_[s & ~m] += sign * v[bit] * comp_[s];
        ++pos;
      }
    }
    return r;
  }

  // f(v_1, ..., v_k) by repeated contraction.
  Complex eval(const std::vector<CVec>& vectors) const {
    if (static_cast<int>(vectors.size()) != degree_)
      throw StructuralError("eval needs exactly degree-many vectors");
    AltForm cur(*this);
    for (const auto& v : vectors) cur = cur.interior(v);
    return cur.comp_[0];
  }

  static AltForm wedge_power(const AltForm& w, int p) {
    AltForm r = scalar(w.dim(), Complex(1, 0));
    for (int i = 0; i < p; ++i) r = r.wedge(w);
    return r;
  }

 private:
  static int popcount(unsigned x) { return __builtin_popcount(x); }

  // Sign of the permutation sorting the concatenation (a-bits, b-bits).
  static Real shuffle_sign(unsigned a, unsigned b) {
    int inversions = 0;
    for (unsigned bb = b; bb; bb &= bb - 1) {
      const int bit = __builtin_ctz(bb);
      inversions += popcount(a >> (bit + 1));
    }
    return (inversions % 2 == 0) ? 1.0 : -1.0;
  }

  int dim_;
  int degree_;
  std::vector<Complex> comp_;
};

// Orientation constant relating dz_1^..^dz_p^dzbar_1^..^dzbar_p products to
// the chart volume: dz^p ^ dzbar^p = kappa(p) * 2^p dV. Fixed once so the
// half-form pairing of a chart form with itself is positive.
inline Complex pairing_orientation(int p) {
  // (-1)^{p(p-1)/2} (-i)^p
  Complex k(1, 0);
  for (int j = 0; j < p; ++j) k *= Complex(0, -1);
  if (((p * (p - 1) / 2) % 2) != 0) k = -k;
  return k;
}

}  // namespace gqred

#endif
