#pragma once

#include <cstddef>
#include <vector>

#include "rectnet/matrix.hpp"
#include "rectnet/net.hpp"
#include "rectnet/subset.hpp"

namespace rectnet {

// An affine functional of the input and the rectified layer activations.
// This is exactly the shape of an output head, and the depth transformations
// build their new heads out of these, so the two share one type.
using FeatureLinear = OutputHead;

inline FeatureLinear zero_form(std::size_t input_dim,
                               const std::vector<std::size_t>& widths) {
  FeatureLinear f;
  f.c = 0.0;
  f.a0.assign(input_dim, 0.0);
  for (std::size_t w : widths) f.a.emplace_back(w, 0.0);
  return f;
}

inline FeatureLinear zero_like(const FeatureLinear& shape) {
  FeatureLinear f;
  f.c = 0.0;
  f.a0.assign(shape.a0.size(), 0.0);
  f.a.resize(shape.a.size());
  for (std::size_t k = 0; k < shape.a.size(); ++k) f.a[k].assign(shape.a[k].size(), 0.0);
  return f;
}

// dst += alpha * src, shape-checked.
inline void accumulate(FeatureLinear& dst, double alpha, const FeatureLinear& src) {
  if (dst.a0.size() != src.a0.size() || dst.a.size() != src.a.size())
    throw DimensionMismatch("accumulate: forms have different shapes");
  dst.c += alpha * src.c;
  axpy(dst.a0, alpha, src.a0);
  for (std::size_t k = 0; k < dst.a.size(); ++k) axpy(dst.a[k], alpha, src.a[k]);
}

/**
 * Rewrites a nonnegative combination of rectified values as a max of affine
 * forms:
 *
 *   sum_i a_i relu(f_i)  ==  max over the 2^n subsets S of  sum_{i in S} a_i f_i
 *
 * The identity needs every a_i >= 0: the max over subsets picks, per i,
 * whichever of {0, a_i f_i} is larger, which is a_i relu(f_i) exactly when
 * a_i cannot flip the sign. Subsets come back in SubsetEnumerator order, so
 * the first form is identically zero and the last sums all n terms.
 */
inline std::vector<FeatureLinear> subset_expand(const Vector& a,
                                                const std::vector<FeatureLinear>& forms) {
  if (a.size() != forms.size())
    throw DimensionMismatch("subset_expand: " + std::to_string(a.size()) +
                            " coefficients for " + std::to_string(forms.size()) +
                            " forms");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] < 0.0)
      throw NegativeCoefficient("subset_expand: coefficient " + std::to_string(i) +
                                " is negative");
  SubsetEnumerator subsets(a.size());
  const std::uint64_t rows = subsets.row_count();

  std::vector<FeatureLinear> out;
  out.reserve(rows);
  if (forms.empty()) {
    out.emplace_back();  // the empty combination; caller supplies the shape
    return out;
  }
  out.push_back(zero_like(forms[0]));
  // Row j differs from row (j with its lowest bit cleared) by exactly one
  // term, so each subset costs one accumulate.
  for (std::uint64_t mask = 1; mask < rows; ++mask) {
    const std::uint64_t low = mask & (mask - 1);
    const std::size_t i = static_cast<std::size_t>(__builtin_ctzll(mask));
    FeatureLinear f = out[low];
    accumulate(f, a[i], forms[i]);
    out.push_back(std::move(f));
  }
  return out;
}

// Indices of strictly positive coefficients, indices of the rest, and the
// corresponding magnitudes. Zeros land in the nonpositive class with
// magnitude zero, so reassembly is exact. Indices are 0-based and ascending.
struct SplitCoefficients {
  std::vector<std::size_t> pos_idx;
  std::vector<std::size_t> neg_idx;
  Vector a_plus;       // a[i] for i in pos_idx
  Vector a_minus_abs;  // -a[i] for i in neg_idx (>= 0)
};

inline SplitCoefficients sign_split(const Vector& a) {
  SplitCoefficients s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) {
      s.pos_idx.push_back(i);
      s.a_plus.push_back(a[i]);
    } else {
      s.neg_idx.push_back(i);
      s.a_minus_abs.push_back(-a[i]);
    }
  }
  return s;
}

inline Vector reassemble(const SplitCoefficients& s, std::size_t n) {
  Vector a(n, 0.0);
  for (std::size_t k = 0; k < s.pos_idx.size(); ++k) a[s.pos_idx[k]] = s.a_plus[k];
  for (std::size_t k = 0; k < s.neg_idx.size(); ++k) a[s.neg_idx[k]] = -s.a_minus_abs[k];
  return a;
}

/**
 * The three vectors tied together by the mirror identity. Given one layer
 * z = W relu(p) + b applied to a previous pre-activation p, define
 *
 *   bypass  = W p + b              (the layer applied without the rectifier)
 *   mirror  = bypass - W relu(p)   (equivalently -W relu(-p) + b)
 *
 * The unrectified sum z + mirror == b + bypass holds for every p. The
 * rectified form relu(z) + relu(mirror) == relu(b) + relu(bypass) needs
 * {z, mirror} and {b, bypass} to coincide as sets, which requires the
 * components of p to share one sign: if p >= 0 then z = bypass and
 * mirror = b, if p <= 0 the roles swap. That always holds when p is scalar.
 * With dim(p) >= 2 and mixed signs the rectified identity fails (e.g.
 * W = [1 1], b = 0, p = (1, -2) gives 1 on the left, 0 on the right), so the
 * sign-trading step that swaps a negative head coefficient on relu(z) for a
 * positive one on relu(mirror) is exact only on that sign-uniform envelope.
 */
struct MirrorTerms {
  Vector z;       // W relu(p) + b
  Vector mirror;  // -W relu(p) + W p + b
  Vector bypass;  // W p + b
};

inline MirrorTerms mirror_identity_terms(const Matrix& w, const Vector& b,
                                         const Vector& p) {
  if (b.size() != w.rows)
    throw DimensionMismatch("mirror_identity_terms: bias length " +
                            std::to_string(b.size()) + " for " + shape_str(w));
  MirrorTerms t;
  Vector wr = matvec(w, relu(p));
  t.bypass = vec_add(matvec(w, p), b);
  t.z = vec_add(wr, b);
  t.mirror = t.bypass;
  for (std::size_t i = 0; i < t.mirror.size(); ++i) t.mirror[i] -= wr[i];
  return t;
}

}  // namespace rectnet
