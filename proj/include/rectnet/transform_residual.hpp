#pragma once

#include <cmath>
#include <vector>

#include "rectnet/transform_common.hpp"

namespace rectnet {

namespace detail {

inline void check_residual_reducible(const LayerStack& s) {
  if (s.kind != NetKind::Residual)
    throw NotResidual(std::string("reduce_depth_residual: net kind is ") +
                      to_string(s.kind));
  if (s.depth() < 2)
    throw DepthTooSmall("reduce_depth_residual: need at least 2 layers");
  require_valid(s);
}

}  // namespace detail

/**
 * One depth-reduction step for residual nets. The rule depends on the
 * parity of the depth m because skip blocks only enter odd layers:
 *
 *   m even (no skip into layer m): behaves like the plain step, except the
 *   skip into layer m-1, when present, is widened alongside it:
 *     new W_{m-1} = [ W_{m-1} ; W_m W_{m-1} ]        (l_{m-1} + l_m units)
 *     new A_{m-1} = [ A_{m-1} ; W_m A_{m-1} ]
 *     new b_{m-1} = [ b_{m-1} ; b_m + W_m b_{m-1} ]
 *
 *   m odd (skip A_m enters layer m from layer m-2): removing layer m turns
 *   A_m into ordinary adjacency from layer m-2, and two unit groups are
 *   appended (l_{m-1} + 2 l_m units):
 *     new W_{m-1} = [ W_{m-1} ; A_m ; A_m + W_m W_{m-1} ]
 *     new b_{m-1} = [ b_{m-1} ; b_m ; b_m + W_m b_{m-1} ]
 *   The middle group is layer m with its dependence on layer m-1 deleted;
 *   the last group is layer m applied to the un-rectified layer m-1. The
 *   third group's adjacency must include the A_m summand: the bypass of
 *   z_m = W_m relu(z_{m-1}) + A_m relu(z_{m-2}) + b_m keeps its skip term.
 *   No skip block survives into the widened layer (m-1 is even).
 *
 * Head rewriting follows the same positive/mirrored split as the other
 * families; for even m the mirror constant folds into the head constant,
 * for odd m it lands on the appended middle group.
 */
inline LayerStack reduce_stack_residual(const LayerStack& s) {
  detail::check_residual_reducible(s);
  const std::size_t m = s.depth();
  const std::size_t old_w = s.widths[m - 2];
  const std::size_t drop_w = s.widths[m - 1];
  const Matrix& w_last = s.adjacent[m - 1];
  const Matrix& w_prev = s.adjacent[m - 2];
  const Matrix ww = matmul(w_last, w_prev);
  const Vector bt = vec_add(matvec(w_last, s.biases[m - 2]), s.biases[m - 1]);

  LayerStack out;
  out.kind = NetKind::Residual;
  out.input_dim = s.input_dim;
  out.widths.assign(s.widths.begin(), s.widths.end() - 2);
  out.adjacent.assign(s.adjacent.begin(), s.adjacent.end() - 2);
  out.biases.assign(s.biases.begin(), s.biases.end() - 2);
  for (const auto& [key, mat] : s.skips)
    if (key.first + 2 <= m) out.skips[key] = mat;

  if (m % 2 == 0) {
    out.widths.push_back(old_w + drop_w);
    out.adjacent.push_back(vstack(w_prev, ww));
    out.biases.push_back(concat(s.biases[m - 2], bt));
    if (const Matrix* a_prev = s.skip_block(m - 1, m - 3))
      out.skips[{m - 1, m - 3}] = vstack(*a_prev, matmul(w_last, *a_prev));
  } else {
    const Matrix* a_last = s.skip_block(m, m - 2);
    const Matrix a_or_zero =
        a_last ? *a_last : Matrix(drop_w, s.act_dim(m - 2));
    out.widths.push_back(old_w + 2 * drop_w);
    out.adjacent.push_back(vstack(w_prev, a_or_zero, mat_add(a_or_zero, ww)));
    out.biases.push_back(concat(s.biases[m - 2], s.biases[m - 1], bt));
  }
  return out;
}

inline MaxRectifierNet reduce_depth_residual(const MaxRectifierNet& net,
                                             const ReduceOptions& opts = {}) {
  if (net.heads.empty()) throw EmptyHeads("reduce_depth_residual: net has no heads");
  for (const OutputHead& h : net.heads) {
    auto v = validate_head(net.stack, h);
    if (!v.empty()) throw InvalidNet(v.front());
  }
  const LayerStack& s = net.stack;
  LayerStack reduced = reduce_stack_residual(s);

  const std::size_t m = s.depth();
  const std::size_t old_w = s.widths[m - 2];
  const std::size_t drop_w = s.widths[m - 1];
  const bool even = m % 2 == 0;
  detail::check_head_cap(net.heads.size(), drop_w, opts);

  const Matrix& w_last = s.adjacent[m - 1];
  const Vector& b_last = s.biases[m - 1];
  const Matrix ww = matmul(w_last, s.adjacent[m - 2]);
  const Vector bt = vec_add(matvec(w_last, s.biases[m - 2]), b_last);
  const Matrix* a_last = even ? nullptr : s.skip_block(m, m - 2);
  const Matrix* a_prev = even && m >= 4 ? s.skip_block(m - 1, m - 3) : nullptr;
  const Matrix wa = a_prev ? matmul(w_last, *a_prev) : Matrix();

  MaxRectifierNet out;
  out.stack = reduced;
  const std::size_t pi = reduced.depth() - 1;

  // Row targeting layer m-2's activations (the input when m == 2).
  auto put_through = [&](FeatureLinear& t, Vector r) {
    if (m == 2)
      t.a0 = std::move(r);
    else
      t.a[m - 3] = std::move(r);
  };

  for (const OutputHead& h : net.heads) {
    const Vector& a_head = h.a[m - 1];
    SplitCoefficients split = sign_split(a_head);

    detail::HeadExpansion ex;
    ex.base = zero_form(reduced.input_dim, reduced.widths);
    ex.base.c = h.c;
    ex.base.a0 = h.a0;
    for (std::size_t k = 0; k + 1 < m; ++k)
      std::copy(h.a[k].begin(), h.a[k].end(), ex.base.a[k].begin());
    for (std::size_t k = 0; k < split.neg_idx.size(); ++k) {
      const std::size_t i = split.neg_idx[k];
      const double mag = split.a_minus_abs[k];
      if (even) {
        ex.base.c -= mag * std::max(0.0, b_last[i]);
        ex.base.a[pi][old_w + i] = -mag;
      } else {
        ex.base.a[pi][old_w + i] = -mag;           // middle (skip-only) unit
        ex.base.a[pi][old_w + drop_w + i] = -mag;  // bypass unit
      }
    }

    ex.coeffs = concat(split.a_plus, split.a_minus_abs);
    for (std::size_t i : split.pos_idx) {
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = b_last[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = w_last(i, j);
      if (a_last) put_through(t, row_of(*a_last, i));
      ex.terms.push_back(std::move(t));
    }
    for (std::size_t i : split.neg_idx) {
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = bt[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = -w_last(i, j);
      Vector through = row_of(ww, i);
      if (a_last) axpy(through, 1.0, row_of(*a_last, i));
      put_through(t, std::move(through));
      if (a_prev) t.a[m - 4] = row_of(wa, i);  // via the widened skip's source
      ex.terms.push_back(std::move(t));
    }

    detail::append_expanded_heads(out.heads, ex, opts.prune_zeros);
  }
  if (opts.dedup) out.heads = dedup_heads(out.heads);
  return out;
}

inline MaxRectifierNet reduce_depth_residual(const RectifierNet& net,
                                             const ReduceOptions& opts = {}) {
  return reduce_depth_residual(as_max_net(net), opts);
}

}  // namespace rectnet
