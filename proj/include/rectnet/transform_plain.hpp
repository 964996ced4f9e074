#pragma once

#include <cmath>
#include <vector>

#include "rectnet/transform_common.hpp"

namespace rectnet {

/**
 * One depth-reduction step for plain nets. The last hidden layer (m) is
 * removed and the new last layer (m-1) is widened from l_{m-1} to
 * l_{m-1} + l_m:
 *
 *   new W_{m-1} = [ W_{m-1} ; W_m W_{m-1} ]
 *   new b_{m-1} = [ b_{m-1} ; b_m + W_m b_{m-1} ]
 *
 * The appended units carry the removed layer's affine bypass, i.e. their
 * pre-activation equals W_m z_{m-1} + b_m with no rectifier in between.
 *
 * Each head trades its coefficients on relu(z_m) for max-combinations over
 * the surviving layers: strictly positive coefficients expand directly,
 * nonpositive ones go through the mirror identity first, which also charges
 * a constant -|a_i| relu(b_m[i]) to the head and puts -|a_i| on the
 * appended bypass unit. Head count multiplies by 2^{l_m}.
 */
inline LayerStack reduce_stack_plain(const LayerStack& s) {
  if (s.kind != NetKind::Plain)
    throw NotPlain(std::string("reduce_depth_plain: net kind is ") + to_string(s.kind));
  if (s.depth() < 2) throw DepthTooSmall("reduce_depth_plain: need at least 2 layers");
  require_valid(s);

  const std::size_t m = s.depth();
  const Matrix& w_last = s.adjacent[m - 1];
  const Matrix& w_prev = s.adjacent[m - 2];
  const Vector& b_last = s.biases[m - 1];
  const Vector& b_prev = s.biases[m - 2];

  LayerStack out;
  out.kind = NetKind::Plain;
  out.input_dim = s.input_dim;
  out.widths.assign(s.widths.begin(), s.widths.end() - 2);
  out.widths.push_back(s.widths[m - 2] + s.widths[m - 1]);
  out.adjacent.assign(s.adjacent.begin(), s.adjacent.end() - 2);
  out.adjacent.push_back(vstack(w_prev, matmul(w_last, w_prev)));
  out.biases.assign(s.biases.begin(), s.biases.end() - 2);
  out.biases.push_back(concat(b_prev, vec_add(matvec(w_last, b_prev), b_last)));
  return out;
}

inline MaxRectifierNet reduce_depth_plain(const MaxRectifierNet& net,
                                          const ReduceOptions& opts = {}) {
  if (net.heads.empty()) throw EmptyHeads("reduce_depth_plain: net has no heads");
  for (const OutputHead& h : net.heads) {
    auto v = validate_head(net.stack, h);
    if (!v.empty()) throw InvalidNet(v.front());
  }
  const LayerStack& s = net.stack;
  LayerStack reduced = reduce_stack_plain(s);

  const std::size_t m = s.depth();
  const std::size_t old_w = s.widths[m - 2];   // width kept at layer m-1
  const std::size_t drop_w = s.widths[m - 1];  // width of the removed layer
  detail::check_head_cap(net.heads.size(), drop_w, opts);

  const Matrix& w_last = s.adjacent[m - 1];
  const Vector& b_last = s.biases[m - 1];
  const Matrix ww = matmul(w_last, s.adjacent[m - 2]);
  const Vector bt = vec_add(matvec(w_last, s.biases[m - 2]), b_last);

  MaxRectifierNet out;
  out.stack = reduced;
  const std::size_t pi = reduced.depth() - 1;  // index of the widened layer

  for (const OutputHead& h : net.heads) {
    const Vector& a_last = h.a[m - 1];
    SplitCoefficients split = sign_split(a_last);

    detail::HeadExpansion ex;
    ex.base = zero_form(reduced.input_dim, reduced.widths);
    ex.base.c = h.c;
    ex.base.a0 = h.a0;
    for (std::size_t k = 0; k + 1 < m; ++k)
      std::copy(h.a[k].begin(), h.a[k].end(), ex.base.a[k].begin());
    for (std::size_t k = 0; k < split.neg_idx.size(); ++k) {
      const std::size_t i = split.neg_idx[k];
      const double mag = split.a_minus_abs[k];
      ex.base.c -= mag * std::max(0.0, b_last[i]);
      ex.base.a[pi][old_w + i] = -mag;
    }

    ex.coeffs = concat(split.a_plus, split.a_minus_abs);
    for (std::size_t i : split.pos_idx) {
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = b_last[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = w_last(i, j);
      ex.terms.push_back(std::move(t));
    }
    for (std::size_t i : split.neg_idx) {
      // Mirror form of unit i: -W_m on the kept units plus the bypass
      // expressed over the previous layer (the input when m == 2).
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = bt[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = -w_last(i, j);
      Vector through = row_of(ww, i);
      if (m == 2)
        t.a0 = through;
      else
        t.a[pi - 1] = through;
      ex.terms.push_back(std::move(t));
    }

    detail::append_expanded_heads(out.heads, ex, opts.prune_zeros);
  }
  if (opts.dedup) out.heads = dedup_heads(out.heads);
  return out;
}

inline MaxRectifierNet reduce_depth_plain(const RectifierNet& net,
                                          const ReduceOptions& opts = {}) {
  return reduce_depth_plain(as_max_net(net), opts);
}

}  // namespace rectnet
