#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "rectnet/transform_common.hpp"

namespace rectnet {

/**
 * The two unit groups appended when the last layer of a full-skip net is
 * removed. Both are affine in the surviving activations and the input:
 *
 *   z0      = b_m + sum over sources s <= m-2 of W_{m,s} act_s
 *             (layer m with its dependence on layer m-1 deleted)
 *   bypass  = z0 + W_{m,m-1} z_{m-1}
 *           = (b_m + W_{m,m-1} b_{m-1}) + sum_s (W_{m,s} + W_{m,m-1} W_{m-1,s}) act_s
 *             (layer m applied to the un-rectified layer m-1)
 *
 * Sources are layer numbers with 0 meaning the input; a missing entry is a
 * zero block. A bypass block is materialized whenever either contributor
 * exists, so presence never silently drops a computed value.
 */
struct SkipReductionPlan {
  Vector z0_bias;
  std::map<std::size_t, Matrix> z0_blocks;
  Vector bypass_bias;
  std::map<std::size_t, Matrix> bypass_blocks;
};

namespace detail {

// Block feeding layer `to` from layer `from` (0 = input); adjacency and
// skip blocks are looked up uniformly. Null when absent.
inline const Matrix* stack_block(const LayerStack& s, std::size_t to, std::size_t from) {
  if (from + 1 == to) return &s.adjacent[to - 1];
  return s.skip_block(to, from);
}

}  // namespace detail

inline SkipReductionPlan make_skip_reduction_plan(const LayerStack& s) {
  if (s.kind != NetKind::FullSkip)
    throw NotFullSkip(std::string("skip reduction: net kind is ") + to_string(s.kind));
  if (s.depth() < 2) throw DepthTooSmall("skip reduction: need at least 2 layers");
  require_valid(s);

  const std::size_t m = s.depth();
  const Matrix& w_adj = s.adjacent[m - 1];  // W_{m,m-1}
  SkipReductionPlan plan;
  plan.z0_bias = s.biases[m - 1];
  plan.bypass_bias = vec_add(matvec(w_adj, s.biases[m - 2]), s.biases[m - 1]);
  for (std::size_t src = 0; src + 2 <= m; ++src) {
    const Matrix* direct = s.skip_block(m, src);
    const Matrix* prev = detail::stack_block(s, m - 1, src);
    if (direct) plan.z0_blocks[src] = *direct;
    if (prev) {
      Matrix byp = matmul(w_adj, *prev);
      if (direct) byp = mat_add(byp, *direct);
      plan.bypass_blocks[src] = std::move(byp);
    } else if (direct) {
      plan.bypass_blocks[src] = *direct;
    }
  }
  return plan;
}

// One depth-reduction step for full-skip nets. The new last layer keeps the
// old layer m-1 units and appends the z0 and bypass groups, growing from
// l_{m-1} to l_{m-1} + 2 l_m. Head rewriting mirrors the plain case except
// that the mirror identity's constant relu(b_m) term is now input-dependent
// (it is relu(z0)), so it lands on the appended z0 units instead of being
// folded into the head constant.
inline LayerStack reduce_stack_skip(const LayerStack& s) {
  SkipReductionPlan plan = make_skip_reduction_plan(s);
  const std::size_t m = s.depth();
  const std::size_t old_w = s.widths[m - 2];
  const std::size_t drop_w = s.widths[m - 1];

  LayerStack out;
  out.kind = NetKind::FullSkip;
  out.input_dim = s.input_dim;
  out.widths.assign(s.widths.begin(), s.widths.end() - 2);
  out.widths.push_back(old_w + 2 * drop_w);
  out.adjacent.assign(s.adjacent.begin(), s.adjacent.end() - 2);
  out.biases.assign(s.biases.begin(), s.biases.end() - 2);
  for (const auto& [key, mat] : s.skips)
    if (key.first + 2 <= m) out.skips[key] = mat;  // layers below m-1 unchanged

  // Assemble the (m-1, src) blocks; each stacks the three groups' rows.
  for (std::size_t src = 0; src + 2 <= m; ++src) {
    const Matrix* old_blk = detail::stack_block(s, m - 1, src);
    auto z0_it = plan.z0_blocks.find(src);
    auto byp_it = plan.bypass_blocks.find(src);
    const bool any = old_blk || z0_it != plan.z0_blocks.end() ||
                     byp_it != plan.bypass_blocks.end();
    const bool is_adjacent = src + 2 == m;  // feeds the new layer from below
    if (!any && !is_adjacent) continue;
    const std::size_t cols = s.act_dim(src);
    Matrix blk = vstack(old_blk ? *old_blk : Matrix(old_w, cols),
                        z0_it != plan.z0_blocks.end() ? z0_it->second
                                                      : Matrix(drop_w, cols),
                        byp_it != plan.bypass_blocks.end() ? byp_it->second
                                                           : Matrix(drop_w, cols));
    if (is_adjacent)
      out.adjacent.push_back(std::move(blk));
    else
      out.skips[{m - 1, src}] = std::move(blk);
  }
  out.biases.push_back(concat(s.biases[m - 2], plan.z0_bias, plan.bypass_bias));
  return out;
}

inline MaxRectifierNet reduce_depth_skip(const MaxRectifierNet& net,
                                         const ReduceOptions& opts = {}) {
  if (net.heads.empty()) throw EmptyHeads("reduce_depth_skip: net has no heads");
  for (const OutputHead& h : net.heads) {
    auto v = validate_head(net.stack, h);
    if (!v.empty()) throw InvalidNet(v.front());
  }
  const LayerStack& s = net.stack;
  SkipReductionPlan plan = make_skip_reduction_plan(s);
  LayerStack reduced = reduce_stack_skip(s);

  const std::size_t m = s.depth();
  const std::size_t old_w = s.widths[m - 2];
  const std::size_t drop_w = s.widths[m - 1];
  detail::check_head_cap(net.heads.size(), drop_w, opts);

  const Matrix& w_adj = s.adjacent[m - 1];
  MaxRectifierNet out;
  out.stack = reduced;
  const std::size_t pi = reduced.depth() - 1;

  // Spread a (possibly absent) block's row i over the right slot of a form.
  auto add_row = [&](FeatureLinear& t, const std::map<std::size_t, Matrix>& blocks,
                     std::size_t src, std::size_t i) {
    auto it = blocks.find(src);
    if (it == blocks.end()) return;
    Vector r = row_of(it->second, i);
    if (src == 0)
      t.a0 = std::move(r);
    else
      t.a[src - 1] = std::move(r);
  };

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
      ex.base.a[pi][old_w + i] = -mag;           // z0 unit
      ex.base.a[pi][old_w + drop_w + i] = -mag;  // bypass unit
    }

    ex.coeffs = concat(split.a_plus, split.a_minus_abs);
    for (std::size_t i : split.pos_idx) {
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = plan.z0_bias[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = w_adj(i, j);
      for (std::size_t src = 0; src + 2 <= m; ++src) add_row(t, plan.z0_blocks, src, i);
      ex.terms.push_back(std::move(t));
    }
    for (std::size_t i : split.neg_idx) {
      FeatureLinear t = zero_form(reduced.input_dim, reduced.widths);
      t.c = plan.bypass_bias[i];
      for (std::size_t j = 0; j < old_w; ++j) t.a[pi][j] = -w_adj(i, j);
      for (std::size_t src = 0; src + 2 <= m; ++src)
        add_row(t, plan.bypass_blocks, src, i);
      ex.terms.push_back(std::move(t));
    }

    detail::append_expanded_heads(out.heads, ex, opts.prune_zeros);
  }
  if (opts.dedup) out.heads = dedup_heads(out.heads);
  return out;
}

inline MaxRectifierNet reduce_depth_skip(const RectifierNet& net,
                                         const ReduceOptions& opts = {}) {
  return reduce_depth_skip(as_max_net(net), opts);
}

}  // namespace rectnet
