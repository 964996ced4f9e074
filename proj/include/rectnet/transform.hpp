#pragma once

#include <numeric>
#include <string>

#include "rectnet/transform_plain.hpp"
#include "rectnet/transform_residual.hpp"
#include "rectnet/transform_skip.hpp"

namespace rectnet {

// Which one-step rule applies to this stack as it is now.
inline std::string step_rule(const LayerStack& s) {
  switch (s.kind) {
    case NetKind::Plain: return "plain";
    case NetKind::FullSkip: return "full_skip";
    case NetKind::Residual:
      return s.depth() % 2 == 0 ? "residual_even" : "residual_odd";
  }
  return "plain";
}

inline LayerStack reduce_stack(const LayerStack& s) {
  switch (s.kind) {
    case NetKind::Plain: return reduce_stack_plain(s);
    case NetKind::FullSkip: return reduce_stack_skip(s);
    case NetKind::Residual: return reduce_stack_residual(s);
  }
  throw InvalidNet("reduce: unknown net kind");
}

inline MaxRectifierNet reduce_step(const MaxRectifierNet& net,
                                   const ReduceOptions& opts = {}) {
  switch (net.stack.kind) {
    case NetKind::Plain: return reduce_depth_plain(net, opts);
    case NetKind::FullSkip: return reduce_depth_skip(net, opts);
    case NetKind::Residual: return reduce_depth_residual(net, opts);
  }
  throw InvalidNet("reduce: unknown net kind");
}

inline MaxRectifierNet reduce_step(const RectifierNet& net,
                                   const ReduceOptions& opts = {}) {
  return reduce_step(as_max_net(net), opts);
}

/**
 * Plays the whole collapse on widths alone: no weights are touched and no
 * heads are built, so this is cheap even where the head count would be
 * astronomically large. The returned head_exponent is the base-2 log of the
 * head-count growth factor of a full collapse (the sum of the width of each
 * layer at the moment it is removed); realized nets match it exactly when
 * pruning and dedup are off.
 */
inline TransformReport collapse_plan(const LayerStack& stack) {
  require_valid(stack);
  TransformReport rep;
  rep.family = to_string(stack.kind);
  LayerStack cur = stack;
  while (cur.depth() > 1) {
    rep.rule_per_step.push_back(step_rule(cur));
    if (cur.kind == NetKind::Residual)
      rep.parity_per_step.push_back(cur.depth() % 2 == 0 ? "even" : "odd");
    rep.head_exponent += cur.widths.back();
    cur = reduce_stack(cur);
    rep.widths_per_step.push_back(cur.widths);
    ++rep.steps;
  }
  rep.final_width = std::accumulate(cur.widths.begin(), cur.widths.end(),
                                    std::size_t(0));
  return rep;
}

struct CollapseResult {
  MaxRectifierNet net;
  TransformReport report;
};

// Applies the appropriate one-step reduction until a single hidden layer
// remains. The projected head exponent is checked against the cap before
// any head is built; pruning or dedup may end up below the projection, but
// the cap guards the worst case.
inline CollapseResult collapse(const MaxRectifierNet& net, const ReduceOptions& opts = {}) {
  if (net.heads.empty()) throw EmptyHeads("collapse: net has no heads");
  TransformReport plan = collapse_plan(net.stack);
  if (!opts.force) {
    unsigned long long log_heads = 0;
    while ((std::uint64_t(1) << log_heads) < net.heads.size()) ++log_heads;
    const unsigned long long projected = plan.head_exponent + log_heads;
    if (projected > opts.head_cap)
      throw CapExceeded(projected, opts.head_cap,
                        "collapse would produce 2^" + std::to_string(projected) +
                            " heads (cap 2^" + std::to_string(opts.head_cap) + ")");
  }
  CollapseResult res;
  res.net = net;
  res.report.family = plan.family;
  while (res.net.stack.depth() > 1) {
    res.report.rule_per_step.push_back(step_rule(res.net.stack));
    if (res.net.stack.kind == NetKind::Residual)
      res.report.parity_per_step.push_back(
          res.net.stack.depth() % 2 == 0 ? "even" : "odd");
    res.report.head_exponent += res.net.stack.widths.back();
    res.net = reduce_step(res.net, opts);
    res.report.widths_per_step.push_back(res.net.stack.widths);
    ++res.report.steps;
  }
  res.report.final_width = std::accumulate(res.net.stack.widths.begin(),
                                           res.net.stack.widths.end(), std::size_t(0));
  return res;
}

inline CollapseResult collapse(const RectifierNet& net, const ReduceOptions& opts = {}) {
  return collapse(as_max_net(net), opts);
}

}  // namespace rectnet
