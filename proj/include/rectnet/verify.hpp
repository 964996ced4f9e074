#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rectnet/counts.hpp"
#include "rectnet/expansion.hpp"
#include "rectnet/net.hpp"
#include "rectnet/rng.hpp"
#include "rectnet/transform.hpp"

namespace rectnet {

// Defaults shared by the sampling checks. The transformations multiply at
// most O(width) float operations per head, so 1e-9 relative leaves ample
// headroom over f64 accumulation error at the sizes this library targets.
struct VerifyDefaults {
  static constexpr double box_lo = -5.0;
  static constexpr double box_hi = 5.0;
  static constexpr std::size_t samples = 10000;
  static constexpr double tol = 1e-9;
  static constexpr double abs_floor = 1e-12;
};

struct EquivReport {
  std::size_t samples = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  Vector worst_x;
  double tol = VerifyDefaults::tol;
  double abs_floor = VerifyDefaults::abs_floor;
  bool passed = false;
};

// Symmetric relative difference guarded against near-zero outputs.
inline double rel_diff(double a, double b, double abs_floor) {
  const double denom = std::max(std::max(std::abs(a), std::abs(b)), abs_floor);
  return std::abs(a - b) / denom;
}

/**
 * Samples both nets at deterministic points of [lo, hi]^{input_dim} and
 * records the worst relative and absolute disagreement. Sample i depends
 * only on (seed, i), never on evaluation order. Passing means the max
 * relative error is within tol, or every disagreement is below the
 * absolute floor (outputs indistinguishable from zero noise).
 */
inline EquivReport check_pointwise(const MaxRectifierNet& a, const MaxRectifierNet& b,
                                   double lo = VerifyDefaults::box_lo,
                                   double hi = VerifyDefaults::box_hi,
                                   std::size_t n_samples = VerifyDefaults::samples,
                                   std::uint64_t seed = 0,
                                   double tol = VerifyDefaults::tol,
                                   double abs_floor = VerifyDefaults::abs_floor) {
  if (a.stack.input_dim != b.stack.input_dim)
    throw DimensionMismatch("check_pointwise: input dims " +
                            std::to_string(a.stack.input_dim) + " and " +
                            std::to_string(b.stack.input_dim));
  EquivReport rep;
  rep.samples = n_samples;
  rep.tol = tol;
  rep.abs_floor = abs_floor;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = sample_box(seed, i, a.stack.input_dim, lo, hi);
    const double fa = eval_max_rectifier(a, x);
    const double fb = eval_max_rectifier(b, x);
    const double abs_err = std::abs(fa - fb);
    const double rel_err = rel_diff(fa, fb, abs_floor);
    if (abs_err > rep.max_abs_err) rep.max_abs_err = abs_err;
    if (rel_err > rep.max_rel_err) {
      rep.max_rel_err = rel_err;
      rep.worst_x = x;
    }
  }
  rep.passed = rep.max_rel_err <= tol || rep.max_abs_err <= abs_floor;
  return rep;
}

inline EquivReport check_pointwise(const RectifierNet& a, const MaxRectifierNet& b,
                                   double lo = VerifyDefaults::box_lo,
                                   double hi = VerifyDefaults::box_hi,
                                   std::size_t n_samples = VerifyDefaults::samples,
                                   std::uint64_t seed = 0,
                                   double tol = VerifyDefaults::tol,
                                   double abs_floor = VerifyDefaults::abs_floor) {
  return check_pointwise(as_max_net(a), b, lo, hi, n_samples, seed, tol, abs_floor);
}

struct LineProbeReport {
  Vector anchor;
  Vector direction;
  std::size_t steps = 0;
  std::size_t breakpoint_count_a = 0;
  std::size_t breakpoint_count_b = 0;
  double max_slope_diff = 0.0;
  double max_value_rel_err = 0.0;
  bool slope_sequences_match = false;
  bool value_match = false;
  bool finite = false;
  bool passed = false;
};

namespace detail {

// Count maximal runs of significant consecutive-slope changes. One kink
// falling strictly inside a sampling interval perturbs two adjacent slope
// transitions, so runs are merged to count it once.
inline std::size_t count_breakpoints(const std::vector<double>& slopes, double thresh) {
  std::size_t count = 0;
  bool in_run = false;
  for (std::size_t k = 0; k + 1 < slopes.size(); ++k) {
    const bool change = std::abs(slopes[k + 1] - slopes[k]) > thresh;
    if (change && !in_run) ++count;
    in_run = change;
  }
  return count;
}

}  // namespace detail

/**
 * Restricts both nets to the segment anchor + t * direction, t in [-1, 1],
 * where each is piecewise linear in t. Slopes between consecutive samples
 * must agree wherever the functions agree, and the number of detected
 * slope-change events is reported per net. Slope comparisons are scaled by
 * the largest observed slope magnitude (floored at 1).
 */
inline LineProbeReport line_probe(const MaxRectifierNet& a, const MaxRectifierNet& b,
                                  const Vector& anchor, const Vector& direction,
                                  std::size_t n_steps = 512,
                                  double tol = VerifyDefaults::tol) {
  if (anchor.size() != a.stack.input_dim || direction.size() != a.stack.input_dim ||
      b.stack.input_dim != a.stack.input_dim)
    throw DimensionMismatch("line_probe: anchor/direction must match input_dim");
  bool nonzero = false;
  for (double d : direction) nonzero = nonzero || d != 0.0;
  if (!nonzero) throw ZeroDirection("line_probe: direction is identically zero");
  if (n_steps < 3) throw Error("line_probe: need at least 3 steps");

  LineProbeReport rep;
  rep.anchor = anchor;
  rep.direction = direction;
  rep.steps = n_steps;

  const double dt = 2.0 / double(n_steps - 1);
  std::vector<double> va(n_steps), vb(n_steps);
  Vector x(anchor.size());
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = -1.0 + dt * double(k);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = anchor[i] + t * direction[i];
    va[k] = eval_max_rectifier(a, x);
    vb[k] = eval_max_rectifier(b, x);
  }
  std::vector<double> sa(n_steps - 1), sb(n_steps - 1);
  for (std::size_t k = 0; k + 1 < n_steps; ++k) {
    sa[k] = (va[k + 1] - va[k]) / dt;
    sb[k] = (vb[k + 1] - vb[k]) / dt;
  }

  rep.finite = true;
  double slope_scale = 1.0;
  for (std::size_t k = 0; k < n_steps; ++k)
    rep.finite = rep.finite && std::isfinite(va[k]) && std::isfinite(vb[k]);
  for (std::size_t k = 0; k + 1 < n_steps; ++k) {
    rep.finite = rep.finite && std::isfinite(sa[k]) && std::isfinite(sb[k]);
    slope_scale = std::max(slope_scale, std::max(std::abs(sa[k]), std::abs(sb[k])));
  }

  for (std::size_t k = 0; k + 1 < n_steps; ++k)
    rep.max_slope_diff = std::max(rep.max_slope_diff, std::abs(sa[k] - sb[k]));
  rep.slope_sequences_match = rep.max_slope_diff <= tol * slope_scale;

  for (std::size_t k = 0; k < n_steps; ++k)
    rep.max_value_rel_err = std::max(
        rep.max_value_rel_err, rel_diff(va[k], vb[k], VerifyDefaults::abs_floor));
  rep.value_match = rep.max_value_rel_err <= tol;

  // Slope changes below this are indistinguishable from float noise.
  const double bp_thresh = 1e-6 * slope_scale;
  rep.breakpoint_count_a = detail::count_breakpoints(sa, bp_thresh);
  rep.breakpoint_count_b = detail::count_breakpoints(sb, bp_thresh);

  rep.passed = rep.finite && rep.slope_sequences_match && rep.value_match;
  return rep;
}

struct GradientReport {
  std::size_t requested = 0;
  std::size_t retained = 0;
  std::size_t skipped = 0;  // candidates rejected by the stability filter
  double max_grad_diff = 0.0;
  double fd_step = 1e-5;
  double tol = 1e-6;
  bool passed = false;
};

namespace detail {

inline Vector fd_gradient(const MaxRectifierNet& net, const Vector& x, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = eval_max_rectifier(net, xp);
    xp[i] = x[i] - h;
    const double fm = eval_max_rectifier(net, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

/**
 * Compares central finite-difference gradients of both nets at points where
 * the gradient is stable, i.e. unchanged (within 10x tol) when the step is
 * halved, for both nets. Points near kinks fail that filter and are skipped
 * and counted; candidates are drawn deterministically from (seed, index)
 * until `n_points` stable ones are found or the attempt budget runs out.
 */
inline GradientReport check_gradient_consistency(
    const MaxRectifierNet& a, const MaxRectifierNet& b, double lo = VerifyDefaults::box_lo,
    double hi = VerifyDefaults::box_hi, std::size_t n_points = 100,
    std::uint64_t seed = 0, double fd_step = 1e-5, double tol = 1e-6) {
  if (a.stack.input_dim != b.stack.input_dim)
    throw DimensionMismatch("check_gradient_consistency: input dims differ");
  GradientReport rep;
  rep.requested = n_points;
  rep.fd_step = fd_step;
  rep.tol = tol;
  const std::size_t max_attempts = 50 * n_points;
  for (std::size_t i = 0; i < max_attempts && rep.retained < n_points; ++i) {
    const Vector x = sample_box(seed, i, a.stack.input_dim, lo, hi);
    const Vector ga = detail::fd_gradient(a, x, fd_step);
    const Vector ga2 = detail::fd_gradient(a, x, fd_step / 2.0);
    if (detail::max_abs_diff(ga, ga2) > 10.0 * tol) {
      ++rep.skipped;
      continue;
    }
    const Vector gb = detail::fd_gradient(b, x, fd_step);
    const Vector gb2 = detail::fd_gradient(b, x, fd_step / 2.0);
    if (detail::max_abs_diff(gb, gb2) > 10.0 * tol) {
      ++rep.skipped;
      continue;
    }
    ++rep.retained;
    rep.max_grad_diff = std::max(rep.max_grad_diff, detail::max_abs_diff(ga2, gb2));
  }
  rep.passed = rep.retained == n_points && rep.max_grad_diff <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Property suite

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string details;
  std::string repro;  // CLI invocation reproducing the check
};

struct PropertySuiteReport {
  std::vector<PropertyResult> results;
  bool all_passed() const {
    for (const PropertyResult& r : results)
      if (!r.passed) return false;
    return true;
  }
};

namespace detail {

inline std::string widths_str(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

// All width vectors of length depth with entries 1..max_width, in
// lexicographic order.
inline std::vector<std::vector<std::size_t>> width_grid(std::size_t depth,
                                                        std::size_t max_width) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(depth, 1);
  while (true) {
    out.push_back(cur);
    std::size_t i = depth;
    while (i > 0 && cur[i - 1] == max_width) cur[--i] = 1;
    if (i == 0) break;
    ++cur[i - 1];
  }
  return out;
}

}  // namespace detail

/**
 * Runs the family's invariants over a bounded grid of shapes and seeds:
 * the subset-expansion and mirror identities, one-step function
 * preservation, structural count laws against the collapse bookkeeping,
 * small-case collapse equivalence, and (residual only) the closed-form
 * versus recurrence reconciliation. Grids must stay small enough that every
 * materialized collapse fits the default head cap.
 */
inline PropertySuiteReport run_property_suite(NetKind family, std::size_t max_m,
                                              std::size_t max_width,
                                              const std::vector<std::uint64_t>& seeds,
                                              double tol = VerifyDefaults::tol) {
  PropertySuiteReport suite;
  const std::size_t input_dim = 2;

  // Identity of the subset expansion on random nonnegative combinations.
  {
    PropertyResult res;
    res.name = "subset_expansion_identity";
    res.passed = true;
    res.repro = "library check: subset_expand on random coefficient/form draws";
    std::size_t instances = 0;
    for (std::uint64_t seed : seeds) {
      for (std::size_t n = 1; n <= 3 && res.passed; ++n) {
        SplitMix64 g(splitmix_hash(seed) ^ (0x5be5u + n));
        Vector a(n);
        for (double& e : a) e = g.uniform(0.0, 2.0);
        std::vector<FeatureLinear> forms;
        for (std::size_t i = 0; i < n; ++i) {
          FeatureLinear f = zero_form(input_dim, {});
          f.c = g.symmetric(2.0);
          for (double& e : f.a0) e = g.symmetric(2.0);
          forms.push_back(std::move(f));
        }
        std::vector<FeatureLinear> combos = subset_expand(a, forms);
        ++instances;
        for (std::size_t pt = 0; pt < 100 && res.passed; ++pt) {
          Vector x(input_dim);
          for (double& e : x) e = g.symmetric(5.0);
          double direct = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            direct += a[i] * std::max(0.0, forms[i].c + dot(forms[i].a0, x));
          double best = combos[0].c + dot(combos[0].a0, x);
          for (const FeatureLinear& cb : combos)
            best = std::max(best, cb.c + dot(cb.a0, x));
          if (rel_diff(direct, best, VerifyDefaults::abs_floor) > 1e-12 &&
              std::abs(direct - best) > VerifyDefaults::abs_floor) {
            res.passed = false;
            res.details = "mismatch at seed " + std::to_string(seed) + ", n " +
                          std::to_string(n);
          }
        }
      }
    }
    if (res.passed) res.details = std::to_string(instances) + " instances";
    suite.results.push_back(std::move(res));
  }

  // Mirror identity relu(z) + relu(mirror) == relu(b) + relu(bypass).
  {
    PropertyResult res;
    res.name = "mirror_identity";
    res.passed = true;
    res.repro = "library check: mirror_identity_terms on random layer draws";
    for (std::uint64_t seed : seeds) {
      SplitMix64 g(splitmix_hash(seed) ^ 0x3157u);
      for (std::size_t inst = 0; inst < 10 && res.passed; ++inst) {
        const std::size_t rows = 1 + g.next() % 3, cols = 1 + g.next() % 3;
        Matrix w(rows, cols);
        for (double& e : w.data) e = g.symmetric(2.0);
        Vector b(rows);
        for (double& e : b) e = g.symmetric(2.0);
        for (std::size_t pt = 0; pt < 100 && res.passed; ++pt) {
          Vector p(cols);
          for (double& e : p) e = g.symmetric(5.0);
          MirrorTerms t = mirror_identity_terms(w, b, p);
          for (std::size_t i = 0; i < rows; ++i) {
            const double lhs = std::max(0.0, t.z[i]) + std::max(0.0, t.mirror[i]);
            const double rhs = std::max(0.0, b[i]) + std::max(0.0, t.bypass[i]);
            if (rel_diff(lhs, rhs, VerifyDefaults::abs_floor) > 1e-12 &&
                std::abs(lhs - rhs) > VerifyDefaults::abs_floor) {
              res.passed = false;
              res.details = "mismatch at seed " + std::to_string(seed);
            }
          }
        }
      }
    }
    suite.results.push_back(std::move(res));
  }

  // One reduction step preserves the function.
  {
    PropertyResult res;
    res.name = "one_step_preserves_function";
    res.passed = true;
    for (std::size_t m = 2; m <= max_m && res.passed; ++m)
      for (const auto& widths : detail::width_grid(m, max_width)) {
        if (!res.passed) break;
        for (std::uint64_t seed : seeds) {
          RectifierNet net = random_net(family, input_dim, widths, seed);
          MaxRectifierNet reduced = reduce_step(net);
          EquivReport eq = check_pointwise(net, reduced, VerifyDefaults::box_lo,
                                           VerifyDefaults::box_hi, 2000, seed, tol);
          if (!eq.passed) {
            res.passed = false;
            res.details = "widths [" + detail::widths_str(widths) + "] seed " +
                          std::to_string(seed) + " max_rel_err " +
                          std::to_string(eq.max_rel_err);
            res.repro = std::string("rectnet gen ") + to_string(family) + " 2 " +
                        detail::widths_str(widths) + " --seed " +
                        std::to_string(seed) +
                        " --out net.json && rectnet reduce net.json red.json && "
                        "rectnet verify net.json red.json";
            break;
          }
        }
      }
    if (res.passed) {
      res.details = "grid m<=" + std::to_string(max_m) + ", widths<=" +
                    std::to_string(max_width) + ", " + std::to_string(seeds.size()) +
                    " seeds";
      res.repro = std::string("rectnet gen ") + to_string(family) +
                  " 2 <widths> --seed <seed> --out net.json && rectnet reduce "
                  "net.json red.json && rectnet verify net.json red.json";
    }
    suite.results.push_back(std::move(res));
  }

  // Structural count law: the collapse bookkeeping must land exactly on the
  // family's formula/recurrence, and materialized head counts must realize
  // 2^exponent where small enough to build.
  {
    PropertyResult res;
    res.name = "collapse_matches_count_law";
    res.passed = true;
    for (std::size_t m = 1; m <= max_m && res.passed; ++m)
      for (const auto& widths : detail::width_grid(m, max_width)) {
        Counts predicted;
        switch (family) {
          case NetKind::Plain: predicted = counts_plain(widths); break;
          case NetKind::FullSkip: predicted = counts_skip(widths); break;
          case NetKind::Residual:
            predicted = counts_residual(widths).recurrence;
            break;
        }
        LayerStack stack =
            random_net(family, input_dim, widths, seeds.empty() ? 1 : seeds[0]).stack;
        TransformReport plan = collapse_plan(stack);
        if (plan.final_width != predicted.width ||
            plan.head_exponent != predicted.exponent) {
          res.passed = false;
          res.details = "widths [" + detail::widths_str(widths) + "]: plan (" +
                        std::to_string(plan.final_width) + ", 2^" +
                        std::to_string(plan.head_exponent) + ") vs formula (" +
                        std::to_string(predicted.width) + ", 2^" +
                        std::to_string(predicted.exponent) + ")";
          break;
        }
        if (predicted.exponent <= 14) {
          RectifierNet net =
              random_net(family, input_dim, widths, seeds.empty() ? 1 : seeds[0]);
          ReduceOptions opts;
          opts.head_cap = 20;
          CollapseResult cr = collapse(net, opts);
          const std::size_t want_heads = std::size_t(1) << predicted.exponent;
          if (cr.net.heads.size() != want_heads ||
              cr.net.stack.widths[0] != predicted.width) {
            res.passed = false;
            res.details = "widths [" + detail::widths_str(widths) +
                          "]: realized heads " + std::to_string(cr.net.heads.size()) +
                          ", width " + std::to_string(cr.net.stack.widths[0]);
            break;
          }
        }
      }
    if (res.passed)
      res.details = "grid m<=" + std::to_string(max_m) + ", widths<=" +
                    std::to_string(max_width);
    res.repro = std::string("rectnet gen ") + to_string(family) +
                " 2 <widths> --seed 1 --out net.json && rectnet collapse net.json "
                "flat.json && rectnet counts net.json";
    suite.results.push_back(std::move(res));
  }

  // Full collapse preserves the function where the head count stays small.
  {
    PropertyResult res;
    res.name = "collapse_preserves_function";
    res.passed = true;
    std::size_t checked = 0;
    for (std::size_t m = 2; m <= max_m && res.passed; ++m)
      for (const auto& widths : detail::width_grid(m, max_width)) {
        if (!res.passed) break;
        Counts predicted;
        switch (family) {
          case NetKind::Plain: predicted = counts_plain(widths); break;
          case NetKind::FullSkip: predicted = counts_skip(widths); break;
          case NetKind::Residual:
            predicted = counts_residual(widths).recurrence;
            break;
        }
        if (predicted.exponent > 10) continue;
        for (std::uint64_t seed : seeds) {
          RectifierNet net = random_net(family, input_dim, widths, seed);
          CollapseResult cr = collapse(net);
          EquivReport eq = check_pointwise(net, cr.net, VerifyDefaults::box_lo,
                                           VerifyDefaults::box_hi, 1000, seed, tol);
          ++checked;
          if (!eq.passed) {
            res.passed = false;
            res.details = "widths [" + detail::widths_str(widths) + "] seed " +
                          std::to_string(seed) + " max_rel_err " +
                          std::to_string(eq.max_rel_err);
            break;
          }
        }
      }
    if (res.passed) res.details = std::to_string(checked) + " collapses checked";
    res.repro = std::string("rectnet gen ") + to_string(family) +
                " 2 <widths> --seed <seed> --out net.json && rectnet collapse "
                "net.json flat.json && rectnet verify net.json flat.json";
    suite.results.push_back(std::move(res));
  }

  if (family == NetKind::Residual) {
    // The closed-form exponent must match the recurrence everywhere on the
    // grid; the closed-form width must match exactly for even depth and the
    // mismatch flag must fire for odd depth >= 3 (known discrepancy).
    PropertyResult res;
    res.name = "closed_form_exponent_matches_recurrence";
    res.passed = true;
    for (std::size_t m = 1; m <= max_m && res.passed; ++m)
      for (const auto& widths : detail::width_grid(m, max_width)) {
        ResidualCounts rc = counts_residual(widths);
        if (rc.exponent_mismatch) {
          res.passed = false;
          res.details = "exponent mismatch at [" + detail::widths_str(widths) + "]";
          break;
        }
        if (m % 2 == 0 && rc.width_mismatch) {
          res.passed = false;
          res.details = "even-depth width mismatch at [" + detail::widths_str(widths) + "]";
          break;
        }
        if (m >= 3 && m % 2 == 1 && !rc.width_mismatch) {
          res.passed = false;
          res.details = "odd-depth width mismatch not flagged at [" +
                        detail::widths_str(widths) + "]";
          break;
        }
      }
    if (res.passed)
      res.details = "grid m<=" + std::to_string(max_m) + ", widths<=" +
                    std::to_string(max_width);
    res.repro = "rectnet counts net.json  (residual net file)";
    suite.results.push_back(std::move(res));
  }

  return suite;
}

}  // namespace rectnet
