#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "rectnet/expansion.hpp"
#include "rectnet/net.hpp"

namespace rectnet {

struct ReduceOptions {
  // Refuse to build more than 2^head_cap heads unless force is set.
  unsigned long long head_cap = 20;
  bool force = false;
  // Skip enumeration terms whose coefficient is exactly zero; the resulting
  // net has fewer heads but the same function.
  bool prune_zeros = false;
  // Drop exact duplicate heads (bitwise equality), keeping first occurrences.
  bool dedup = false;
};

// What a reduction or collapse did: which rule fired at each step, the
// hidden widths after each step, and the accumulated base-2 log of the
// head-count growth factor.
struct TransformReport {
  std::string family;
  std::size_t steps = 0;
  std::vector<std::vector<std::size_t>> widths_per_step;
  std::vector<std::string> rule_per_step;    // "plain", "full_skip",
                                             // "residual_even", "residual_odd"
  std::vector<std::string> parity_per_step;  // residual only: "even"/"odd"
  unsigned long long head_exponent = 0;
  std::size_t final_width = 0;  // sum of the final widths vector
};

namespace detail {

// One removed layer's worth of head rewriting: every head of the input net
// becomes base + (subset combination of coeffs * terms).
struct HeadExpansion {
  FeatureLinear base;
  Vector coeffs;                     // all >= 0, enumeration order
  std::vector<FeatureLinear> terms;  // over the reduced stack
};

inline void append_expanded_heads(std::vector<OutputHead>& out, const HeadExpansion& ex,
                                  bool prune_zeros) {
  Vector coeffs = ex.coeffs;
  std::vector<FeatureLinear> terms = ex.terms;
  if (prune_zeros) {
    Vector c2;
    std::vector<FeatureLinear> t2;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0.0) {
        c2.push_back(coeffs[i]);
        t2.push_back(terms[i]);
      }
    coeffs.swap(c2);
    terms.swap(t2);
  }
  if (terms.empty()) {
    out.push_back(ex.base);
    return;
  }
  std::vector<FeatureLinear> combos = subset_expand(coeffs, terms);
  for (FeatureLinear& g : combos) {
    FeatureLinear h = ex.base;
    accumulate(h, 1.0, g);
    out.push_back(std::move(h));
  }
}

inline void check_head_cap(std::size_t head_count, std::size_t grow_exponent,
                           const ReduceOptions& opts) {
  // ceil(log2(head_count)) + per-head growth must stay within the cap
  unsigned long long log_heads = 0;
  while ((std::uint64_t(1) << log_heads) < head_count) ++log_heads;
  const unsigned long long projected = log_heads + grow_exponent;
  if (!opts.force && projected > opts.head_cap)
    throw CapExceeded(projected, opts.head_cap,
                      "reduction would produce 2^" + std::to_string(projected) +
                          " heads (cap 2^" + std::to_string(opts.head_cap) + ")");
  if (grow_exponent > 62)
    throw CapExceeded(grow_exponent, 62, "head growth exponent too large to index");
}

inline std::string head_key(const OutputHead& h) {
  // Bitwise content key; exact duplicates only.
  std::string key;
  key.reserve(8 * (1 + h.a0.size()));
  auto put = [&key](double v) {
    key.append(reinterpret_cast<const char*>(&v), sizeof v);
  };
  put(h.c);
  for (double v : h.a0) put(v);
  for (const Vector& blk : h.a) {
    key.push_back('|');
    for (double v : blk) put(v);
  }
  return key;
}

}  // namespace detail

inline std::vector<OutputHead> dedup_heads(const std::vector<OutputHead>& heads) {
  std::vector<OutputHead> out;
  std::unordered_set<std::string> seen;
  for (const OutputHead& h : heads)
    if (seen.insert(detail::head_key(h)).second) out.push_back(h);
  return out;
}

}  // namespace rectnet
