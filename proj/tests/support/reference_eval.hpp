#pragma once

// Independent straight-line evaluator used as the oracle in tests. It walks
// the stored matrices with raw index loops and never calls the library's
// forward/eval helpers, so agreement between the two is meaningful.

#include <algorithm>
#include <vector>

#include "rectnet/net.hpp"

namespace refeval {

inline std::vector<double> ref_layer_input(const rectnet::LayerStack& s,
                                           const std::vector<std::vector<double>>& acts,
                                           const std::vector<double>& x, std::size_t j) {
  return j == 0 ? x : acts[j - 1];
}

inline double ref_eval(const rectnet::LayerStack& s, const rectnet::OutputHead& head,
                       const std::vector<double>& x) {
  const std::size_t m = s.widths.size();
  std::vector<std::vector<double>> acts;  // rectified activations per layer
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t rows = s.widths[k - 1];
    std::vector<double> z(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) z[i] = s.biases[k - 1][i];
    const std::vector<double>& below = ref_layer_input(s, acts, x, k - 1);
    const rectnet::Matrix& w = s.adjacent[k - 1];
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < below.size(); ++j) z[i] += w(i, j) * below[j];
    for (const auto& [key, blk] : s.skips) {
      if (key.first != k) continue;
      const std::vector<double>& src = ref_layer_input(s, acts, x, key.second);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < src.size(); ++j) z[i] += blk(i, j) * src[j];
    }
    for (double& v : z) v = std::max(0.0, v);
    acts.push_back(std::move(z));
  }
  double value = head.c;
  for (std::size_t j = 0; j < x.size(); ++j) value += head.a0[j] * x[j];
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < acts[k].size(); ++i) value += head.a[k][i] * acts[k][i];
  return value;
}

inline double ref_eval_max(const rectnet::MaxRectifierNet& net,
                           const std::vector<double>& x) {
  double best = ref_eval(net.stack, net.heads.at(0), x);
  for (std::size_t i = 1; i < net.heads.size(); ++i)
    best = std::max(best, ref_eval(net.stack, net.heads[i], x));
  return best;
}

inline double ref_eval_max(const rectnet::RectifierNet& net,
                           const std::vector<double>& x) {
  return ref_eval(net.stack, net.head, x);
}

}  // namespace refeval
