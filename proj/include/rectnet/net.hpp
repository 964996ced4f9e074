#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rectnet/errors.hpp"
#include "rectnet/matrix.hpp"
#include "rectnet/rng.hpp"

namespace rectnet {

enum class NetKind { Plain, FullSkip, Residual };

inline const char* to_string(NetKind k) {
  switch (k) {
    case NetKind::Plain: return "plain";
    case NetKind::FullSkip: return "full_skip";
    case NetKind::Residual: return "residual";
  }
  return "plain";
}

inline std::optional<NetKind> kind_from_string(const std::string& s) {
  if (s == "plain") return NetKind::Plain;
  if (s == "full_skip") return NetKind::FullSkip;
  if (s == "residual") return NetKind::Residual;
  return std::nullopt;
}

/**
 * Shared hidden-layer structure of a network.
 *
 * Layers are numbered 1..m; "layer 0" denotes the input. Pre-activations
 * follow
 *
 *   z_k = W_k relu(z_{k-1}) + b_k + sum over skip blocks (k, j) of
 *         M_{k,j} * (j == 0 ? x : relu(z_j))
 *
 * with relu applied componentwise and z_0 read as x (no relu on the input).
 * `adjacent[k-1]` stores W_k, `biases[k-1]` stores b_k, and `skips` maps a
 * (to, from) pair to its block. Which skip keys are legal depends on `kind`:
 *
 *   Plain      no skip blocks at all
 *   FullSkip   any (to, from) with 0 <= from <= to - 2
 *   Residual   only (k, k-2) for odd k >= 3
 *
 * A skip key that is absent from the map is a zero block.
 */
struct LayerStack {
  NetKind kind = NetKind::Plain;
  std::size_t input_dim = 0;
  std::vector<std::size_t> widths;
  std::vector<Matrix> adjacent;
  std::vector<Vector> biases;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> skips;

  std::size_t depth() const { return widths.size(); }

  // Dimension of the activation vector of layer j (j = 0 means the input).
  std::size_t act_dim(std::size_t j) const {
    return j == 0 ? input_dim : widths[j - 1];
  }

  // Skip block (to, from), or nullptr when that block is zero/absent.
  const Matrix* skip_block(std::size_t to, std::size_t from) const {
    auto it = skips.find({to, from});
    return it == skips.end() ? nullptr : &it->second;
  }
};

/**
 * Affine readout over the input and all rectified layers:
 *
 *   value = c + a0 . x + sum_k a[k-1] . relu(z_k)
 */
struct OutputHead {
  double c = 0.0;
  Vector a0;
  std::vector<Vector> a;

  bool operator==(const OutputHead& o) const {
    return c == o.c && a0 == o.a0 && a == o.a;
  }
};

// A rectifier net computes one head over its stack; a max-rectifier net
// computes the max over several heads sharing one stack. A max-rectifier
// net with a single head is exactly a rectifier net.
struct RectifierNet {
  LayerStack stack;
  OutputHead head;
};

struct MaxRectifierNet {
  LayerStack stack;
  std::vector<OutputHead> heads;
};

inline MaxRectifierNet as_max_net(const RectifierNet& net) {
  return MaxRectifierNet{net.stack, {net.head}};
}

struct EvalTrace {
  std::vector<Vector> preactivations;  // z_1 .. z_m
  std::vector<Vector> activations;     // relu(z_1) .. relu(z_m)
  double output = 0.0;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::string block_name(std::size_t to, std::size_t from) {
  return "skip(" + std::to_string(to) + "," + std::to_string(from) + ")";
}

}  // namespace detail

// Collects human-readable descriptions of every structural violation.
// An empty result means the stack is well formed.
inline std::vector<std::string> validate(const LayerStack& s) {
  std::vector<std::string> out;
  const std::size_t m = s.depth();
  if (m == 0) out.push_back("widths: must contain at least one layer");
  if (s.input_dim == 0) out.push_back("input_dim: must be positive");
  for (std::size_t i = 0; i < m; ++i)
    if (s.widths[i] == 0)
      out.push_back("widths[" + std::to_string(i) + "]: must be positive");
  if (s.adjacent.size() != m)
    out.push_back("W: expected " + std::to_string(m) + " matrices, got " +
                  std::to_string(s.adjacent.size()));
  if (s.biases.size() != m)
    out.push_back("b: expected " + std::to_string(m) + " vectors, got " +
                  std::to_string(s.biases.size()));
  if (!out.empty()) return out;  // shapes below assume consistent counts

  for (std::size_t k = 1; k <= m; ++k) {
    const Matrix& w = s.adjacent[k - 1];
    if (w.rows != s.widths[k - 1] || w.cols != s.act_dim(k - 1))
      out.push_back("W[" + std::to_string(k) + "]: expected " +
                    std::to_string(s.widths[k - 1]) + "x" +
                    std::to_string(s.act_dim(k - 1)) + ", got " + shape_str(w));
    if (s.biases[k - 1].size() != s.widths[k - 1])
      out.push_back("b[" + std::to_string(k) + "]: expected length " +
                    std::to_string(s.widths[k - 1]) + ", got " +
                    std::to_string(s.biases[k - 1].size()));
  }

  for (const auto& [key, mat] : s.skips) {
    const auto [to, from] = key;
    const std::string name = detail::block_name(to, from);
    if (to < 2 || to > m || from + 2 > to) {
      out.push_back(name + ": must connect some layer j <= to-2 (or the input) " +
                    "to a later layer");
      continue;
    }
    switch (s.kind) {
      case NetKind::Plain:
        out.push_back(name + ": skip blocks not allowed on plain nets");
        continue;
      case NetKind::Residual:
        if (to % 2 == 0) {
          out.push_back(name + ": skip into even layer must vanish on residual nets");
          continue;
        }
        if (from + 2 != to) {
          out.push_back(name + ": residual skip must connect layer k-2 to layer k");
          continue;
        }
        break;
      case NetKind::FullSkip:
        break;  // any from <= to-2 is fine
    }
    if (mat.rows != s.widths[to - 1] || mat.cols != s.act_dim(from))
      out.push_back(name + ": expected " + std::to_string(s.widths[to - 1]) + "x" +
                    std::to_string(s.act_dim(from)) + ", got " + shape_str(mat));
  }
  return out;
}

inline std::vector<std::string> validate_head(const LayerStack& s, const OutputHead& h,
                                              const std::string& label = "head") {
  std::vector<std::string> out;
  if (h.a0.size() != s.input_dim)
    out.push_back(label + ".a0: expected length " + std::to_string(s.input_dim) +
                  ", got " + std::to_string(h.a0.size()));
  if (h.a.size() != s.depth())
    out.push_back(label + ".a: expected " + std::to_string(s.depth()) +
                  " vectors, got " + std::to_string(h.a.size()));
  else
    for (std::size_t k = 0; k < h.a.size(); ++k)
      if (h.a[k].size() != s.widths[k])
        out.push_back(label + ".a[" + std::to_string(k + 1) + "]: expected length " +
                      std::to_string(s.widths[k]) + ", got " +
                      std::to_string(h.a[k].size()));
  return out;
}

inline std::vector<std::string> validate(const RectifierNet& net) {
  std::vector<std::string> out = validate(net.stack);
  auto hv = validate_head(net.stack, net.head);
  out.insert(out.end(), hv.begin(), hv.end());
  return out;
}

inline std::vector<std::string> validate(const MaxRectifierNet& net) {
  std::vector<std::string> out = validate(net.stack);
  if (net.heads.empty()) out.push_back("heads: must contain at least one head");
  for (std::size_t i = 0; i < net.heads.size(); ++i) {
    auto hv = validate_head(net.stack, net.heads[i],
                            "heads[" + std::to_string(i) + "]");
    out.insert(out.end(), hv.begin(), hv.end());
  }
  return out;
}

inline void require_valid(const LayerStack& s) {
  auto v = validate(s);
  if (!v.empty()) throw InvalidNet(v.front());
}

// ---------------------------------------------------------------------------
// Evaluation

// Runs the shared recurrence once; all heads reuse the returned trace.
inline EvalTrace forward(const LayerStack& s, const Vector& x) {
  if (x.size() != s.input_dim)
    throw DimensionMismatch("forward: input length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(s.input_dim));
  require_valid(s);
  EvalTrace t;
  const std::size_t m = s.depth();
  t.preactivations.reserve(m);
  t.activations.reserve(m);
  for (std::size_t k = 1; k <= m; ++k) {
    Vector z = matvec(s.adjacent[k - 1], k == 1 ? x : t.activations[k - 2]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += s.biases[k - 1][i];
    for (std::size_t j = 0; j + 2 <= k; ++j)
      if (const Matrix* blk = s.skip_block(k, j)) {
        Vector extra = matvec(*blk, j == 0 ? x : t.activations[j - 1]);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += extra[i];
      }
    t.activations.push_back(relu(z));
    t.preactivations.push_back(std::move(z));
  }
  return t;
}

inline double head_value(const OutputHead& h, const Vector& x, const EvalTrace& t) {
  double v = h.c + dot(h.a0, x);
  for (std::size_t k = 0; k < h.a.size(); ++k) v += dot(h.a[k], t.activations[k]);
  return v;
}

inline EvalTrace eval_rectifier(const RectifierNet& net, const Vector& x) {
  EvalTrace t = forward(net.stack, x);
  t.output = head_value(net.head, x, t);
  return t;
}

inline double eval_max_rectifier(const MaxRectifierNet& net, const Vector& x) {
  if (net.heads.empty()) throw EmptyHeads("eval: net has no heads");
  EvalTrace t = forward(net.stack, x);
  double best = head_value(net.heads[0], x, t);
  for (std::size_t i = 1; i < net.heads.size(); ++i) {
    double v = head_value(net.heads[i], x, t);
    if (v > best) best = v;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random instances

// Draws every weight, bias and head coefficient uniformly from [-scale, scale].
// Draw order is fixed (W_1, b_1, ..., W_m, b_m, skip blocks sorted by
// (to, from), then c, a0, a_1..a_m), so a given (kind, dims, seed, scale)
// always produces the same net. FullSkip nets get every legal skip block;
// Residual nets get every (k, k-2) with odd k >= 3.
inline RectifierNet random_net(NetKind kind, std::size_t input_dim,
                               const std::vector<std::size_t>& widths,
                               std::uint64_t seed, double scale = 1.0) {
  if (widths.empty()) throw InvalidWidths("widths: must contain at least one layer");
  for (std::size_t w : widths)
    if (w == 0) throw InvalidWidths("widths: entries must be positive");
  if (input_dim == 0) throw InvalidWidths("input_dim: must be positive");
  if (!(scale > 0.0)) throw InvalidWidths("scale: must be positive");

  SplitMix64 g(seed);
  auto draw_matrix = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& e : m.data) e = g.symmetric(scale);
    return m;
  };
  auto draw_vector = [&](std::size_t n) {
    Vector v(n);
    for (double& e : v) e = g.symmetric(scale);
    return v;
  };

  RectifierNet net;
  LayerStack& s = net.stack;
  s.kind = kind;
  s.input_dim = input_dim;
  s.widths = widths;
  const std::size_t m = widths.size();
  for (std::size_t k = 1; k <= m; ++k) {
    s.adjacent.push_back(draw_matrix(s.widths[k - 1], s.act_dim(k - 1)));
    s.biases.push_back(draw_vector(s.widths[k - 1]));
  }
  if (kind == NetKind::FullSkip) {
    for (std::size_t to = 2; to <= m; ++to)
      for (std::size_t from = 0; from + 2 <= to; ++from)
        s.skips[{to, from}] = draw_matrix(s.widths[to - 1], s.act_dim(from));
  } else if (kind == NetKind::Residual) {
    for (std::size_t to = 3; to <= m; to += 2)
      s.skips[{to, to - 2}] = draw_matrix(s.widths[to - 1], s.act_dim(to - 2));
  }

  net.head.c = g.symmetric(scale);
  net.head.a0 = draw_vector(input_dim);
  for (std::size_t k = 1; k <= m; ++k) net.head.a.push_back(draw_vector(s.widths[k - 1]));
  return net;
}

}  // namespace rectnet
