#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "rectnet/counts.hpp"
#include "rectnet/net.hpp"
#include "rectnet/transform_common.hpp"
#include "rectnet/verify.hpp"

namespace rectnet {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Net serialization. The on-disk schema:
//
//   {
//     "kind": "plain" | "full_skip" | "residual",
//     "input_dim": 2,
//     "widths": [2, 2],
//     "W": [ [[...],[...]], ... ],              m row-major matrices
//     "b": [ [...], ... ],                      m bias vectors
//     "skip": [ {"to": 3, "from": 1, "M": [[...]]}, ... ]   sorted by (to, from)
//     "heads": [ {"c": 0.1, "a0": [...], "a": [[...], ...]}, ... ]
//   }
//
// All seven top-level keys are required; unknown keys anywhere are rejected.
// Serialization is canonical (sorted keys, shortest round-trip numbers), so
// writing the same net twice yields identical bytes.

namespace detail {

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (double e : v) out.push_back(e);
  return out;
}

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ParseError(where + ": unknown field \"" + item.key() + "\"");
}

inline const json& require_field(const json& obj, const std::string& key,
                                 const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline double parse_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

inline std::size_t parse_count(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) throw ParseError(where + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline Vector parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(parse_number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError(where + ": expected a nonempty array of rows");
  Matrix m;
  m.rows = j.size();
  for (std::size_t i = 0; i < j.size(); ++i) {
    Vector row = parse_vector(j[i], where + "[" + std::to_string(i) + "]");
    if (i == 0) {
      m.cols = row.size();
      if (m.cols == 0) throw ParseError(where + ": rows must be nonempty");
      m.data.reserve(m.rows * m.cols);
    } else if (row.size() != m.cols) {
      throw ParseError(where + "[" + std::to_string(i) + "]: ragged row, expected " +
                       std::to_string(m.cols) + " entries");
    }
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  return m;
}

inline OutputHead parse_head(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  reject_unknown_keys(j, {"c", "a0", "a"}, where);
  OutputHead h;
  h.c = parse_number(require_field(j, "c", where), where + ".c");
  h.a0 = parse_vector(require_field(j, "a0", where), where + ".a0");
  const json& a = require_field(j, "a", where);
  if (!a.is_array()) throw ParseError(where + ".a: expected an array of vectors");
  for (std::size_t k = 0; k < a.size(); ++k)
    h.a.push_back(parse_vector(a[k], where + ".a[" + std::to_string(k) + "]"));
  return h;
}

}  // namespace detail

inline json net_to_json(const MaxRectifierNet& net) {
  const LayerStack& s = net.stack;
  json j;
  j["kind"] = to_string(s.kind);
  j["input_dim"] = s.input_dim;
  j["widths"] = s.widths;
  json ws = json::array();
  for (const Matrix& w : s.adjacent) ws.push_back(detail::matrix_to_json(w));
  j["W"] = std::move(ws);
  json bs = json::array();
  for (const Vector& b : s.biases) bs.push_back(detail::vector_to_json(b));
  j["b"] = std::move(bs);
  json skips = json::array();  // std::map iteration is already (to, from) sorted
  for (const auto& [key, mat] : s.skips) {
    json entry;
    entry["to"] = key.first;
    entry["from"] = key.second;
    entry["M"] = detail::matrix_to_json(mat);
    skips.push_back(std::move(entry));
  }
  j["skip"] = std::move(skips);
  json heads = json::array();
  for (const OutputHead& h : net.heads) {
    json hj;
    hj["c"] = h.c;
    hj["a0"] = detail::vector_to_json(h.a0);
    json a = json::array();
    for (const Vector& blk : h.a) a.push_back(detail::vector_to_json(blk));
    hj["a"] = std::move(a);
    heads.push_back(std::move(hj));
  }
  j["heads"] = std::move(heads);
  return j;
}

inline json net_to_json(const RectifierNet& net) { return net_to_json(as_max_net(net)); }

inline MaxRectifierNet net_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("net: expected a JSON object");
  detail::reject_unknown_keys(
      j, {"kind", "input_dim", "widths", "W", "b", "skip", "heads"}, "net");
  MaxRectifierNet net;
  LayerStack& s = net.stack;

  const json& kind = detail::require_field(j, "kind", "net");
  if (!kind.is_string()) throw ParseError("kind: expected a string");
  auto k = kind_from_string(kind.get<std::string>());
  if (!k)
    throw ParseError("kind: expected \"plain\", \"full_skip\" or \"residual\", got \"" +
                     kind.get<std::string>() + "\"");
  s.kind = *k;
  s.input_dim = detail::parse_count(detail::require_field(j, "input_dim", "net"),
                                    "input_dim");
  const json& widths = detail::require_field(j, "widths", "net");
  if (!widths.is_array()) throw ParseError("widths: expected an array");
  for (std::size_t i = 0; i < widths.size(); ++i)
    s.widths.push_back(
        detail::parse_count(widths[i], "widths[" + std::to_string(i) + "]"));

  const json& ws = detail::require_field(j, "W", "net");
  if (!ws.is_array()) throw ParseError("W: expected an array of matrices");
  for (std::size_t i = 0; i < ws.size(); ++i)
    s.adjacent.push_back(detail::parse_matrix(ws[i], "W[" + std::to_string(i + 1) + "]"));
  const json& bs = detail::require_field(j, "b", "net");
  if (!bs.is_array()) throw ParseError("b: expected an array of vectors");
  for (std::size_t i = 0; i < bs.size(); ++i)
    s.biases.push_back(detail::parse_vector(bs[i], "b[" + std::to_string(i + 1) + "]"));

  const json& skips = detail::require_field(j, "skip", "net");
  if (!skips.is_array()) throw ParseError("skip: expected an array");
  for (std::size_t i = 0; i < skips.size(); ++i) {
    const std::string where = "skip[" + std::to_string(i) + "]";
    const json& e = skips[i];
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown_keys(e, {"to", "from", "M"}, where);
    const std::size_t to = detail::parse_count(detail::require_field(e, "to", where),
                                               where + ".to");
    const std::size_t from = detail::parse_count(
        detail::require_field(e, "from", where), where + ".from");
    if (s.skips.count({to, from}))
      throw ParseError(where + ": duplicate block (" + std::to_string(to) + "," +
                       std::to_string(from) + ")");
    s.skips[{to, from}] =
        detail::parse_matrix(detail::require_field(e, "M", where), where + ".M");
  }

  const json& heads = detail::require_field(j, "heads", "net");
  if (!heads.is_array() || heads.empty())
    throw ParseError("heads: expected a nonempty array");
  for (std::size_t i = 0; i < heads.size(); ++i)
    net.heads.push_back(
        detail::parse_head(heads[i], "heads[" + std::to_string(i) + "]"));
  return net;
}

inline std::string net_to_string(const MaxRectifierNet& net) {
  return net_to_json(net).dump(2) + "\n";
}

inline MaxRectifierNet net_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return net_from_json(j);
}

// ---------------------------------------------------------------------------
// Files. Writes go to a temp file in the same directory and are renamed
// into place, so readers never observe a partial file.

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out.flush()) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_net(const std::filesystem::path& path, const MaxRectifierNet& net) {
  write_text_atomic(path, net_to_string(net));
}

inline void write_net(const std::filesystem::path& path, const RectifierNet& net) {
  write_net(path, as_max_net(net));
}

inline MaxRectifierNet read_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return net_from_string(text);
  } catch (ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Report serialization.

inline json to_json(const EquivReport& r) {
  json j;
  j["samples"] = r.samples;
  j["max_rel_err"] = r.max_rel_err;
  j["max_abs_err"] = r.max_abs_err;
  j["worst_x"] = detail::vector_to_json(r.worst_x);
  j["tol"] = r.tol;
  j["abs_floor"] = r.abs_floor;
  j["passed"] = r.passed;
  return j;
}

inline json to_json(const LineProbeReport& r) {
  json j;
  j["anchor"] = detail::vector_to_json(r.anchor);
  j["direction"] = detail::vector_to_json(r.direction);
  j["steps"] = r.steps;
  j["breakpoint_count_a"] = r.breakpoint_count_a;
  j["breakpoint_count_b"] = r.breakpoint_count_b;
  j["max_slope_diff"] = r.max_slope_diff;
  j["max_value_rel_err"] = r.max_value_rel_err;
  j["slope_sequences_match"] = r.slope_sequences_match;
  j["value_match"] = r.value_match;
  j["finite"] = r.finite;
  j["passed"] = r.passed;
  return j;
}

inline json to_json(const GradientReport& r) {
  json j;
  j["requested"] = r.requested;
  j["retained"] = r.retained;
  j["skipped"] = r.skipped;
  j["max_grad_diff"] = r.max_grad_diff;
  j["fd_step"] = r.fd_step;
  j["tol"] = r.tol;
  j["passed"] = r.passed;
  return j;
}

inline json to_json(const TransformReport& r) {
  json j;
  j["family"] = r.family;
  j["steps"] = r.steps;
  j["widths_per_step"] = r.widths_per_step;
  j["rule_per_step"] = r.rule_per_step;
  if (!r.parity_per_step.empty()) j["parity_per_step"] = r.parity_per_step;
  j["head_exponent"] = r.head_exponent;
  j["final_width"] = r.final_width;
  return j;
}

inline json to_json(const Counts& c) {
  json j;
  j["L"] = c.width;
  j["N"] = c.exponent;
  return j;
}

inline json to_json(const ResidualCounts& rc) {
  json j;
  j["parity"] = rc.even ? "even" : "odd";
  j["L_rec"] = rc.recurrence.width;
  j["N_rec"] = rc.recurrence.exponent;
  j["L_closed"] = rc.closed_form.width;
  j["N_closed"] = rc.closed_form.exponent;
  json flags = json::array();
  if (rc.width_mismatch) flags.push_back("L_mismatch");
  if (rc.exponent_mismatch) flags.push_back("N_mismatch");
  j["flags"] = std::move(flags);
  return j;
}

inline json to_json(const ComparisonRow& r) {
  json j;
  j["m"] = r.m;
  j["T"] = r.T;
  j["L_p"] = r.width_plain;
  j["N_p"] = r.exponent_plain;
  j["L_res_paper"] = r.width_res_formula;
  j["N_res_paper"] = r.exponent_res_formula;
  if (r.res_recurrence) {
    j["L_res_rec"] = r.res_recurrence->width;
    j["N_res_rec"] = r.res_recurrence->exponent;
  }
  if (r.res_recurrence_same_width) {
    j["L_res_rec_same_width"] = r.res_recurrence_same_width->width;
    j["N_res_rec_same_width"] = r.res_recurrence_same_width->exponent;
  }
  j["flags"] = r.flags;
  return j;
}

inline json to_json(const PropertySuiteReport& r) {
  json results = json::array();
  for (const PropertyResult& p : r.results) {
    json e;
    e["name"] = p.name;
    e["passed"] = p.passed;
    e["details"] = p.details;
    e["repro"] = p.repro;
    results.push_back(std::move(e));
  }
  json j;
  j["results"] = std::move(results);
  j["passed"] = r.all_passed();
  return j;
}

}  // namespace rectnet
