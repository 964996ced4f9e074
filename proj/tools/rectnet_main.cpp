// Command-line surface for generating, transforming and checking rectifier
// nets. Exit codes: 0 success, 2 validation/parse failure, 3 head-cap
// exceeded, 4 verification failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rectnet/io.hpp"
#include "rectnet/transform.hpp"
#include "rectnet/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitCapExceeded = 3;
constexpr int kExitVerifyFailed = 4;

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - pos);
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(tok, &used);
      if (used != tok.size() || v == 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw rectnet::InvalidWidths("widths: bad entry \"" + tok + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw rectnet::ParseError("--x: bad coordinate \"" + tok + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void require_valid_file(const rectnet::MaxRectifierNet& net, const std::string& path) {
  auto violations = rectnet::validate(net);
  if (!violations.empty()) {
    std::string msg = path + ": invalid net";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw rectnet::InvalidNet(msg);
  }
}

rectnet::json counts_json_for(const rectnet::MaxRectifierNet& net) {
  using namespace rectnet;
  json j;
  j["kind"] = to_string(net.stack.kind);
  switch (net.stack.kind) {
    case NetKind::Plain: j.update(to_json(counts_plain(net.stack.widths))); break;
    case NetKind::FullSkip: j.update(to_json(counts_skip(net.stack.widths))); break;
    case NetKind::Residual: j.update(to_json(counts_residual(net.stack.widths))); break;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rectnet;
  CLI::App app{"depth-reduction toolkit for rectifier networks"};
  app.require_subcommand(1);

  // gen
  std::string gen_kind, gen_widths, gen_out;
  std::size_t gen_input_dim = 1;
  std::uint64_t gen_seed = 1;
  double gen_scale = 1.0;
  CLI::App* gen = app.add_subcommand("gen", "generate a random net file");
  gen->add_option("kind", gen_kind, "plain | full_skip | residual")->required();
  gen->add_option("input_dim", gen_input_dim, "input dimension")->required();
  gen->add_option("widths", gen_widths, "comma-separated layer widths")->required();
  gen->add_option("--seed", gen_seed, "RNG seed (default 1)");
  gen->add_option("--scale", gen_scale, "uniform weight range [-scale, scale]");
  gen->add_option("--out,-o", gen_out, "output net file")->required();

  // eval
  std::string eval_in, eval_x;
  bool eval_trace = false;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a net at a point");
  eval->add_option("in", eval_in, "net file")->required();
  eval->add_option("--x", eval_x, "comma-separated input coordinates")->required();
  eval->add_flag("--trace", eval_trace, "print pre-activations and activations");

  // shared transform flags
  auto add_transform_flags = [](CLI::App* cmd, unsigned long long& cap, bool& force,
                                bool& prune, bool& dedup) {
    cmd->add_option("--head-cap", cap, "refuse to exceed 2^cap heads (default 20)");
    cmd->add_flag("--force", force, "proceed past the head cap");
    cmd->add_flag("--prune-zeros", prune, "skip expansion terms with zero coefficient");
    cmd->add_flag("--dedup", dedup, "drop exact duplicate heads");
  };

  std::string red_in, red_out;
  unsigned long long red_cap = 20;
  bool red_force = false, red_prune = false, red_dedup = false;
  CLI::App* reduce = app.add_subcommand("reduce", "remove the last hidden layer");
  reduce->add_option("in", red_in, "input net file")->required();
  reduce->add_option("out", red_out, "output net file")->required();
  add_transform_flags(reduce, red_cap, red_force, red_prune, red_dedup);

  std::string col_in, col_out;
  unsigned long long col_cap = 20;
  bool col_force = false, col_prune = false, col_dedup = false;
  CLI::App* coll = app.add_subcommand("collapse", "reduce to a single hidden layer");
  coll->add_option("in", col_in, "input net file")->required();
  coll->add_option("out", col_out, "output net file")->required();
  add_transform_flags(coll, col_cap, col_force, col_prune, col_dedup);

  // verify
  std::string ver_a, ver_b;
  std::size_t ver_samples = VerifyDefaults::samples;
  std::uint64_t ver_seed = 0;
  double ver_tol = VerifyDefaults::tol;
  double ver_lo = VerifyDefaults::box_lo, ver_hi = VerifyDefaults::box_hi;
  std::size_t ver_lines = 10;
  CLI::App* verify = app.add_subcommand("verify", "check two nets for equality");
  verify->add_option("a", ver_a, "first net file")->required();
  verify->add_option("b", ver_b, "second net file")->required();
  verify->add_option("--samples", ver_samples, "pointwise sample count");
  verify->add_option("--seed", ver_seed, "sampling seed");
  verify->add_option("--tol", ver_tol, "relative tolerance");
  verify->add_option("--lo", ver_lo, "box lower bound");
  verify->add_option("--hi", ver_hi, "box upper bound");
  verify->add_option("--lines", ver_lines, "number of line probes");

  // counts
  std::string cnt_in;
  CLI::App* counts = app.add_subcommand("counts", "predicted collapsed size of a net");
  counts->add_option("in", cnt_in, "net file")->required();

  // compare
  unsigned long long cmp_T = 0;
  std::string cmp_depths, cmp_out;
  bool cmp_json = false;
  CLI::App* compare = app.add_subcommand(
      "compare", "plain versus residual sizes at equal budget");
  compare->add_option("--T", cmp_T, "total hidden units")->required();
  compare->add_option("--depths", cmp_depths, "comma-separated even depths")->required();
  compare->add_option("--out,-o", cmp_out, "write CSV here instead of stdout");
  compare->add_flag("--json", cmp_json, "emit JSON instead of CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto kind = kind_from_string(gen_kind);
      if (!kind)
        throw InvalidWidths("kind: expected plain, full_skip or residual, got \"" +
                            gen_kind + "\"");
      RectifierNet net = random_net(*kind, gen_input_dim, parse_widths(gen_widths),
                                    gen_seed, gen_scale);
      write_net(gen_out, net);
      json j = counts_json_for(as_max_net(net));
      std::cout << j.dump() << "\n";
      return kExitOk;
    }

    if (*eval) {
      MaxRectifierNet net = read_net(eval_in);
      require_valid_file(net, eval_in);
      const Vector x = parse_point(eval_x);
      const double value = eval_max_rectifier(net, x);
      if (eval_trace) {
        EvalTrace t = forward(net.stack, x);
        json j;
        j["output"] = value;
        json pre = json::array(), act = json::array();
        for (const Vector& z : t.preactivations) pre.push_back(z);
        for (const Vector& r : t.activations) act.push_back(r);
        j["preactivations"] = std::move(pre);
        j["activations"] = std::move(act);
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << format_number(value) << "\n";
      }
      return kExitOk;
    }

    if (*reduce) {
      MaxRectifierNet net = read_net(red_in);
      require_valid_file(net, red_in);
      ReduceOptions opts{red_cap, red_force, red_prune, red_dedup};
      if (red_force)
        std::fprintf(stderr, "warning: --force bypasses the head cap\n");
      json rep;
      rep["rule"] = step_rule(net.stack);
      if (net.stack.kind == NetKind::Residual)
        rep["parity"] = net.stack.depth() % 2 == 0 ? "even" : "odd";
      rep["head_exponent_step"] = net.stack.widths.back();
      MaxRectifierNet out = reduce_step(net, opts);
      write_net(red_out, out);
      rep["widths"] = out.stack.widths;
      rep["heads"] = out.heads.size();
      std::cout << rep.dump() << "\n";
      return kExitOk;
    }

    if (*coll) {
      MaxRectifierNet net = read_net(col_in);
      require_valid_file(net, col_in);
      ReduceOptions opts{col_cap, col_force, col_prune, col_dedup};
      if (col_force)
        std::fprintf(stderr, "warning: --force bypasses the head cap\n");
      CollapseResult res = collapse(net, opts);
      write_net(col_out, res.net);
      json rep = to_json(res.report);
      rep["predicted"] = counts_json_for(net);
      json realized;
      realized["L"] = res.net.stack.widths.empty() ? 0 : res.net.stack.widths[0];
      realized["heads"] = res.net.heads.size();
      rep["realized"] = std::move(realized);
      std::cout << rep.dump() << "\n";
      return kExitOk;
    }

    if (*verify) {
      MaxRectifierNet a = read_net(ver_a);
      MaxRectifierNet b = read_net(ver_b);
      require_valid_file(a, ver_a);
      require_valid_file(b, ver_b);
      EquivReport eq =
          check_pointwise(a, b, ver_lo, ver_hi, ver_samples, ver_seed, ver_tol);
      json j;
      j["pointwise"] = to_json(eq);
      bool lines_ok = true;
      std::size_t line_failures = 0;
      for (std::size_t i = 0; i < ver_lines; ++i) {
        const Vector anchor =
            sample_box(ver_seed ^ 0xA5C3ull, 2 * i, a.stack.input_dim, ver_lo, ver_hi);
        Vector dir =
            sample_box(ver_seed ^ 0xA5C3ull, 2 * i + 1, a.stack.input_dim, -1.0, 1.0);
        bool zero = true;
        for (double d : dir) zero = zero && d == 0.0;
        if (zero) dir[0] = 1.0;
        LineProbeReport lp = line_probe(a, b, anchor, dir, 512, ver_tol);
        if (!lp.passed) {
          lines_ok = false;
          ++line_failures;
        }
      }
      json lines;
      lines["count"] = ver_lines;
      lines["failures"] = line_failures;
      lines["all_match"] = lines_ok;
      j["line_probes"] = std::move(lines);
      const bool passed = eq.passed && lines_ok;
      j["passed"] = passed;
      std::cout << j.dump(2) << "\n";
      return passed ? kExitOk : kExitVerifyFailed;
    }

    if (*counts) {
      MaxRectifierNet net = read_net(cnt_in);
      require_valid_file(net, cnt_in);
      std::cout << counts_json_for(net).dump() << "\n";
      return kExitOk;
    }

    if (*compare) {
      std::vector<unsigned> depths;
      for (std::size_t w : parse_widths(cmp_depths))
        depths.push_back(static_cast<unsigned>(w));
      auto rows = comparison_table(cmp_T, depths);
      std::string text;
      if (cmp_json) {
        json arr = json::array();
        for (const ComparisonRow& r : rows) arr.push_back(to_json(r));
        text = arr.dump(2) + "\n";
      } else {
        text = comparison_csv(rows);
      }
      if (cmp_out.empty())
        std::cout << text;
      else
        write_text_atomic(cmp_out, text);
      return kExitOk;
    }
  } catch (const CapExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCapExceeded;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
