#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "rectnet/io.hpp"
#include "rectnet/transform.hpp"

using namespace rectnet;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rectnet_io_test_" + name);
}

}  // namespace

TEST_CASE("serialization round-trips byte-identically", "[io]") {
  const std::vector<std::vector<std::size_t>> shapes = {{1}, {2, 2}, {1, 2, 3}, {2, 1, 2, 1}};
  std::size_t count = 0;
  for (NetKind kind : {NetKind::Plain, NetKind::FullSkip, NetKind::Residual}) {
    for (const auto& widths : shapes) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        MaxRectifierNet net = as_max_net(random_net(kind, 3, widths, seed));
        const std::string s1 = net_to_string(net);
        MaxRectifierNet back = net_from_string(s1);
        const std::string s2 = net_to_string(back);
        INFO(to_string(kind) << " seed " << seed);
        REQUIRE(s1 == s2);
        REQUIRE(back.stack.kind == net.stack.kind);
        REQUIRE(back.stack.widths == net.stack.widths);
        REQUIRE(back.stack.adjacent == net.stack.adjacent);
        REQUIRE(back.stack.biases == net.stack.biases);
        REQUIRE(back.stack.skips == net.stack.skips);
        REQUIRE(back.heads == net.heads);
        ++count;
      }
    }
  }
  REQUIRE(count == 60);
}

TEST_CASE("reduced nets survive the round trip too", "[io]") {
  RectifierNet net = random_net(NetKind::Residual, 2, {1, 1, 1}, 7);
  CollapseResult cr = collapse(net);
  const std::string s1 = net_to_string(cr.net);
  REQUIRE(net_to_string(net_from_string(s1)) == s1);
}

TEST_CASE("file writes are stable and atomic-rename based", "[io]") {
  RectifierNet net = random_net(NetKind::FullSkip, 2, {2, 2}, 9);
  const auto path = temp_file("roundtrip.json");
  write_net(path, net);
  MaxRectifierNet back = read_net(path);
  write_net(path, back);
  MaxRectifierNet again = read_net(path);
  REQUIRE(net_to_string(back) == net_to_string(again));
  REQUIRE_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);

  REQUIRE_THROWS_WITH(read_net(temp_file("does_not_exist.json")),
                      ContainsSubstring("cannot open"));
}

TEST_CASE("unknown fields are rejected at every level", "[io]") {
  MaxRectifierNet net = as_max_net(random_net(NetKind::FullSkip, 2, {1, 1, 1}, 3));
  json good = net_to_json(net);

  json top = good;
  top["comment"] = "nope";
  REQUIRE_THROWS_WITH(net_from_json(top), ContainsSubstring("unknown field \"comment\""));

  json skip = good;
  skip["skip"][0]["scale"] = 2.0;
  REQUIRE_THROWS_WITH(net_from_json(skip),
                      ContainsSubstring("skip[0]: unknown field \"scale\""));

  json head = good;
  head["heads"][0]["bias"] = 0.0;
  REQUIRE_THROWS_WITH(net_from_json(head),
                      ContainsSubstring("heads[0]: unknown field \"bias\""));
}

TEST_CASE("missing and malformed fields carry their paths", "[io]") {
  MaxRectifierNet net = as_max_net(random_net(NetKind::Plain, 2, {2, 1}, 4));
  json good = net_to_json(net);

  json no_b = good;
  no_b.erase("b");
  REQUIRE_THROWS_WITH(net_from_json(no_b), ContainsSubstring("missing field \"b\""));

  json bad_kind = good;
  bad_kind["kind"] = "dense";
  REQUIRE_THROWS_WITH(net_from_json(bad_kind), ContainsSubstring("dense"));

  json ragged = good;
  ragged["W"][0][1].push_back(3.0);  // second row of W[1] gets an extra entry
  REQUIRE_THROWS_WITH(net_from_json(ragged),
                      ContainsSubstring("W[1][1]: ragged row"));

  json no_heads = good;
  no_heads["heads"] = json::array();
  REQUIRE_THROWS_WITH(net_from_json(no_heads),
                      ContainsSubstring("heads: expected a nonempty array"));

  json bad_width = good;
  bad_width["widths"][0] = -2;
  REQUIRE_THROWS_WITH(net_from_json(bad_width),
                      ContainsSubstring("widths[0]: expected a nonnegative integer"));

  REQUIRE_THROWS_WITH(net_from_string("{ not json"), ContainsSubstring("invalid JSON"));
  REQUIRE_THROWS_WITH(net_from_string("[1, 2]"),
                      ContainsSubstring("net: expected a JSON object"));
}

TEST_CASE("duplicate skip blocks are rejected", "[io]") {
  MaxRectifierNet net = as_max_net(random_net(NetKind::FullSkip, 2, {1, 1, 1}, 5));
  json j = net_to_json(net);
  json dup = j["skip"][0];
  j["skip"].push_back(dup);
  REQUIRE_THROWS_WITH(net_from_json(j), ContainsSubstring("duplicate block"));
}

TEST_CASE("parsed nets pass validation", "[io]") {
  for (NetKind kind : {NetKind::Plain, NetKind::FullSkip, NetKind::Residual}) {
    MaxRectifierNet net = as_max_net(random_net(kind, 2, {2, 2, 2}, 6));
    MaxRectifierNet back = net_from_string(net_to_string(net));
    REQUIRE(validate(back).empty());
  }
}

TEST_CASE("report serialization exposes the key quantities", "[io]") {
  RectifierNet net = random_net(NetKind::Residual, 2, {1, 1, 1}, 8);
  CollapseResult cr = collapse(net);
  json rep = to_json(cr.report);
  REQUIRE(rep["family"] == "residual");
  REQUIRE(rep["steps"] == 2);
  REQUIRE(rep["head_exponent"] == 4);
  REQUIRE(rep["final_width"] == 4);
  REQUIRE(rep["parity_per_step"] == json::array({"odd", "even"}));

  json counts = to_json(counts_residual({1, 1, 1}));
  REQUIRE(counts["L_rec"] == 4);
  REQUIRE(counts["L_closed"] == 6);
  REQUIRE(counts["N_rec"] == 4);
  REQUIRE(counts["N_closed"] == 4);
  REQUIRE(counts["flags"] == json::array({"L_mismatch"}));

  json plain = to_json(counts_plain({1, 2, 3}));
  REQUIRE(plain["L"] == 6);
  REQUIRE(plain["N"] == 8);

  auto rows = comparison_table(12, {4});
  json row = to_json(rows[0]);
  REQUIRE(row["L_res_rec"] == 12);
  REQUIRE(row["N_res_rec"] == 16);
  REQUIRE(row["L_res_rec_same_width"] == 18);
  REQUIRE(row["flags"] == json::array({"L_res_mismatch", "N_res_mismatch"}));
}
