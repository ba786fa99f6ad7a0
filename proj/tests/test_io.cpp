#include <doctest.h>

#include "troplace/errors.hpp"
#include "troplace/io.hpp"

using namespace troplace;

TEST_CASE("presets round trip byte for byte") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto spec = preset(name);
    const std::string text = emit_graph_spec(spec);
    const auto again = parse_graph_spec(text);
    CHECK(emit_graph_spec(again) == text);
    CHECK(again.graph.n_edges() == spec.graph.n_edges());
    CHECK(again.length == spec.length);
    REQUIRE(again.partition.has_value());
    CHECK(again.partition->layers == spec.partition->layers);
    CHECK(again.partition->finite == spec.partition->finite);
  }
  CHECK_THROWS_AS(preset("nope"), SchemaError);
}

TEST_CASE("graph spec schema") {
  const std::string ok = R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":2}]})";
  const auto s = parse_graph_spec(ok);
  CHECK(s.has_lengths);
  CHECK(s.length == std::vector<double>{2});
  CHECK_FALSE(s.partition.has_value());

  const auto d = parse_graph_spec(R"({"vertices":["a"],"edges":[{"id":"l","ends":["a","a"]}]})");
  CHECK_FALSE(d.has_lengths);
  CHECK(d.length == std::vector<double>{1});

  const std::vector<std::string> bad{
      "",
      "[]",
      "{",
      R"({"vertices":[],"edges":[]})",
      R"({"vertices":["a"],"edges":[],"colour":1})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","c"]}]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":0}]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":-1}]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":"x"}]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"weight":1}]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":1},{"id":"f","ends":["a","b"]}]})",
      R"({"vertices":["a","a"],"edges":[]})",
      R"({"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"]},{"id":"e","ends":["a","b"]}]})",
      R"({"vertices":["a"],"edges":[],"genus":{"a":-1}})",
  };
  for (const auto& t : bad) {
    CAPTURE(t);
    CHECK_THROWS_AS(parse_graph_spec(t), SchemaError);
  }
}

TEST_CASE("partition schema") {
  const std::string base = R"({"vertices":["u","v"],"edges":[{"id":"e1","ends":["u","v"]},{"id":"e2","ends":["u","v"]}],)";
  const auto s = parse_graph_spec(base + R"("partition":{"layers":[["e1"]],"finite":["e2"]}})");
  REQUIRE(s.partition.has_value());
  CHECK(s.partition->layers == std::vector<std::vector<int>>{{0}});
  CHECK(s.partition->finite == std::vector<int>{1});

  for (const std::string p : {R"({"layers":[["e1"]]})", R"({"layers":[["e1","e2"]],"finite":["e2"]})",
                              R"({"layers":[["e3"]],"finite":["e1","e2"]})", R"({"layers":[[],["e1","e2"]]})",
                              R"({"layers":"e1"})", R"({"rank":1})"}) {
    CAPTURE(p);
    CHECK_THROWS_AS(parse_graph_spec(base + "\"partition\":" + p + "}"), SchemaError);
  }
}

TEST_CASE("partition strings") {
  const auto spec = preset("kite");
  const auto& g = spec.graph;
  const auto pi = parse_partition(g, "e1,e2,e3,e4,e5|e6,e7");
  CHECK(pi.rank() == 2);
  CHECK(pi.finite.empty());
  CHECK(format_partition(g, pi) == "e1,e2,e3,e4,e5|e6,e7;");
  const auto pf = parse_partition(g, "e6, e7 ; e1,e2,e3,e4,e5");
  CHECK(pf.rank() == 1);
  CHECK(pf.finite.size() == 5);
  CHECK(parse_partition(g, format_partition(g, pf)).layers == pf.layers);
  const auto p0 = parse_partition(g, ";e1,e2,e3,e4,e5,e6,e7");
  CHECK(p0.rank() == 0);

  CHECK_THROWS_AS(parse_partition(g, "e1,e2"), MalformedPartition);
  CHECK_THROWS_AS(parse_partition(g, "e1,e2,e3,e4,e5|e6,e7,e8"), MalformedPartition);
  CHECK_THROWS_AS(parse_partition(g, "e1,e2,e3,e4,e5,e6|e6,e7"), MalformedPartition);
}

TEST_CASE("points and measures") {
  const auto spec = preset("theta");
  const auto& g = spec.graph;
  CHECK(parse_point(g, "u").vertex == 0);
  const auto p = parse_point(g, "e2@0.25");
  CHECK(p.edge == 1);
  CHECK(p.offset == 0.25);
  CHECK(parse_point(g, R"(["e3", 0.5])").edge == 2);
  CHECK(format_point(g, p) == "e2@0.25");
  CHECK_THROWS_AS(parse_point(g, "w"), SchemaError);
  CHECK_THROWS_AS(parse_point(g, "e9@0.1"), SchemaError);
  CHECK_THROWS_AS(parse_point(g, "e1@abc"), SchemaError);

  const auto m = parse_measure(g, R"({"atoms":[{"at":"u","mass":0.5},{"at":["e1",0.5],"mass":0.25}],"densities":{"e2":0.25}})");
  CHECK(m.atoms.size() == 2);
  CHECK(m.mass(spec.length) == doctest::Approx(1));
  const auto again = parse_measure(g, emit_measure(g, m));
  CHECK(emit_measure(g, again) == emit_measure(g, m));
  CHECK_THROWS_AS(parse_measure(g, R"({"atoms":[{"at":"u"}]})"), SchemaError);
  CHECK_THROWS_AS(parse_measure(g, R"({"weights":{}})"), SchemaError);
  CHECK_THROWS_AS(parse_measure(g, R"({"densities":{"e7":1}})"), SchemaError);
}
