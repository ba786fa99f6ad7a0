#include "troplace/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "troplace/errors.hpp"

namespace troplace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw SchemaError("unknown key '" + it.key() + "' in " + where);
}

double finite_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(what + " must be finite");
  return v;
}

std::vector<int> edge_list(const Graph& g, const json& j, const std::string& what) {
  if (!j.is_array()) throw MalformedPartition(what + " must be an array of edge ids");
  std::vector<int> out;
  for (const auto& id : j) {
    if (!id.is_string()) throw MalformedPartition(what + " entries must be edge id strings");
    try {
      out.push_back(g.edge_index(id.get<std::string>()));
    } catch (const SchemaError& e) {
      throw MalformedPartition(e.what());
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

GraphSpec parse_graph_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("graph spec must be a JSON object");
  reject_unknown(j, {"vertices", "edges", "genus", "markings", "partition"}, "graph spec");
  if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].empty())
    throw SchemaError("graph spec needs a nonempty \"vertices\" array");
  if (!j.contains("edges") || !j["edges"].is_array()) throw SchemaError("graph spec needs an \"edges\" array");
  GraphSpec spec;
  Graph& g = spec.graph;
  for (const auto& v : j["vertices"]) {
    if (!v.is_string()) throw SchemaError("vertex ids must be strings");
    g.add_vertex(v.get<std::string>());
  }
  int with_len = 0;
  for (const auto& e : j["edges"]) {
    if (!e.is_object()) throw SchemaError("edges must be objects");
    reject_unknown(e, {"id", "ends", "length"}, "edge");
    if (!e.contains("id") || !e["id"].is_string()) throw SchemaError("edge needs a string \"id\"");
    if (!e.contains("ends") || !e["ends"].is_array() || e["ends"].size() != 2 || !e["ends"][0].is_string() ||
        !e["ends"][1].is_string())
      throw SchemaError("edge \"ends\" must be two vertex ids");
    g.add_edge(e["id"].get<std::string>(), g.vertex_index(e["ends"][0].get<std::string>()),
               g.vertex_index(e["ends"][1].get<std::string>()));
    if (e.contains("length")) {
      const double l = finite_number(e["length"], "edge length");
      if (l <= 0) throw SchemaError("edge lengths must be positive");
      spec.length.push_back(l);
      ++with_len;
    } else {
      spec.length.push_back(1.0);
    }
  }
  if (with_len != 0 && with_len != g.n_edges()) throw SchemaError("either every edge or no edge has a length");
  spec.has_lengths = with_len > 0;
  if (j.contains("genus")) {
    if (!j["genus"].is_object()) throw SchemaError("\"genus\" must map vertex ids to integers");
    for (auto it = j["genus"].begin(); it != j["genus"].end(); ++it) {
      if (!it.value().is_number_integer() || it.value().get<int>() < 0)
        throw SchemaError("vertex genus must be a nonnegative integer");
      g.genus[static_cast<size_t>(g.vertex_index(it.key()))] = it.value().get<int>();
    }
  }
  if (j.contains("markings")) {
    if (!j["markings"].is_object()) throw SchemaError("\"markings\" must map labels to vertex ids");
    for (auto it = j["markings"].begin(); it != j["markings"].end(); ++it) {
      if (!it.value().is_string()) throw SchemaError("marking targets must be vertex ids");
      g.markings[it.key()] = g.vertex_index(it.value().get<std::string>());
    }
  }
  g.validate();
  if (j.contains("partition")) {
    const auto& p = j["partition"];
    if (!p.is_object()) throw MalformedPartition("\"partition\" must be an object");
    reject_unknown(p, {"layers", "finite"}, "partition");
    OrderedPartition pi;
    pi.ambient = g.n_edges();
    if (p.contains("layers")) {
      if (!p["layers"].is_array()) throw MalformedPartition("\"layers\" must be an array");
      for (const auto& layer : p["layers"]) pi.layers.push_back(edge_list(g, layer, "layer"));
    }
    if (p.contains("finite")) pi.finite = edge_list(g, p["finite"], "finite part");
    pi.validate();
    if (!pi.covers_all()) throw MalformedPartition("partition must cover every edge");
    spec.partition = pi;
  }
  return spec;
}

GraphSpec load_graph_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read graph spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_spec(ss.str());
}

std::string emit_graph_spec(const GraphSpec& spec) {
  const Graph& g = spec.graph;
  ojson j;
  j["vertices"] = g.vertices;
  ojson edges = ojson::array();
  for (int e = 0; e < g.n_edges(); ++e) {
    ojson ed;
    ed["id"] = g.edges[e].id;
    ed["ends"] = {g.vertices[g.edges[e].tail], g.vertices[g.edges[e].head]};
    if (spec.has_lengths) ed["length"] = spec.length[e];
    edges.push_back(ed);
  }
  j["edges"] = edges;
  ojson genus = ojson::object();
  for (int v = 0; v < g.n_vertices(); ++v)
    if (g.genus[v]) genus[g.vertices[v]] = g.genus[v];
  if (!genus.empty()) j["genus"] = genus;
  if (!g.markings.empty()) {
    ojson mk = ojson::object();
    for (const auto& [label, v] : g.markings) mk[label] = g.vertices[v];
    j["markings"] = mk;
  }
  if (spec.partition) {
    ojson p;
    ojson layers = ojson::array();
    for (const auto& layer : spec.partition->layers) {
      ojson l = ojson::array();
      for (int e : layer) l.push_back(g.edges[e].id);
      layers.push_back(l);
    }
    p["layers"] = layers;
    ojson fin = ojson::array();
    for (int e : spec.partition->finite) fin.push_back(g.edges[e].id);
    p["finite"] = fin;
    j["partition"] = p;
  }
  return j.dump(2) + "\n";
}

namespace {

Point point_from_json(const Graph& g, const json& j) {
  if (j.is_string()) return Point::at_vertex(g.vertex_index(j.get<std::string>()));
  if (j.is_array() && j.size() == 2 && j[0].is_string())
    return Point::on_edge(g.edge_index(j[0].get<std::string>()), finite_number(j[1], "edge offset"));
  throw SchemaError("point must be a vertex id or [edge-id, offset]");
}

ojson point_to_json(const Graph& g, const Point& p) {
  if (p.is_vertex()) return g.vertices[p.vertex];
  return ojson::array({g.edges[p.edge].id, p.offset});
}

}  // namespace

Point parse_point(const Graph& g, const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    try {
      return point_from_json(g, json::parse(t));
    } catch (const json::parse_error&) {
      throw SchemaError("cannot parse point '" + text + "'");
    }
  }
  // "e1@0.25" shorthand for a point on an edge
  const auto at = t.find('@');
  if (at != std::string::npos) {
    try {
      return Point::on_edge(g.edge_index(t.substr(0, at)), std::stod(t.substr(at + 1)));
    } catch (const std::invalid_argument&) {
      throw SchemaError("cannot parse point '" + text + "'");
    }
  }
  return Point::at_vertex(g.vertex_index(t));
}

std::string format_point(const Graph& g, const Point& p) {
  if (p.is_vertex()) return g.vertices[p.vertex];
  std::ostringstream os;
  os << g.edges[p.edge].id << "@" << p.offset;
  return os.str();
}

GraphMeasure parse_measure(const Graph& g, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid measure JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("measure spec must be an object");
  reject_unknown(j, {"atoms", "densities"}, "measure spec");
  GraphMeasure m(g.n_edges());
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) throw SchemaError("\"atoms\" must be an array");
    for (const auto& a : j["atoms"]) {
      if (!a.is_object() || !a.contains("at") || !a.contains("mass")) throw SchemaError("atom needs \"at\" and \"mass\"");
      reject_unknown(a, {"at", "mass"}, "atom");
      m.add_atom(point_from_json(g, a["at"]), finite_number(a["mass"], "atom mass"));
    }
  }
  if (j.contains("densities")) {
    if (!j["densities"].is_object()) throw SchemaError("\"densities\" must map edge ids to numbers");
    for (auto it = j["densities"].begin(); it != j["densities"].end(); ++it)
      m.density[static_cast<size_t>(g.edge_index(it.key()))] = finite_number(it.value(), "density");
  }
  return m;
}

std::string emit_measure(const Graph& g, const GraphMeasure& m) {
  ojson j;
  ojson atoms = ojson::array();
  for (const auto& [p, a] : m.atoms) atoms.push_back(ojson{{"at", point_to_json(g, p)}, {"mass", a}});
  j["atoms"] = atoms;
  ojson dens = ojson::object();
  for (size_t e = 0; e < m.density.size(); ++e)
    if (m.density[e] != 0) dens[g.edges[e].id] = m.density[e];
  j["densities"] = dens;
  return j.dump(2) + "\n";
}

OrderedPartition parse_partition(const Graph& g, const std::string& text) {
  OrderedPartition pi;
  pi.ambient = g.n_edges();
  std::string inf = text, fin;
  const auto semi = text.find(';');
  if (semi != std::string::npos) {
    inf = text.substr(0, semi);
    fin = text.substr(semi + 1);
  }
  auto ids = [&](const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
      const std::string t = trim(tok);
      if (t.empty()) continue;
      try {
        out.push_back(g.edge_index(t));
      } catch (const SchemaError& e) {
        throw MalformedPartition(e.what());
      }
    }
    return out;
  };
  if (!trim(inf).empty())
    for (const auto& layer : split(inf, '|')) pi.layers.push_back(ids(layer));
  pi.finite = ids(fin);
  pi.validate();
  if (!pi.covers_all()) throw MalformedPartition("partition must cover every edge");
  return pi;
}

std::string format_partition(const Graph& g, const OrderedPartition& pi) {
  std::string out;
  for (size_t i = 0; i < pi.layers.size(); ++i) {
    if (i) out += "|";
    for (size_t k = 0; k < pi.layers[i].size(); ++k) out += (k ? "," : "") + g.edges[pi.layers[i][k]].id;
  }
  out += ";";
  for (size_t k = 0; k < pi.finite.size(); ++k) out += (k ? "," : "") + g.edges[pi.finite[k]].id;
  return out;
}

std::vector<std::string> preset_names() { return {"theta", "kite", "fig9", "barbell"}; }

namespace {

GraphSpec build(const std::vector<std::string>& vs, const std::vector<std::array<std::string, 3>>& es,
                const std::vector<std::vector<std::string>>& layers, const std::vector<std::string>& finite) {
  GraphSpec s;
  for (const auto& v : vs) s.graph.add_vertex(v);
  for (const auto& [id, a, b] : es) s.graph.add_edge(id, s.graph.vertex_index(a), s.graph.vertex_index(b));
  s.length.assign(es.size(), 1.0);
  s.has_lengths = true;
  OrderedPartition pi;
  pi.ambient = s.graph.n_edges();
  for (const auto& layer : layers) {
    std::vector<int> l;
    for (const auto& id : layer) l.push_back(s.graph.edge_index(id));
    pi.layers.push_back(l);
  }
  for (const auto& id : finite) pi.finite.push_back(s.graph.edge_index(id));
  s.partition = pi;
  return s;
}

}  // namespace

GraphSpec preset(const std::string& name) {
  if (name == "theta")
    return build({"u", "v"}, {{{"e1", "u", "v"}}, {{"e2", "u", "v"}}, {{"e3", "u", "v"}}}, {{"e1"}, {"e2", "e3"}}, {});
  if (name == "kite")
    // outer 4-cycle plus the tail edge xy in the first layer, diagonals uw and vx in the second
    return build({"u", "v", "w", "x", "y"},
                 {{{"e1", "u", "v"}},
                  {{"e2", "w", "v"}},
                  {{"e3", "w", "x"}},
                  {{"e4", "u", "x"}},
                  {{"e5", "x", "y"}},
                  {{"e6", "u", "w"}},
                  {{"e7", "v", "x"}}},
                 {{"e1", "e2", "e3", "e4", "e5"}, {"e6", "e7"}}, {});
  if (name == "fig9")
    return build({"u", "v", "w", "z"},
                 {{{"uv", "u", "v"}},
                  {{"wv", "w", "v"}},
                  {{"zv", "z", "v"}},
                  {{"uw", "u", "w"}},
                  {{"uz", "u", "z"}},
                  {{"wz", "w", "z"}}},
                 {{"uv", "wv", "zv"}, {"uw", "uz"}, {"wz"}}, {});
  if (name == "barbell")
    return build({"a", "b"}, {{{"e1", "a", "a"}}, {{"e2", "b", "b"}}, {{"e3", "a", "b"}}}, {{"e1", "e2"}}, {"e3"});
  throw SchemaError("unknown preset '" + name + "'");
}

}  // namespace troplace
