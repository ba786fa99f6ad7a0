#include "troplace/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>

#include "troplace/errors.hpp"
#include "troplace/rational.hpp"

namespace troplace {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b) std::swap(a, b);
    parent[static_cast<size_t>(a)] = b;  // smaller index stays root
    return true;
  }
};

}  // namespace

int Graph::add_vertex(const std::string& id, int g) {
  vertices.push_back(id);
  genus.push_back(g);
  return n_vertices() - 1;
}

int Graph::add_edge(const std::string& id, int tail, int head) {
  edges.push_back(Edge{id, tail, head});
  return n_edges() - 1;
}

int Graph::vertex_index(const std::string& id) const {
  for (int i = 0; i < n_vertices(); ++i)
    if (vertices[static_cast<size_t>(i)] == id) return i;
  throw SchemaError("unknown vertex id '" + id + "'");
}

int Graph::edge_index(const std::string& id) const {
  for (int i = 0; i < n_edges(); ++i)
    if (edges[static_cast<size_t>(i)].id == id) return i;
  throw SchemaError("unknown edge id '" + id + "'");
}

void Graph::validate() const {
  if (genus.size() != vertices.size()) throw SchemaError("genus vector size mismatch");
  std::set<std::string> seen(vertices.begin(), vertices.end());
  if (seen.size() != vertices.size()) throw SchemaError("duplicate vertex id");
  std::set<std::string> eseen;
  for (const auto& e : edges) {
    if (e.tail < 0 || e.tail >= n_vertices() || e.head < 0 || e.head >= n_vertices())
      throw SchemaError("edge '" + e.id + "' has an undeclared endpoint");
    if (!eseen.insert(e.id).second) throw SchemaError("duplicate edge id '" + e.id + "'");
  }
  for (int g : genus)
    if (g < 0) throw SchemaError("negative vertex genus");
  for (const auto& [label, v] : markings)
    if (v < 0 || v >= n_vertices()) throw SchemaError("marking '" + label + "' out of range");
}

Components components(const Graph& g, const std::vector<int>& edge_subset) {
  UnionFind uf(g.n_vertices());
  for (int e : edge_subset) uf.unite(g.edges[static_cast<size_t>(e)].tail, g.edges[static_cast<size_t>(e)].head);
  Components c;
  c.label.assign(static_cast<size_t>(g.n_vertices()), -1);
  std::vector<int> root_label(static_cast<size_t>(g.n_vertices()), -1);
  for (int v = 0; v < g.n_vertices(); ++v) {
    int r = uf.find(v);
    if (root_label[static_cast<size_t>(r)] < 0) root_label[static_cast<size_t>(r)] = c.count++;
    c.label[static_cast<size_t>(v)] = root_label[static_cast<size_t>(r)];
  }
  return c;
}

Components components(const Graph& g) {
  std::vector<int> all(static_cast<size_t>(g.n_edges()));
  std::iota(all.begin(), all.end(), 0);
  return components(g, all);
}

int betti_number(const Graph& g) { return g.n_edges() - g.n_vertices() + components(g).count; }

int augmented_genus(const Graph& g) {
  return betti_number(g) + std::accumulate(g.genus.begin(), g.genus.end(), 0);
}

Graph contract_edge(const Graph& g, int e) {
  const Edge& ed = g.edges.at(static_cast<size_t>(e));
  if (ed.is_loop()) throw SchemaError("cannot contract a loop");
  int keep = std::min(ed.tail, ed.head), drop = std::max(ed.tail, ed.head);
  auto remap = [&](int v) {
    if (v == drop) v = keep;
    return v > drop ? v - 1 : v;
  };
  Graph out;
  for (int v = 0; v < g.n_vertices(); ++v) {
    if (v == drop) continue;
    int gv = g.genus[static_cast<size_t>(v)] + (v == keep ? g.genus[static_cast<size_t>(drop)] : 0);
    out.add_vertex(g.vertices[static_cast<size_t>(v)], gv);
  }
  for (int i = 0; i < g.n_edges(); ++i) {
    if (i == e) continue;
    const Edge& x = g.edges[static_cast<size_t>(i)];
    out.add_edge(x.id, remap(x.tail), remap(x.head));
  }
  for (const auto& [label, v] : g.markings) out.markings[label] = remap(v);
  return out;
}

// ---------------------------------------------------------------- partitions

std::vector<int> OrderedPartition::levels() const {
  std::vector<int> lv(static_cast<size_t>(ambient), 0);
  for (int j = 0; j < rank(); ++j)
    for (int e : layers[static_cast<size_t>(j)]) lv.at(static_cast<size_t>(e)) = j + 1;
  for (int e : finite) lv.at(static_cast<size_t>(e)) = f_level();
  return lv;
}

const std::vector<int>& OrderedPartition::edges_at(int level) const {
  if (level == f_level()) return finite;
  return layers.at(static_cast<size_t>(level - 1));
}

bool OrderedPartition::covers_all() const {
  auto lv = levels();
  return std::all_of(lv.begin(), lv.end(), [](int x) { return x > 0; });
}

void OrderedPartition::validate() const {
  std::vector<int> seen(static_cast<size_t>(ambient), 0);
  auto mark = [&](int e) {
    if (e < 0 || e >= ambient) throw MalformedPartition("edge index out of range in partition");
    if (seen[static_cast<size_t>(e)]++) throw MalformedPartition("edge listed twice in partition");
  };
  for (const auto& layer : layers) {
    if (layer.empty()) throw MalformedPartition("empty layer in ordered partition");
    for (int e : layer) mark(e);
  }
  for (int e : finite) mark(e);
}

OrderedPartition OrderedPartition::trivial(int n_edges) {
  OrderedPartition p;
  p.ambient = n_edges;
  p.finite.resize(static_cast<size_t>(n_edges));
  std::iota(p.finite.begin(), p.finite.end(), 0);
  return p;
}

namespace {

using EdgeSet = std::set<int>;

std::vector<EdgeSet> filtration(const OrderedPartition& p) {
  std::vector<EdgeSet> f;
  EdgeSet acc;
  for (const auto& layer : p.layers) {
    acc.insert(layer.begin(), layer.end());
    f.push_back(acc);
  }
  return f;
}

EdgeSet support(const OrderedPartition& p) {
  EdgeSet s(p.finite.begin(), p.finite.end());
  for (const auto& layer : p.layers) s.insert(layer.begin(), layer.end());
  return s;
}

}  // namespace

bool refines(const OrderedPartition& coarse, const OrderedPartition& fine) {
  EdgeSet sc = support(coarse), sf = support(fine);
  if (!std::includes(sc.begin(), sc.end(), sf.begin(), sf.end())) return false;
  auto fc = filtration(coarse), ff = filtration(fine);
  for (const auto& s : fc)
    if (std::find(ff.begin(), ff.end(), s) == ff.end()) return false;
  return true;
}

bool tame_refines(const OrderedPartition& coarse, const OrderedPartition& fine) {
  if (!refines(coarse, fine)) return false;
  auto fc = filtration(coarse), ff = filtration(fine);
  if (ff.size() < fc.size()) return false;
  for (size_t j = 0; j < fc.size(); ++j)
    if (fc[j] != ff[j]) return false;
  return true;
}

// ---------------------------------------------------------------- minors

GradedMinorSet graded_minors(const Graph& g, const OrderedPartition& pi) {
  pi.validate();
  if (pi.ambient != g.n_edges()) throw MalformedPartition("partition ambient size differs from edge count");
  if (!pi.covers_all()) throw MalformedPartition("partition must cover every edge of the graph");
  const auto lv = pi.levels();
  GradedMinorSet out;
  out.rank = pi.rank();
  for (int k = 1; k <= pi.f_level(); ++k) {
    Minor m;
    m.level = k;
    std::vector<int> higher;
    for (int e = 0; e < g.n_edges(); ++e)
      if (lv[static_cast<size_t>(e)] > k) higher.push_back(e);
    Components c = components(g, higher);
    m.kappa = c.label;
    // augmented genus of each image vertex: vertex genera plus loops of the contracted part
    std::vector<int> gv(static_cast<size_t>(c.count), 0), nv(static_cast<size_t>(c.count), 0),
        ne(static_cast<size_t>(c.count), 0);
    std::vector<std::string> names(static_cast<size_t>(c.count));
    for (int v = 0; v < g.n_vertices(); ++v) {
      auto ci = static_cast<size_t>(c.label[static_cast<size_t>(v)]);
      gv[ci] += g.genus[static_cast<size_t>(v)];
      nv[ci] += 1;
      names[ci] += (names[ci].empty() ? "" : "+") + g.vertices[static_cast<size_t>(v)];
    }
    for (int e : higher) ne[static_cast<size_t>(c.label[static_cast<size_t>(g.edges[static_cast<size_t>(e)].tail)])] += 1;
    for (int ci = 0; ci < c.count; ++ci) {
      auto i = static_cast<size_t>(ci);
      m.graph.add_vertex(names[i], gv[i] + ne[i] - nv[i] + 1);
    }
    m.edge_pos.assign(static_cast<size_t>(g.n_edges()), -1);
    for (int e : pi.edges_at(k)) {
      const Edge& ed = g.edges[static_cast<size_t>(e)];
      m.edge_pos[static_cast<size_t>(e)] = m.graph.add_edge(ed.id, c.label[static_cast<size_t>(ed.tail)],
                                                            c.label[static_cast<size_t>(ed.head)]);
      m.edges.push_back(e);
    }
    out.minors.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------- cycles

std::vector<int> chain_boundary(const Graph& g, const std::vector<int>& chain) {
  std::vector<int> b(static_cast<size_t>(g.n_vertices()), 0);
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edges[static_cast<size_t>(e)];
    b[static_cast<size_t>(ed.head)] += chain[static_cast<size_t>(e)];
    b[static_cast<size_t>(ed.tail)] -= chain[static_cast<size_t>(e)];
  }
  return b;
}

CycleBasis admissible_basis(const Graph& g, const OrderedPartition& pi) {
  pi.validate();
  if (!pi.covers_all() || pi.ambient != g.n_edges())
    throw MalformedPartition("partition must cover every edge of the graph");
  const auto lv = pi.levels();
  std::vector<int> order(static_cast<size_t>(g.n_edges()));
  std::iota(order.begin(), order.end(), 0);
  // late layers first, ties by index
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lv[static_cast<size_t>(a)] > lv[static_cast<size_t>(b)]; });
  UnionFind uf(g.n_vertices());
  std::vector<bool> in_tree(static_cast<size_t>(g.n_edges()), false);
  std::vector<int> non_tree;
  for (int e : order) {
    const Edge& ed = g.edges[static_cast<size_t>(e)];
    if (uf.unite(ed.tail, ed.head))
      in_tree[static_cast<size_t>(e)] = true;
    else
      non_tree.push_back(e);
  }
  // adjacency of the forest
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(g.n_vertices()));
  for (int e = 0; e < g.n_edges(); ++e) {
    if (!in_tree[static_cast<size_t>(e)]) continue;
    const Edge& ed = g.edges[static_cast<size_t>(e)];
    adj[static_cast<size_t>(ed.tail)].push_back({ed.head, e});
    adj[static_cast<size_t>(ed.head)].push_back({ed.tail, e});
  }
  CycleBasis basis;
  basis.blocks.assign(static_cast<size_t>(pi.f_level()), {});
  // group by level ascending so that blocks are contiguous J^1, ..., J^f
  std::stable_sort(non_tree.begin(), non_tree.end(), [&](int a, int b) {
    if (lv[static_cast<size_t>(a)] != lv[static_cast<size_t>(b)]) return lv[static_cast<size_t>(a)] < lv[static_cast<size_t>(b)];
    return a < b;
  });
  for (int e : non_tree) {
    const Edge& ed = g.edges[static_cast<size_t>(e)];
    std::vector<int> cyc(static_cast<size_t>(g.n_edges()), 0);
    cyc[static_cast<size_t>(e)] = 1;
    if (!ed.is_loop()) {
      // tree path head -> tail
      std::vector<int> prev_v(static_cast<size_t>(g.n_vertices()), -2), prev_e(static_cast<size_t>(g.n_vertices()), -1);
      std::queue<int> q;
      q.push(ed.head);
      prev_v[static_cast<size_t>(ed.head)] = -1;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        if (v == ed.tail) break;
        for (auto [w, te] : adj[static_cast<size_t>(v)]) {
          if (prev_v[static_cast<size_t>(w)] != -2) continue;
          prev_v[static_cast<size_t>(w)] = v;
          prev_e[static_cast<size_t>(w)] = te;
          q.push(w);
        }
      }
      // walk back from tail to head; the cycle traverses head -> ... -> tail
      for (int w = ed.tail; w != ed.head;) {
        int v = prev_v[static_cast<size_t>(w)];
        int te = prev_e[static_cast<size_t>(w)];
        const Edge& t = g.edges[static_cast<size_t>(te)];
        cyc[static_cast<size_t>(te)] += (t.tail == v && t.head == w) ? 1 : -1;
        w = v;
      }
    }
    basis.blocks[static_cast<size_t>(lv[static_cast<size_t>(e)] - 1)].push_back(basis.size());
    basis.cycles.push_back(std::move(cyc));
  }
  return basis;
}

CycleBasis cycle_basis(const Graph& g) { return admissible_basis(g, OrderedPartition::trivial(g.n_edges())); }

// ---------------------------------------------------------------- trees

TreeEnumeration spanning_trees(const Graph& g, int cap) {
  if (g.n_edges() > cap)
    throw EnumerationCapExceeded("spanning tree enumeration capped at " + std::to_string(cap) + " edges");
  TreeEnumeration out;
  const Components c = components(g);
  out.disconnected = c.count > 1;
  const int need = g.n_vertices() - c.count;
  std::vector<int> cand;
  for (int e = 0; e < g.n_edges(); ++e)
    if (!g.edges[static_cast<size_t>(e)].is_loop()) cand.push_back(e);
  std::vector<int> chosen;
  std::function<void(size_t, UnionFind)> rec = [&](size_t i, UnionFind uf) {
    if (static_cast<int>(chosen.size()) == need) {
      out.trees.push_back(chosen);
      return;
    }
    if (static_cast<int>(cand.size() - i) < need - static_cast<int>(chosen.size())) return;
    const Edge& ed = g.edges[static_cast<size_t>(cand[i])];
    UnionFind with = uf;
    if (with.unite(ed.tail, ed.head)) {
      chosen.push_back(cand[i]);
      rec(i + 1, with);
      chosen.pop_back();
    }
    rec(i + 1, std::move(uf));
  };
  rec(0, UnionFind(g.n_vertices()));
  return out;
}

std::uint64_t count_spanning_trees(const Graph& g) {
  const Components c = components(g);
  Rational total = 1;
  for (int comp = 0; comp < c.count; ++comp) {
    std::vector<int> idx(static_cast<size_t>(g.n_vertices()), -1);
    int n = 0;
    for (int v = 0; v < g.n_vertices(); ++v)
      if (c.label[static_cast<size_t>(v)] == comp) idx[static_cast<size_t>(v)] = n++;
    if (n <= 1) continue;
    RationalMatrix L(static_cast<size_t>(n), std::vector<Rational>(static_cast<size_t>(n), 0));
    for (const auto& e : g.edges) {
      if (e.is_loop() || c.label[static_cast<size_t>(e.tail)] != comp) continue;
      auto a = static_cast<size_t>(idx[static_cast<size_t>(e.tail)]), b = static_cast<size_t>(idx[static_cast<size_t>(e.head)]);
      L[a][a] += 1;
      L[b][b] += 1;
      L[a][b] -= 1;
      L[b][a] -= 1;
    }
    // reduced Laplacian: drop the first row and column
    RationalMatrix R(static_cast<size_t>(n - 1), std::vector<Rational>(static_cast<size_t>(n - 1)));
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n; ++j) R[static_cast<size_t>(i - 1)][static_cast<size_t>(j - 1)] = L[static_cast<size_t>(i)][static_cast<size_t>(j)];
    total *= determinant(std::move(R));
  }
  return static_cast<std::uint64_t>(total.get_num().get_ui());
}

}  // namespace troplace
