#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace troplace {

struct Edge {
  std::string id;
  int tail = 0;
  int head = 0;
  bool is_loop() const { return tail == head; }
};

// Finite multigraph; loops and parallel edges allowed. Vertices and edges are
// addressed by index, string ids are kept for I/O.
struct Graph {
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  std::vector<int> genus;                 // per vertex, default 0
  std::map<std::string, int> markings;    // label -> vertex index

  int add_vertex(const std::string& id, int g = 0);
  int add_edge(const std::string& id, int tail, int head);
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int vertex_index(const std::string& id) const;  // throws SchemaError
  int edge_index(const std::string& id) const;    // throws SchemaError
  void validate() const;
};

struct Components {
  int count = 0;
  std::vector<int> label;  // vertex -> component, numbered by lowest vertex
};

// Components of the spanning subgraph (V, edge_subset).
Components components(const Graph& g, const std::vector<int>& edge_subset);
Components components(const Graph& g);

int betti_number(const Graph& g);
int augmented_genus(const Graph& g);

// Contract a non-loop edge; the merged vertex keeps the summed genus.
Graph contract_edge(const Graph& g, int e);

// Ordered partition (pi_1, ..., pi_r, pi_f) of a subset of the edge indices
// 0..ambient-1. Levels are numbered 1..r for the layers and r+1 for pi_f.
struct OrderedPartition {
  std::vector<std::vector<int>> layers;
  std::vector<int> finite;
  int ambient = 0;

  int rank() const { return static_cast<int>(layers.size()); }
  int f_level() const { return rank() + 1; }
  // per edge level; 0 marks edges outside E_pi
  std::vector<int> levels() const;
  const std::vector<int>& edges_at(int level) const;
  bool covers_all() const;
  void validate() const;  // throws MalformedPartition
  static OrderedPartition trivial(int n_edges);
};

// coarse ⪯ fine in the partial order on ordered partitions.
bool refines(const OrderedPartition& coarse, const OrderedPartition& fine);
// fine is a tame refinement of coarse: refinement with equal first r' layers.
bool tame_refines(const OrderedPartition& coarse, const OrderedPartition& fine);

struct Minor {
  int level = 0;
  Graph graph;             // augmented: vertex genus includes contracted loops
  std::vector<int> kappa;  // original vertex -> minor vertex
  std::vector<int> edges;  // minor edge -> original edge
  std::vector<int> edge_pos;  // original edge -> minor edge or -1
};

struct GradedMinorSet {
  int rank = 0;
  std::vector<Minor> minors;  // minors[k-1] is level k, the last one is Gamma^f
  const Minor& level(int k) const { return minors.at(static_cast<size_t>(k - 1)); }
  int levels() const { return rank + 1; }
};

GradedMinorSet graded_minors(const Graph& g, const OrderedPartition& pi);

struct CycleBasis {
  std::vector<std::vector<int>> cycles;  // coefficient per edge (-1, 0, 1)
  std::vector<std::vector<int>> blocks;  // blocks[k-1] = indices J^k, last is J^f
  int size() const { return static_cast<int>(cycles.size()); }
};

CycleBasis admissible_basis(const Graph& g, const OrderedPartition& pi);
CycleBasis cycle_basis(const Graph& g);

// Vertex boundary of an integer chain, head minus tail.
std::vector<int> chain_boundary(const Graph& g, const std::vector<int>& chain);

struct TreeEnumeration {
  std::vector<std::vector<int>> trees;  // maximal spanning forests, sorted edge lists
  bool disconnected = false;
};

TreeEnumeration spanning_trees(const Graph& g, int cap = 20);

// Number of maximal spanning forests via the matrix-tree theorem (exact).
std::uint64_t count_spanning_trees(const Graph& g);

}  // namespace troplace
