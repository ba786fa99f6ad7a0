#pragma once

#include <optional>
#include <string>
#include <vector>

#include "troplace/graph.hpp"
#include "troplace/measure.hpp"

namespace troplace {

// Parsed JSON graph spec. Lengths default to 1 when absent.
struct GraphSpec {
  Graph graph;
  std::vector<double> length;
  bool has_lengths = false;
  std::optional<OrderedPartition> partition;
};

// Throws SchemaError on malformed input or unknown keys.
GraphSpec parse_graph_spec(const std::string& text);
GraphSpec load_graph_spec(const std::string& path);
// Deterministic pretty-printed JSON; parse(emit(s)) reproduces s.
std::string emit_graph_spec(const GraphSpec& spec);

// Point syntax: a vertex id, or [edge-id, offset].
Point parse_point(const Graph& g, const std::string& text);
std::string format_point(const Graph& g, const Point& p);

// {"atoms":[{"at":point,"mass":r}],"densities":{edge-id:r}}
GraphMeasure parse_measure(const Graph& g, const std::string& text);
std::string emit_measure(const Graph& g, const GraphMeasure& m);

// Compact partition syntax: layers separated by '|', finitary edges after ';'.
// "e1|e2,e3" has two layers and no finitary part; "e1;e2,e3" has one layer.
OrderedPartition parse_partition(const Graph& g, const std::string& text);
std::string format_partition(const Graph& g, const OrderedPartition& pi);

std::vector<std::string> preset_names();
GraphSpec preset(const std::string& name);  // throws SchemaError for unknown names

}  // namespace troplace
