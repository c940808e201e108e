#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nowcast {

// Ordered county universe. The triangle builders only need ids and indices;
// the adjacency-free indicator pipeline uses this directly.
struct CountyIndex {
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(ids.size()); }
  int require_index(const std::string& id) const;  // throws InputError

  static CountyIndex from_ids(std::vector<std::string> ids);
};

// County list in file order from a population CSV (population values are
// validated but only the ids are kept).
CountyIndex load_county_list(const std::string& population_csv);

// County adjacency with populations. Offsets are log-population and enter the
// outcome model's rate directly. Construction rejects isolated counties: the
// spatial prior conditions each county on its neighbors, so an island would
// have an undefined conditional.
struct CountyGraph {
  std::vector<std::string> county_ids;
  std::unordered_map<std::string, int> index;
  std::vector<long long> population;
  std::vector<double> offset;               // log(population)
  std::vector<std::vector<int>> neighbors;  // sorted adjacency lists
  std::vector<int> degree;
  std::vector<std::pair<int, int>> edges;   // unique undirected pairs, i < j

  int size() const { return static_cast<int>(county_ids.size()); }
  bool adjacent(int i, int j) const;
  int require_index(const std::string& id) const;  // throws InputError
  CountyIndex counties() const { return CountyIndex::from_ids(county_ids); }
};

// Builds a graph from (county_id, population) pairs and an undirected edge
// list. Duplicate edges collapse; self-loops, unknown counties, non-positive
// populations, and isolated counties are errors.
CountyGraph make_graph(const std::vector<std::pair<std::string, long long>>& populations,
                       const std::vector<std::pair<std::string, std::string>>& edge_list);

// Rook-adjacency grid of rows×cols counties named r<row>c<col>, all with the
// same population. Used by the simulator.
CountyGraph grid_graph(int rows, int cols, long long population);

CountyGraph load_graph(const std::string& population_csv, const std::string& edge_csv);

}  // namespace nowcast
