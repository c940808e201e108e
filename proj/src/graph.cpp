#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "csv.hpp"
#include "errors.hpp"

namespace nowcast {

int CountyIndex::require_index(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw InputError("unknown county id: " + id);
  return it->second;
}

CountyIndex CountyIndex::from_ids(std::vector<std::string> ids) {
  CountyIndex ci;
  ci.ids = std::move(ids);
  for (std::size_t k = 0; k < ci.ids.size(); ++k) {
    if (ci.index.count(ci.ids[k])) throw InputError("duplicate county id: " + ci.ids[k]);
    ci.index[ci.ids[k]] = static_cast<int>(k);
  }
  return ci;
}

CountyIndex load_county_list(const std::string& population_csv) {
  CsvTable table = read_csv_file(population_csv);
  require_header(table, {"county_id", "population"}, population_csv);
  std::vector<std::string> ids;
  for (const auto& row : table.rows) {
    if (parse_int(row[1], "population") <= 0)
      throw InputError("county " + row[0] + " has non-positive population");
    ids.push_back(row[0]);
  }
  return CountyIndex::from_ids(std::move(ids));
}

bool CountyGraph::adjacent(int i, int j) const {
  const auto& nb = neighbors[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

int CountyGraph::require_index(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw InputError("unknown county id: " + id);
  return it->second;
}

CountyGraph make_graph(const std::vector<std::pair<std::string, long long>>& populations,
                       const std::vector<std::pair<std::string, std::string>>& edge_list) {
  CountyGraph g;
  if (populations.empty()) throw InputError("county list is empty");
  for (const auto& [id, pop] : populations) {
    if (g.index.count(id)) throw InputError("duplicate county id: " + id);
    if (pop <= 0) throw InputError("county " + id + " has non-positive population");
    g.index[id] = g.size();
    g.county_ids.push_back(id);
    g.population.push_back(pop);
    g.offset.push_back(std::log(static_cast<double>(pop)));
  }
  std::set<std::pair<int, int>> uniq;
  for (const auto& [a, b] : edge_list) {
    int i = g.require_index(a);
    int j = g.require_index(b);
    if (i == j) throw InputError("self-edge on county " + a);
    uniq.insert({std::min(i, j), std::max(i, j)});
  }
  g.neighbors.assign(g.size(), {});
  for (const auto& [i, j] : uniq) {
    g.edges.push_back({i, j});
    g.neighbors[i].push_back(j);
    g.neighbors[j].push_back(i);
  }
  g.degree.resize(g.size());
  for (int i = 0; i < g.size(); ++i) {
    std::sort(g.neighbors[i].begin(), g.neighbors[i].end());
    g.degree[i] = static_cast<int>(g.neighbors[i].size());
    if (g.degree[i] == 0)
      throw InputError("county " + g.county_ids[i] +
                       " has no neighbors; the spatial prior requires an island-free graph");
  }
  return g;
}

CountyGraph grid_graph(int rows, int cols, long long population) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw InputError("grid graph needs at least 2 counties");
  std::vector<std::pair<std::string, long long>> pops;
  std::vector<std::pair<std::string, std::string>> edges;
  auto name = [](int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      pops.push_back({name(r, c), population});
      if (r + 1 < rows) edges.push_back({name(r, c), name(r + 1, c)});
      if (c + 1 < cols) edges.push_back({name(r, c), name(r, c + 1)});
    }
  return make_graph(pops, edges);
}

CountyGraph load_graph(const std::string& population_csv, const std::string& edge_csv) {
  CsvTable pop_table = read_csv_file(population_csv);
  require_header(pop_table, {"county_id", "population"}, population_csv);
  std::vector<std::pair<std::string, long long>> pops;
  for (const auto& row : pop_table.rows)
    pops.push_back({row[0], parse_int(row[1], "population")});

  CsvTable edge_table = read_csv_file(edge_csv);
  require_header(edge_table, {"county_a", "county_b"}, edge_csv);
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& row : edge_table.rows) edges.push_back({row[0], row[1]});

  return make_graph(pops, edges);
}

}  // namespace nowcast
