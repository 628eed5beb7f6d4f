#include "graphdissect/synthetic.hpp"

#include <algorithm>

#include "graphdissect/errors.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

namespace {

// Random forest on n nodes with degree cap; nodes that cannot attach stay
// isolated (isolated nodes are retained by design).
Graph random_capped_tree(int n, int cap, Rng& rng) {
  Graph g;
  g.resize(n);
  for (int v = 1; v < n; ++v) {
    std::vector<int> eligible;
    for (int u = 0; u < v; ++u)
      if (g.degree(u) < cap) eligible.push_back(u);
    if (eligible.empty()) continue;
    int u = eligible[rng.uniform_int(0, static_cast<int>(eligible.size()) - 1)];
    g.add_edge(v, u);
  }
  return g;
}

// Adds edges between nodes of degree <= cap-1 until the graph has
// target_edges edges or no eligible pair remains.
void fill_edges_capped(Graph& g, int target_edges, int cap, Rng& rng) {
  while (g.edge_count() < target_edges) {
    std::vector<std::pair<int, int>> eligible;
    for (int u = 0; u < g.node_count; ++u) {
      if (g.degree(u) > cap - 1) continue;
      for (int v = u + 1; v < g.node_count; ++v)
        if (g.degree(v) <= cap - 1 && !g.has_edge(u, v)) eligible.push_back({u, v});
    }
    if (eligible.empty()) return;
    auto [u, v] = eligible[rng.uniform_int(0, static_cast<int>(eligible.size()) - 1)];
    g.add_edge(u, v);
  }
}

}  // namespace

GraphDataset gen_planted_degree_dataset(int n_graphs, int threshold, std::uint64_t seed,
                                        PlantedDegreeOptions options) {
  if (n_graphs < 2 || n_graphs % 2 != 0)
    throw ConfigError("gen_planted_degree_dataset: n_graphs must be even and >= 2");
  if (threshold < 1) throw ConfigError("gen_planted_degree_dataset: threshold must be >= 1");

  const int small_clique = threshold + 1;  // member degree = threshold, legal everywhere
  const int feasible_min = 2 * threshold + 5;
  int n_min = options.n_min > 0 ? options.n_min : 2 * threshold + 12;
  int n_max = options.n_max > 0 ? options.n_max : n_min + 20;
  if (n_min > n_max)
    throw ConfigError("gen_planted_degree_dataset: n_min > n_max");
  if (n_max < feasible_min)
    throw GenerationError("gen_planted_degree_dataset: threshold " + std::to_string(threshold) +
                          " infeasible for max graph size " + std::to_string(n_max));

  Rng rng = substream(seed, "planted-degree");
  GraphDataset ds;
  ds.num_classes = 2;
  ds.graphs.reserve(n_graphs);

  // Hubs are a floating K_{t+2} clique, so hub neighborhoods stay inside the
  // hub set and the hub boundary is structurally sharp. Both classes
  // additionally carry a varying number of K_{t+1} cliques (member degree
  // exactly = threshold) over a noisy forest base: clique-member counts
  // interleave between the classes, so thresholding the degree at the
  // planted value is the only statistic that separates them cleanly.
  auto make_graph = [&](bool positive) {
    int n = rng.uniform_int(std::max(n_min, feasible_min), std::max(n_max, feasible_min));
    int hub_clique = positive ? threshold + 2 : 0;
    int budget = n - 1 - hub_clique;
    int max_small = std::min(3, budget / small_clique);
    int lo_small = positive ? 0 : 1;
    int smalls = max_small <= lo_small ? lo_small : rng.uniform_int(lo_small, max_small - (positive ? 1 : 0));
    int base_nodes = n - hub_clique - smalls * small_clique;

    Graph g = random_capped_tree(base_nodes, threshold, rng);
    fill_edges_capped(g, g.edge_count() + rng.uniform_int(0, base_nodes), threshold, rng);

    auto append_clique = [&](int size) {
      int base = g.node_count;
      g.node_count += size;
      g.adjacency.resize(g.node_count);
      for (int u = 0; u < size; ++u)
        for (int v = u + 1; v < size; ++v) g.add_edge(base + u, base + v);
    };
    for (int j = 0; j < smalls; ++j) append_clique(small_clique);
    if (positive) append_clique(hub_clique);

    if (positive && g.max_degree() <= threshold)
      throw GenerationError("gen_planted_degree_dataset: failed to plant a hub (n=" +
                            std::to_string(n) + ", threshold=" + std::to_string(threshold) + ")");
    g.graph_label = positive ? 1 : 0;
    g.normalize();
    return g;
  };

  for (int pair = 0; pair < n_graphs / 2; ++pair) {
    ds.graphs.push_back(make_graph(false));
    ds.graphs.push_back(make_graph(true));
  }
  return ds;
}

}  // namespace graphdissect
