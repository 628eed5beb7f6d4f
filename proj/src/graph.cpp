#include "graphdissect/graph.hpp"

#include <algorithm>

#include "graphdissect/errors.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

bool Graph::has_edge(int u, int v) const {
  const auto& nb = adjacency[u];
  return std::find(nb.begin(), nb.end(), v) != nb.end();
}

void Graph::add_edge(int u, int v) {
  if (u == v) return;
  if (has_edge(u, v)) return;
  adjacency[u].push_back(v);
  adjacency[v].push_back(u);
}

void Graph::normalize() {
  for (auto& nb : adjacency) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

int Graph::edge_count() const {
  int twice = 0;
  for (const auto& nb : adjacency) twice += static_cast<int>(nb.size());
  return twice / 2;
}

int Graph::max_degree() const {
  int m = 0;
  for (int v = 0; v < node_count; ++v) m = std::max(m, degree(v));
  return m;
}

std::pair<Graph, BatchIndex> make_batch(const GraphDataset& dataset,
                                        const std::vector<int>& graph_indices) {
  if (graph_indices.empty()) throw ConfigError("make_batch: empty graph index list");
  for (int id : graph_indices) {
    if (id < 0 || id >= dataset.size())
      throw ConfigError("make_batch: graph index " + std::to_string(id) + " out of range");
  }

  BatchIndex bi;
  bi.offsets.push_back(0);
  int total = 0;
  for (int id : graph_indices) {
    total += dataset.graphs[id].node_count;
    bi.offsets.push_back(total);
  }
  bi.index_vector.reserve(total);

  Graph batch;
  batch.resize(total);
  bool labeled = dataset.labeled();
  if (labeled) batch.node_labels.reserve(total);

  for (int pos = 0; pos < static_cast<int>(graph_indices.size()); ++pos) {
    const Graph& g = dataset.graphs[graph_indices[pos]];
    int base = bi.offsets[pos];
    for (int v = 0; v < g.node_count; ++v) {
      bi.index_vector.push_back(pos);
      if (labeled) batch.node_labels.push_back(g.node_labels[v]);
      auto& nb = batch.adjacency[base + v];
      nb.reserve(g.adjacency[v].size());
      for (int u : g.adjacency[v]) nb.push_back(base + u);
    }
  }
  return {std::move(batch), std::move(bi)};
}

std::vector<Graph> split_batch(const Graph& batch, const BatchIndex& index) {
  std::vector<Graph> out;
  out.reserve(index.graph_count());
  for (int i = 0; i < index.graph_count(); ++i) {
    auto [lo, hi] = index.node_range(i);
    Graph g;
    g.resize(hi - lo);
    if (batch.labeled())
      g.node_labels.assign(batch.node_labels.begin() + lo, batch.node_labels.begin() + hi);
    for (int v = lo; v < hi; ++v)
      for (int u : batch.adjacency[v]) g.adjacency[v - lo].push_back(u - lo);
    out.push_back(std::move(g));
  }
  return out;
}

void make_split(GraphDataset& dataset, double train_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction > 1.0)
    throw ConfigError("make_split: train_fraction must be in (0, 1]");
  Rng rng = substream(seed, "split");
  std::vector<std::vector<int>> by_class(dataset.num_classes);
  for (int i = 0; i < dataset.size(); ++i) by_class[dataset.graphs[i].graph_label].push_back(i);

  dataset.train_indices.clear();
  dataset.test_indices.clear();
  for (auto& ids : by_class) {
    rng.shuffle(ids);
    int n_train = static_cast<int>(train_fraction * static_cast<double>(ids.size()) + 0.5);
    n_train = std::min(n_train, static_cast<int>(ids.size()));
    for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
      if (i < n_train)
        dataset.train_indices.push_back(ids[i]);
      else
        dataset.test_indices.push_back(ids[i]);
    }
  }
  std::sort(dataset.train_indices.begin(), dataset.train_indices.end());
  std::sort(dataset.test_indices.begin(), dataset.test_indices.end());
}

}  // namespace graphdissect
