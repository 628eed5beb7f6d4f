#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace graphdissect {

// Undirected node-labeled graph. Adjacency is symmetric, self-loop free,
// neighbor lists sorted ascending once normalized.
struct Graph {
  int node_count = 0;
  std::vector<std::vector<int>> adjacency;
  std::vector<int> node_labels;  // indices into the dataset alphabet; empty if unlabeled
  int graph_label = -1;

  bool labeled() const { return !node_labels.empty(); }
  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }

  void resize(int n) {
    node_count = n;
    adjacency.assign(n, {});
  }

  bool has_edge(int u, int v) const;
  // Inserts the undirected edge if absent; ignores self-loops and duplicates.
  void add_edge(int u, int v);
  // Sorts neighbor lists and drops duplicates.
  void normalize();
  int edge_count() const;
  int max_degree() const;
};

struct GraphDataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::vector<std::string> label_alphabet;  // empty if unlabeled
  std::vector<int> train_indices;
  std::vector<int> test_indices;

  bool labeled() const { return !label_alphabet.empty(); }
  int size() const { return static_cast<int>(graphs.size()); }
};

// Maps each node of a batched (disjoint-union) graph to the position of its
// owning graph within the batch.
struct BatchIndex {
  std::vector<int> index_vector;  // one entry per node, nondecreasing
  std::vector<int> offsets;       // offsets[i] = first node of batch member i; offsets.back() = total

  int graph_count() const { return static_cast<int>(offsets.size()) - 1; }
  int total_nodes() const { return offsets.empty() ? 0 : offsets.back(); }
  std::pair<int, int> node_range(int i) const { return {offsets[i], offsets[i + 1]}; }
};

// Disjoint union of the selected graphs with block-diagonal adjacency.
std::pair<Graph, BatchIndex> make_batch(const GraphDataset& dataset,
                                        const std::vector<int>& graph_indices);

// Inverse of make_batch: slices the union back into member graphs.
std::vector<Graph> split_batch(const Graph& batch, const BatchIndex& index);

// Stratified train/test split, stored into the dataset. Deterministic under seed.
void make_split(GraphDataset& dataset, double train_fraction, std::uint64_t seed);

}  // namespace graphdissect
