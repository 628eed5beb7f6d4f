#include "fixtures.hpp"

#include <algorithm>

namespace graphdissect::testsupport {

namespace {

enum MutagLabel { C = 0, N = 1, O = 2, F = 3, I = 4, Cl = 5, Br = 6 };

int add_atom(Graph& g, std::vector<int>& labels, int label, int bond_to) {
  int v = g.node_count;
  g.node_count += 1;
  g.adjacency.push_back({});
  labels.push_back(label);
  if (bond_to >= 0) g.add_edge(v, bond_to);
  return v;
}

// ring of `size` carbons; returns the first ring node index
int add_carbon_ring(Graph& g, std::vector<int>& labels, int size) {
  int first = -1, prev = -1;
  for (int i = 0; i < size; ++i) {
    int v = add_atom(g, labels, C, prev);
    if (first < 0) first = v;
    prev = v;
  }
  g.add_edge(prev, first);
  return first;
}

void add_nitro(Graph& g, std::vector<int>& labels, int ring_atom) {
  int n = add_atom(g, labels, N, ring_atom);
  add_atom(g, labels, O, n);
  add_atom(g, labels, O, n);
}

Graph make_molecule(bool mutagenic, Rng& rng) {
  Graph g;
  std::vector<int> labels;
  int ring_size = rng.uniform_int(5, 6);
  int first = add_carbon_ring(g, labels, ring_size);

  if (rng.uniform() < 0.3) {
    int second = add_carbon_ring(g, labels, rng.uniform_int(5, 6));
    g.add_edge(first, second);
  }

  std::vector<int> positions;
  for (int v = 0; v < g.node_count; ++v) positions.push_back(v);
  rng.shuffle(positions);
  std::size_t next_pos = 0;
  auto take_position = [&]() { return positions[next_pos++ % positions.size()]; };

  if (mutagenic) {
    int nitros = rng.uniform_int(1, 2);
    for (int i = 0; i < nitros; ++i) add_nitro(g, labels, take_position());
  }

  // benign decorations; class 0 still sees N and O atoms, just never a nitro
  static const int benign[] = {O, N, F, Cl, C, O, N, Br, I};
  int decorations = mutagenic ? rng.uniform_int(0, 2) : rng.uniform_int(1, 3);
  for (int i = 0; i < decorations; ++i) {
    int kind = benign[rng.uniform_int(0, 8)];
    int v = add_atom(g, labels, kind, take_position());
    // occasionally a hydroxylamine-style N-O pair, never N-O2
    if (kind == N && rng.uniform() < 0.4) add_atom(g, labels, O, v);
  }

  g.node_labels = labels;
  g.graph_label = mutagenic ? 1 : 0;
  g.normalize();
  return g;
}

}  // namespace

GraphDataset gen_molecule_fixture(int n_graphs, std::uint64_t seed) {
  Rng rng = substream(seed, "molecule-fixture");
  GraphDataset ds;
  ds.num_classes = 2;
  ds.label_alphabet = {"C", "N", "O", "F", "I", "Cl", "Br"};
  for (int i = 0; i < n_graphs; ++i) ds.graphs.push_back(make_molecule(i % 2 == 1, rng));
  return ds;
}

GraphDataset gen_label_toy(int n_graphs, std::uint64_t seed) {
  Rng rng = substream(seed, "label-toy");
  GraphDataset ds;
  ds.num_classes = 2;
  ds.label_alphabet = {"C", "O"};
  for (int i = 0; i < n_graphs; ++i) {
    int n = rng.uniform_int(4, 8);
    Graph g;
    g.resize(n);
    for (int v = 1; v < n; ++v) g.add_edge(v, rng.uniform_int(0, v - 1));
    g.node_labels.assign(n, 0);
    g.graph_label = i % 2;
    if (g.graph_label == 1) g.node_labels[rng.uniform_int(0, n - 1)] = 1;
    g.normalize();
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

Graph random_graph(int n, double edge_prob, Rng& rng) {
  Graph g;
  g.resize(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < edge_prob) g.add_edge(u, v);
  g.normalize();
  return g;
}

GraphDataset random_unlabeled_dataset(int n_graphs, int n_min, int n_max, double edge_prob,
                                      std::uint64_t seed) {
  Rng rng = substream(seed, "random-unlabeled");
  GraphDataset ds;
  ds.num_classes = 2;
  for (int i = 0; i < n_graphs; ++i) {
    Graph g = random_graph(rng.uniform_int(n_min, n_max), edge_prob, rng);
    g.graph_label = rng.uniform_int(0, 1);
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

}  // namespace graphdissect::testsupport
