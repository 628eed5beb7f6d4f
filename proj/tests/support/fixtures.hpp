#pragma once

#include <cstdint>

#include "graphdissect/graph.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect::testsupport {

// Deterministic molecular dataset with the MUTAG node alphabet
// {C,N,O,F,I,Cl,Br}. Every molecule is one or two carbon rings with
// decorations hanging off ring atoms; class 1 molecules carry at least one
// nitro group (an N bonded to two O), class 0 molecules never do but still
// contain N and O atoms in other arrangements. Stands in for MUTAG in tests.
GraphDataset gen_molecule_fixture(int n_graphs, std::uint64_t seed);

// Tiny separable task over alphabet {C,O}: class 1 iff the graph contains a
// node labeled O.
GraphDataset gen_label_toy(int n_graphs, std::uint64_t seed);

// Erdos-Renyi-style graph, unlabeled.
Graph random_graph(int n, double edge_prob, Rng& rng);

// Unlabeled dataset of random graphs with random binary labels.
GraphDataset random_unlabeled_dataset(int n_graphs, int n_min, int n_max, double edge_prob,
                                      std::uint64_t seed);

}  // namespace graphdissect::testsupport
