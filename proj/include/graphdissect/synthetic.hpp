#pragma once

#include <cstdint>

#include "graphdissect/graph.hpp"

namespace graphdissect {

struct PlantedDegreeOptions {
  // Total node-count bounds per graph; 0 means derive from the threshold.
  int n_min = 0;
  int n_max = 0;
};

// Balanced two-class synthetic dataset of unlabeled graphs. Every class-1
// graph contains hub nodes of degree > threshold (a floating clique, so hub
// neighborhoods stay inside the hub set); class-0 graphs have max degree
// <= threshold but carry the same sub-threshold structures, so only the hubs
// separate the classes reliably. Deterministic under seed.
GraphDataset gen_planted_degree_dataset(int n_graphs, int threshold, std::uint64_t seed,
                                        PlantedDegreeOptions options = {});

}  // namespace graphdissect
