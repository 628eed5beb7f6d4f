#pragma once

#include <filesystem>
#include <string>

#include "graphdissect/graph.hpp"

namespace graphdissect {

// Reads a TU-format plain-text dataset: <name>_A.txt (1-based comma-separated
// edge pairs), <name>_graph_indicator.txt, <name>_graph_labels.txt and
// optionally <name>_node_labels.txt. Indices come back 0-based, adjacency
// symmetrized, labels remapped to dense {0..r-1}. No split is assigned.
GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes the dataset back out in the same format (node labels only when the
// dataset is labeled). Splits are not serialized.
void save_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& dir,
                     const std::string& name);

}  // namespace graphdissect
