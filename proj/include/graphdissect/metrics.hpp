#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphdissect/search.hpp"
#include "graphdissect/train.hpp"

namespace graphdissect {

struct NeuronMetrics {
  int neuron = 0;
  double importance = 0.0;
  double correctness = 0.0;
  double interpretability = 0.0;
  bool dead = false;
  bool correctness_degenerate = false;
};

// Pooled final-layer values n^k_G, one column per listed graph.
Eigen::MatrixXd pooled_matrix(const ModelParams& params, const GraphDataset& dataset,
                              const std::vector<int>& graph_ids, int threads = 0);

// Per-graph cross-entropy of the model's own predictions.
std::vector<double> per_graph_losses(const ModelParams& params, const GraphDataset& dataset,
                                     const std::vector<int>& graph_ids, int threads = 0);

// Dataset-averaged population variance of the per-class logit contributions
// w^j_k * n^k_G.
double neuron_importance(const HeadParams& head, int k, const Eigen::MatrixXd& pooled);

// |Pearson(n^k_G, -loss_G)|; 0 with the degenerate flag when either side has
// zero variance.
double neuron_correctness(int k, const Eigen::MatrixXd& pooled, std::span<const double> losses,
                          bool* degenerate = nullptr);

std::vector<NeuronMetrics> compute_neuron_metrics(const ModelParams& params,
                                                  const GraphDataset& dataset,
                                                  const std::vector<int>& graph_ids,
                                                  const NeuronConceptMap& concept_map,
                                                  int threads = 0);

// Mean interpretability over non-dead neurons; errors when all are dead.
double model_interpretability(std::span<const NeuronMetrics> metrics);

struct SweepPoint {
  int sweep_value = 0;  // epochs (epoch sweep) or layer (layer sweep)
  double test_accuracy = 0.0;
  double interpretability = 0.0;
  std::vector<NeuronMetrics> metrics;
};

// One freshly trained+dissected model per epoch budget; seeds derived from the
// shared base seed.
std::vector<SweepPoint> sweep_epochs(const ModelConfig& config, const GraphDataset& dataset,
                                     const std::vector<int>& epoch_list,
                                     const std::vector<BaseConcept>& atoms,
                                     const SearchOptions& search);

// Dissects every layer of one trained model; returns per-layer points with
// interpretability = that layer's mean over non-dead neurons.
std::vector<SweepPoint> sweep_layers(const ModelParams& params, const GraphDataset& dataset,
                                     const std::vector<int>& graph_ids,
                                     const std::vector<BaseConcept>& atoms,
                                     const SearchOptions& search);

}  // namespace graphdissect
