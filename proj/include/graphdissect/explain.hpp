#pragma once

#include <string>
#include <vector>

#include "graphdissect/search.hpp"

namespace graphdissect {

// Node/edge importance masks for one (graph, class, neuron) triple paired with
// the neuron's best concept. eta_V = w[y,k] * H^(L)[k,:]; edge values are the
// endpoint sums restricted to edges.
struct ConceptActivationMap {
  int neuron = 0;
  int cls = 0;
  int graph_id = 0;
  ConceptFormula concept_formula;
  double threshold = 0.0;
  std::vector<double> node_mask;                    // eta_V, one per node
  std::vector<std::tuple<int, int, double>> edges;  // (u, v, eta_E[u,v]) with u < v
  std::vector<std::uint8_t> concept_nodes;          // activations > threshold

  // eta_E as a matrix entry: 0 off-edges, symmetric on edges.
  double edge_value(int i, int j) const;
};

// Neurons with positive head weight for the class.
std::vector<int> select_global_neurons(const HeadParams& head, int cls);

// Dataset graph with the highest peak activation of neuron k; ties resolve to
// the lowest graph id.
int best_exemplar(int k, const DissectionContext& final_layer_acts);

ConceptActivationMap concept_activation_map(const ModelParams& params,
                                            const GraphDataset& dataset, int graph_id, int cls,
                                            int neuron, const NeuronConceptMap& concept_map);

// w^y_k * n^k_G
double absolute_contribution(const ModelParams& params, const GraphDataset& dataset, int graph_id,
                             int cls, int neuron);

struct EntropyMaskOptions {
  int steps = 100;
  double lr = 0.05;
};

// Sigmoid-relaxed neuron mask over the pooled final-layer values, optimized by
// gradient descent on -log P(class | masked pooled). The mask never touches
// model parameters. A step that increases the objective is reverted and the
// learning rate halved for the remainder, so the final objective never
// exceeds the initial one.
struct EntropyMask {
  Eigen::VectorXd eta;
  Eigen::VectorXd sigma;            // sigma(eta)
  std::vector<std::uint8_t> selected;  // round(sigma)
  std::vector<double> objective_history;
  std::vector<Eigen::VectorXd> sigma_history;
};

double entropy_objective(const ModelParams& params, const Eigen::VectorXd& pooled, int cls,
                         const Eigen::VectorXd& eta);

EntropyMask entropy_mask_optimize(const ModelParams& params, const GraphDataset& dataset,
                                  int graph_id, int cls, EntropyMaskOptions options = {});

struct EntropyImportance {
  double sigma = 0.0;
  bool selected = false;
  double weighted = 0.0;  // w^y_k * n^k_G when selected, else 0
};

EntropyImportance entropy_importance(const EntropyMask& mask, const ModelParams& params,
                                     const GraphDataset& dataset, int graph_id, int cls,
                                     int neuron);

struct NeuronExplanation {
  int neuron = 0;
  ConceptFormula formula;
  double score = 0.0;
  double threshold = 0.0;
  int exemplar_graph = 0;
  double abs_contribution = 0.0;
  EntropyImportance entropy;
  ConceptActivationMap cam;
  std::vector<int> collapsed_duplicates;  // neurons folded into this one
};

struct GlobalExplanation {
  int cls = 0;
  std::vector<NeuronExplanation> neurons;  // ranked by concept score
  std::string warning;                     // set when S_glob is empty
};

GlobalExplanation build_global_explanation(const ModelParams& params, const GraphDataset& dataset,
                                           const DissectionContext& final_layer_acts,
                                           const NeuronConceptMap& concept_map, int cls,
                                           EntropyMaskOptions entropy_options = {});

// Deterministic DOT rendering: fill color from min-max normalized eta_V, pen
// width from normalized eta_E, doublecircle marks the thresholded concept set.
std::string to_dot(const ConceptActivationMap& cam, const GraphDataset& dataset);

}  // namespace graphdissect
