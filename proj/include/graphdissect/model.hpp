#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphdissect/graph.hpp"

namespace graphdissect {

enum class LayerType { Gin, Gcn };

std::string layer_type_name(LayerType t);
LayerType layer_type_from_name(const std::string& s);

struct ModelConfig {
  int num_layers = 3;
  int hidden_dim = 64;
  LayerType layer_type = LayerType::Gin;
  int num_classes = 2;
  double learning_rate = 1e-3;
  double weight_decay = 1e-3;
  int epochs = 850;
  std::optional<int> early_stop_patience;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// One message-passing layer. GIN holds a two-linear-layer update MLP
// (w1/b1, w2/b2, ReLU between and after, epsilon fixed to 0); GCN holds a
// single linear map (w1/b1) applied after symmetric-normalized propagation.
struct LayerParams {
  LayerType type = LayerType::Gin;
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;
};

struct HeadParams {
  Eigen::MatrixXd w;  // num_classes x hidden_dim
  Eigen::VectorXd b;  // num_classes
};

struct ModelParams {
  ModelConfig config;
  int input_dim = 0;
  std::vector<LayerParams> layers;
  HeadParams head;
};

// Per-layer activations captured during a forward pass. layer_acts[0] is the
// input feature matrix, layer_acts[l] the post-ReLU output of layer l; each is
// hidden_dim (or input_dim) x node_count with one column per node.
struct ActivationRecord {
  std::vector<Eigen::MatrixXd> layer_acts;
  Eigen::VectorXd pooled;  // global add pooling of the final layer
  Eigen::VectorXd logits;
};

// Glorot-uniform weights, zero biases, drawn from the "init" substream of
// config.seed.
ModelParams init_params(const ModelConfig& config, int input_dim);

// Input features: one-hot node labels for labeled datasets, constant 1 for
// unlabeled ones.
Eigen::MatrixXd build_features(const Graph& graph, const GraphDataset& dataset);
int feature_dim(const GraphDataset& dataset);

// Sum of own and neighbor columns: out[:,v] = h[:,v] + sum_{u in N(v)} h[:,u].
Eigen::MatrixXd aggregate_sum(const Eigen::MatrixXd& h, const Graph& graph);
// Symmetric-normalized propagation with self loops (A+I scaled by degree).
Eigen::MatrixXd aggregate_gcn(const Eigen::MatrixXd& h, const Graph& graph);

Eigen::MatrixXd gin_layer_forward(const Eigen::MatrixXd& h, const Graph& graph,
                                  const LayerParams& params);
Eigen::MatrixXd gcn_layer_forward(const Eigen::MatrixXd& h, const Graph& graph,
                                  const LayerParams& params);

ActivationRecord forward_with_activations(const ModelParams& params, const Graph& graph,
                                          const GraphDataset& dataset);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// Cross-entropy of softmax(logits) against the label.
double cross_entropy(const Eigen::VectorXd& logits, int label);
int predicted_class(const Eigen::VectorXd& logits);

}  // namespace graphdissect
