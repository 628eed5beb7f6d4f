#pragma once

#include <cstdint>
#include <vector>

#include "graphdissect/model.hpp"

namespace graphdissect {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

// Gradients with the same tensor layout as ModelParams.
struct ParamGrads {
  std::vector<LayerParams> layers;
  HeadParams head;
};

ParamGrads zero_grads(const ModelParams& params);

// Mean cross-entropy loss over the listed graphs and its exact gradient,
// computed by backpropagation through head, pooling and message-passing
// layers. No weight decay term.
double loss_and_gradients(const ModelParams& params, const GraphDataset& dataset,
                          const std::vector<int>& graph_ids, ParamGrads& grads);

// Minibatch Adam on mean cross-entropy with L2 decay added to the gradients.
TrainResult train(const ModelConfig& config, const GraphDataset& dataset);

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};
EvalStats evaluate(const ModelParams& params, const GraphDataset& dataset,
                   const std::vector<int>& graph_ids);

// Compares analytic gradients against central finite differences on a random
// parameter subset; returns the max relative error.
double gradient_check(const ModelParams& params, const GraphDataset& dataset, int graph_id,
                      double epsilon, int sample_count = 200, std::uint64_t seed = 0);

}  // namespace graphdissect
