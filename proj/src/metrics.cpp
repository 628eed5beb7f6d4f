#include "graphdissect/metrics.hpp"

#include <cmath>

#include "graphdissect/errors.hpp"
#include "graphdissect/parallel.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

Eigen::MatrixXd pooled_matrix(const ModelParams& params, const GraphDataset& dataset,
                              const std::vector<int>& graph_ids, int threads) {
  Eigen::MatrixXd pooled(params.config.hidden_dim, graph_ids.size());
  parallel_for(static_cast<int>(graph_ids.size()), threads, [&](int i) {
    pooled.col(i) =
        forward_with_activations(params, dataset.graphs.at(graph_ids[i]), dataset).pooled;
  });
  return pooled;
}

std::vector<double> per_graph_losses(const ModelParams& params, const GraphDataset& dataset,
                                     const std::vector<int>& graph_ids, int threads) {
  std::vector<double> losses(graph_ids.size());
  parallel_for(static_cast<int>(graph_ids.size()), threads, [&](int i) {
    const Graph& g = dataset.graphs.at(graph_ids[i]);
    ActivationRecord rec = forward_with_activations(params, g, dataset);
    losses[i] = cross_entropy(rec.logits, g.graph_label);
  });
  return losses;
}

double neuron_importance(const HeadParams& head, int k, const Eigen::MatrixXd& pooled) {
  const int r = static_cast<int>(head.w.rows());
  double sum = 0.0;
  for (Eigen::Index g = 0; g < pooled.cols(); ++g) {
    double mean = 0.0;
    for (int j = 0; j < r; ++j) mean += head.w(j, k) * pooled(k, g);
    mean /= r;
    double var = 0.0;
    for (int j = 0; j < r; ++j) {
      double c = head.w(j, k) * pooled(k, g) - mean;
      var += c * c;
    }
    sum += var / r;  // population variance over the r contributions
  }
  return sum / static_cast<double>(pooled.cols());
}

double neuron_correctness(int k, const Eigen::MatrixXd& pooled, std::span<const double> losses,
                          bool* degenerate) {
  if (degenerate) *degenerate = false;
  const auto n = static_cast<Eigen::Index>(losses.size());
  if (n < 2) throw ConfigError("neuron_correctness: needs at least 2 graphs");

  double mean_x = 0.0, mean_y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mean_x += pooled(k, i);
    mean_y += -losses[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double dx = pooled(k, i) - mean_x;
    double dy = -losses[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return std::abs(sxy / std::sqrt(sxx * syy));
}

std::vector<NeuronMetrics> compute_neuron_metrics(const ModelParams& params,
                                                  const GraphDataset& dataset,
                                                  const std::vector<int>& graph_ids,
                                                  const NeuronConceptMap& concept_map,
                                                  int threads) {
  Eigen::MatrixXd pooled = pooled_matrix(params, dataset, graph_ids, threads);
  std::vector<double> losses = per_graph_losses(params, dataset, graph_ids, threads);

  std::vector<NeuronMetrics> out;
  for (const auto& entry : concept_map.neurons) {
    NeuronMetrics m;
    m.neuron = entry.neuron;
    m.dead = entry.dead;
    m.interpretability = entry.dead || entry.entries.empty() ? 0.0 : entry.entries.front().score;
    if (entry.neuron < pooled.rows()) {
      m.importance = entry.dead ? 0.0 : neuron_importance(params.head, entry.neuron, pooled);
      m.correctness =
          neuron_correctness(entry.neuron, pooled, losses, &m.correctness_degenerate);
    }
    out.push_back(m);
  }
  return out;
}

double model_interpretability(std::span<const NeuronMetrics> metrics) {
  double sum = 0.0;
  int alive = 0;
  for (const auto& m : metrics) {
    if (m.dead) continue;
    sum += m.interpretability;
    ++alive;
  }
  if (alive == 0) throw ConfigError("model_interpretability: all neurons are dead");
  return sum / alive;
}

std::vector<SweepPoint> sweep_epochs(const ModelConfig& config, const GraphDataset& dataset,
                                     const std::vector<int>& epoch_list,
                                     const std::vector<BaseConcept>& atoms,
                                     const SearchOptions& search) {
  if (epoch_list.empty()) throw ConfigError("sweep_epochs: empty epoch list");
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < epoch_list.size(); ++i) {
    ModelConfig c = config;
    c.epochs = epoch_list[i];
    c.seed = mix_seed(config.seed, "sweep-epochs-" + std::to_string(i));
    TrainResult trained = train(c, dataset);

    DissectionContext ctx = capture_activations(trained.params, dataset, dataset.train_indices,
                                                c.num_layers, search.threads);
    NeuronConceptMap map = beam_search(ctx, atoms, search);
    SweepPoint p;
    p.sweep_value = epoch_list[i];
    p.test_accuracy = evaluate(trained.params, dataset, dataset.test_indices).accuracy;
    p.metrics =
        compute_neuron_metrics(trained.params, dataset, dataset.train_indices, map, search.threads);
    p.interpretability = model_interpretability(p.metrics);
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<SweepPoint> sweep_layers(const ModelParams& params, const GraphDataset& dataset,
                                     const std::vector<int>& graph_ids,
                                     const std::vector<BaseConcept>& atoms,
                                     const SearchOptions& search) {
  std::vector<SweepPoint> points;
  for (int layer = 1; layer <= params.config.num_layers; ++layer) {
    DissectionContext ctx =
        capture_activations(params, dataset, graph_ids, layer, search.threads);
    NeuronConceptMap map = beam_search(ctx, atoms, search);
    SweepPoint p;
    p.sweep_value = layer;
    p.test_accuracy = evaluate(params, dataset, dataset.test_indices).accuracy;
    p.metrics = compute_neuron_metrics(params, dataset, graph_ids, map, search.threads);
    p.interpretability = model_interpretability(p.metrics);
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace graphdissect
