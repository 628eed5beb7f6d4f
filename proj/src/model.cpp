#include "graphdissect/model.hpp"

#include <cmath>

#include "graphdissect/errors.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

std::string layer_type_name(LayerType t) { return t == LayerType::Gin ? "GIN" : "GCN"; }

LayerType layer_type_from_name(const std::string& s) {
  if (s == "GIN" || s == "gin") return LayerType::Gin;
  if (s == "GCN" || s == "gcn") return LayerType::Gcn;
  throw ConfigError("unknown layer type: " + s);
}

namespace {

Eigen::MatrixXd glorot(int rows, int cols, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

}  // namespace

ModelParams init_params(const ModelConfig& config, int input_dim) {
  if (config.num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (config.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");

  Rng rng = substream(config.seed, "init");
  ModelParams p;
  p.config = config;
  p.input_dim = input_dim;
  int d = config.hidden_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    int in = l == 0 ? input_dim : d;
    LayerParams layer;
    layer.type = config.layer_type;
    layer.w1 = glorot(d, in, rng);
    layer.b1 = Eigen::VectorXd::Zero(d);
    if (config.layer_type == LayerType::Gin) {
      layer.w2 = glorot(d, d, rng);
      layer.b2 = Eigen::VectorXd::Zero(d);
    }
    p.layers.push_back(std::move(layer));
  }
  p.head.w = glorot(config.num_classes, d, rng);
  p.head.b = Eigen::VectorXd::Zero(config.num_classes);
  return p;
}

int feature_dim(const GraphDataset& dataset) {
  return dataset.labeled() ? static_cast<int>(dataset.label_alphabet.size()) : 1;
}

Eigen::MatrixXd build_features(const Graph& graph, const GraphDataset& dataset) {
  if (graph.labeled() && !dataset.labeled())
    throw ConfigError("build_features: node labels present but label alphabet is empty");
  if (!dataset.labeled()) return Eigen::MatrixXd::Ones(1, graph.node_count);

  int d0 = static_cast<int>(dataset.label_alphabet.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d0, graph.node_count);
  for (int v = 0; v < graph.node_count; ++v) {
    int label = graph.node_labels[v];
    if (label < 0 || label >= d0)
      throw ConfigError("build_features: node label out of alphabet range");
    x(label, v) = 1.0;
  }
  return x;
}

Eigen::MatrixXd aggregate_sum(const Eigen::MatrixXd& h, const Graph& graph) {
  Eigen::MatrixXd out = h;
  for (int v = 0; v < graph.node_count; ++v)
    for (int u : graph.adjacency[v]) out.col(v) += h.col(u);
  return out;
}

Eigen::MatrixXd aggregate_gcn(const Eigen::MatrixXd& h, const Graph& graph) {
  Eigen::MatrixXd out(h.rows(), h.cols());
  std::vector<double> inv_sqrt(graph.node_count);
  for (int v = 0; v < graph.node_count; ++v)
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(graph.degree(v) + 1));
  for (int v = 0; v < graph.node_count; ++v) {
    out.col(v) = h.col(v) * (inv_sqrt[v] * inv_sqrt[v]);
    for (int u : graph.adjacency[v]) out.col(v) += h.col(u) * (inv_sqrt[u] * inv_sqrt[v]);
  }
  return out;
}

Eigen::MatrixXd gin_layer_forward(const Eigen::MatrixXd& h, const Graph& graph,
                                  const LayerParams& params) {
  if (h.cols() != graph.node_count)
    throw ConfigError("gin_layer_forward: feature matrix has wrong node count");
  if (params.w1.cols() != h.rows()) throw ConfigError("gin_layer_forward: shape mismatch");
  Eigen::MatrixXd agg = aggregate_sum(h, graph);
  Eigen::MatrixXd a1 = relu((params.w1 * agg).colwise() + params.b1);
  return relu((params.w2 * a1).colwise() + params.b2);
}

Eigen::MatrixXd gcn_layer_forward(const Eigen::MatrixXd& h, const Graph& graph,
                                  const LayerParams& params) {
  if (h.cols() != graph.node_count)
    throw ConfigError("gcn_layer_forward: feature matrix has wrong node count");
  if (params.w1.cols() != h.rows()) throw ConfigError("gcn_layer_forward: shape mismatch");
  Eigen::MatrixXd agg = aggregate_gcn(h, graph);
  return relu((params.w1 * agg).colwise() + params.b1);
}

ActivationRecord forward_with_activations(const ModelParams& params, const Graph& graph,
                                          const GraphDataset& dataset) {
  ActivationRecord rec;
  rec.layer_acts.push_back(build_features(graph, dataset));
  for (const auto& layer : params.layers) {
    const Eigen::MatrixXd& h = rec.layer_acts.back();
    rec.layer_acts.push_back(layer.type == LayerType::Gin ? gin_layer_forward(h, graph, layer)
                                                          : gcn_layer_forward(h, graph, layer));
  }
  // explicit column-order accumulation: pooled[k] is exactly sum_j H[k,j]
  const Eigen::MatrixXd& last = rec.layer_acts.back();
  rec.pooled = Eigen::VectorXd::Zero(last.rows());
  for (Eigen::Index v = 0; v < last.cols(); ++v) rec.pooled += last.col(v);
  rec.logits = params.head.w * rec.pooled + params.head.b;
  return rec;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

double cross_entropy(const Eigen::VectorXd& logits, int label) {
  double m = logits.maxCoeff();
  double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits(label);
}

int predicted_class(const Eigen::VectorXd& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i)
    if (logits(i) > logits(best)) best = i;
  return best;
}

}  // namespace graphdissect
