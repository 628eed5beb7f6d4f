#include "graphdissect/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphdissect/errors.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

namespace {

struct LayerTrace {
  Eigen::MatrixXd agg;  // aggregated input
  Eigen::MatrixXd z1;
  Eigen::MatrixXd a1;  // GIN only
  Eigen::MatrixXd z2;  // GIN only
  Eigen::MatrixXd h;   // layer output
};

struct ForwardTrace {
  Eigen::MatrixXd x;
  std::vector<LayerTrace> layers;
  Eigen::MatrixXd pooled;  // hidden_dim x batch
  Eigen::MatrixXd logits;  // classes x batch
};

ForwardTrace forward_trace(const ModelParams& params, const Graph& batch, const BatchIndex& bi,
                           const GraphDataset& dataset) {
  ForwardTrace t;
  t.x = build_features(batch, dataset);
  const Eigen::MatrixXd* h = &t.x;
  for (const auto& layer : params.layers) {
    LayerTrace lt;
    if (layer.type == LayerType::Gin) {
      lt.agg = aggregate_sum(*h, batch);
      lt.z1 = (layer.w1 * lt.agg).colwise() + layer.b1;
      lt.a1 = lt.z1.cwiseMax(0.0);
      lt.z2 = (layer.w2 * lt.a1).colwise() + layer.b2;
      lt.h = lt.z2.cwiseMax(0.0);
    } else {
      lt.agg = aggregate_gcn(*h, batch);
      lt.z1 = (layer.w1 * lt.agg).colwise() + layer.b1;
      lt.h = lt.z1.cwiseMax(0.0);
    }
    t.layers.push_back(std::move(lt));
    h = &t.layers.back().h;
  }
  int b = bi.graph_count();
  t.pooled = Eigen::MatrixXd::Zero(params.config.hidden_dim, b);
  const Eigen::MatrixXd& last = t.layers.back().h;
  for (int j = 0; j < last.cols(); ++j) t.pooled.col(bi.index_vector[j]) += last.col(j);
  t.logits = (params.head.w * t.pooled).colwise() + params.head.b;
  return t;
}

// dL/dZ for Z the pre-ReLU values whose ReLU output received dH.
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& dh, const Eigen::MatrixXd& z) {
  return (z.array() > 0.0).cast<double>() * dh.array();
}

void accumulate_backward(const ModelParams& params, const Graph& batch, const BatchIndex& bi,
                         const ForwardTrace& t, const Eigen::MatrixXd& dlogits,
                         ParamGrads& grads) {
  grads.head.w += dlogits * t.pooled.transpose();
  grads.head.b += dlogits.rowwise().sum();
  Eigen::MatrixXd dpooled = params.head.w.transpose() * dlogits;

  Eigen::MatrixXd dh(t.layers.back().h.rows(), t.layers.back().h.cols());
  for (int j = 0; j < dh.cols(); ++j) dh.col(j) = dpooled.col(bi.index_vector[j]);

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const LayerParams& layer = params.layers[l];
    const LayerTrace& lt = t.layers[l];
    Eigen::MatrixXd dagg;
    if (layer.type == LayerType::Gin) {
      Eigen::MatrixXd dz2 = relu_backward(dh, lt.z2);
      grads.layers[l].w2 += dz2 * lt.a1.transpose();
      grads.layers[l].b2 += dz2.rowwise().sum();
      Eigen::MatrixXd dz1 = relu_backward(layer.w2.transpose() * dz2, lt.z1);
      grads.layers[l].w1 += dz1 * lt.agg.transpose();
      grads.layers[l].b1 += dz1.rowwise().sum();
      dagg = layer.w1.transpose() * dz1;
      dh = aggregate_sum(dagg, batch);
    } else {
      Eigen::MatrixXd dz1 = relu_backward(dh, lt.z1);
      grads.layers[l].w1 += dz1 * lt.agg.transpose();
      grads.layers[l].b1 += dz1.rowwise().sum();
      dagg = layer.w1.transpose() * dz1;
      dh = aggregate_gcn(dagg, batch);
    }
  }
}

struct AdamState {
  ParamGrads m;
  ParamGrads v;
  int step = 0;
};

void adam_update_tensor(Eigen::MatrixXd& theta, const Eigen::MatrixXd& grad, Eigen::MatrixXd& m,
                        Eigen::MatrixXd& v, double lr, double bc1, double bc2) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

void adam_update_tensor(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, Eigen::VectorXd& m,
                        Eigen::VectorXd& v, double lr, double bc1, double bc2) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state) {
  constexpr double beta1 = 0.9, beta2 = 0.999;
  ++state.step;
  double lr = params.config.learning_rate;
  double wd = params.config.weight_decay;
  double bc1 = 1.0 - std::pow(beta1, state.step);
  double bc2 = 1.0 - std::pow(beta2, state.step);

  auto update_mat = [&](Eigen::MatrixXd& theta, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                        Eigen::MatrixXd& v) {
    Eigen::MatrixXd total = g + wd * theta;
    adam_update_tensor(theta, total, m, v, lr, bc1, bc2);
  };
  auto update_vec = [&](Eigen::VectorXd& theta, const Eigen::VectorXd& g, Eigen::VectorXd& m,
                        Eigen::VectorXd& v) {
    Eigen::VectorXd total = g + wd * theta;
    adam_update_tensor(theta, total, m, v, lr, bc1, bc2);
  };

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update_mat(params.layers[l].w1, grads.layers[l].w1, state.m.layers[l].w1, state.v.layers[l].w1);
    update_vec(params.layers[l].b1, grads.layers[l].b1, state.m.layers[l].b1, state.v.layers[l].b1);
    if (params.layers[l].type == LayerType::Gin) {
      update_mat(params.layers[l].w2, grads.layers[l].w2, state.m.layers[l].w2,
                 state.v.layers[l].w2);
      update_vec(params.layers[l].b2, grads.layers[l].b2, state.m.layers[l].b2,
                 state.v.layers[l].b2);
    }
  }
  update_mat(params.head.w, grads.head.w, state.m.head.w, state.v.head.w);
  update_vec(params.head.b, grads.head.b, state.m.head.b, state.v.head.b);
}

}  // namespace

ParamGrads zero_grads(const ModelParams& params) {
  ParamGrads g;
  for (const auto& layer : params.layers) {
    LayerParams z;
    z.type = layer.type;
    z.w1 = Eigen::MatrixXd::Zero(layer.w1.rows(), layer.w1.cols());
    z.b1 = Eigen::VectorXd::Zero(layer.b1.size());
    if (layer.type == LayerType::Gin) {
      z.w2 = Eigen::MatrixXd::Zero(layer.w2.rows(), layer.w2.cols());
      z.b2 = Eigen::VectorXd::Zero(layer.b2.size());
    }
    g.layers.push_back(std::move(z));
  }
  g.head.w = Eigen::MatrixXd::Zero(params.head.w.rows(), params.head.w.cols());
  g.head.b = Eigen::VectorXd::Zero(params.head.b.size());
  return g;
}

double loss_and_gradients(const ModelParams& params, const GraphDataset& dataset,
                          const std::vector<int>& graph_ids, ParamGrads& grads) {
  auto [batch, bi] = make_batch(dataset, graph_ids);
  ForwardTrace t = forward_trace(params, batch, bi, dataset);

  int b = bi.graph_count();
  double loss = 0.0;
  Eigen::MatrixXd dlogits(t.logits.rows(), b);
  for (int g = 0; g < b; ++g) {
    int label = dataset.graphs[graph_ids[g]].graph_label;
    loss += cross_entropy(t.logits.col(g), label);
    Eigen::VectorXd p = softmax(t.logits.col(g));
    p(label) -= 1.0;
    dlogits.col(g) = p / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);
  accumulate_backward(params, batch, bi, t, dlogits, grads);
  return loss;
}

EvalStats evaluate(const ModelParams& params, const GraphDataset& dataset,
                   const std::vector<int>& graph_ids) {
  EvalStats s;
  if (graph_ids.empty()) return s;
  auto [batch, bi] = make_batch(dataset, graph_ids);
  ForwardTrace t = forward_trace(params, batch, bi, dataset);
  int correct = 0;
  for (int g = 0; g < bi.graph_count(); ++g) {
    int label = dataset.graphs[graph_ids[g]].graph_label;
    s.loss += cross_entropy(t.logits.col(g), label);
    if (predicted_class(t.logits.col(g)) == label) ++correct;
  }
  s.loss /= static_cast<double>(graph_ids.size());
  s.accuracy = static_cast<double>(correct) / static_cast<double>(graph_ids.size());
  return s;
}

TrainResult train(const ModelConfig& config, const GraphDataset& dataset) {
  if (dataset.size() == 0) throw ConfigError("train: empty dataset");
  if (dataset.train_indices.empty()) throw ConfigError("train: no train split defined");

  TrainResult result;
  result.params = init_params(config, feature_dim(dataset));
  if (config.epochs == 0) return result;

  AdamState state;
  state.m = zero_grads(result.params);
  state.v = zero_grads(result.params);

  Rng shuffle_rng = substream(config.seed, "shuffle");
  std::vector<int> order = dataset.train_indices;

  double best_test_acc = -1.0;
  int best_epoch = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<int> ids(order.begin() + start, order.begin() + end);
      ParamGrads grads = zero_grads(result.params);
      double loss = loss_and_gradients(result.params, dataset, ids, grads);
      if (!std::isfinite(loss))
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
      adam_step(result.params, grads, state);
      epoch_loss += loss;
      ++batches;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss / std::max(1, batches);
    EvalStats train_stats = evaluate(result.params, dataset, dataset.train_indices);
    log.train_acc = train_stats.accuracy;
    EvalStats test_stats = evaluate(result.params, dataset, dataset.test_indices);
    log.test_loss = test_stats.loss;
    log.test_acc = test_stats.accuracy;
    result.log.push_back(log);

    if (config.early_stop_patience) {
      if (log.test_acc > best_test_acc) {
        best_test_acc = log.test_acc;
        best_epoch = epoch;
      } else if (epoch - best_epoch >= *config.early_stop_patience) {
        break;
      }
    }
  }
  return result;
}

namespace {

std::vector<double*> parameter_entries(ModelParams& params) {
  std::vector<double*> out;
  auto add_mat = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  auto add_vec = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
  };
  for (auto& layer : params.layers) {
    add_mat(layer.w1);
    add_vec(layer.b1);
    if (layer.type == LayerType::Gin) {
      add_mat(layer.w2);
      add_vec(layer.b2);
    }
  }
  add_mat(params.head.w);
  add_vec(params.head.b);
  return out;
}

std::vector<const double*> gradient_entries(const ModelParams& params, ParamGrads& grads) {
  std::vector<const double*> out;
  auto add_mat = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  auto add_vec = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    add_mat(grads.layers[l].w1);
    add_vec(grads.layers[l].b1);
    if (params.layers[l].type == LayerType::Gin) {
      add_mat(grads.layers[l].w2);
      add_vec(grads.layers[l].b2);
    }
  }
  add_mat(grads.head.w);
  add_vec(grads.head.b);
  return out;
}

}  // namespace

double gradient_check(const ModelParams& params, const GraphDataset& dataset, int graph_id,
                      double epsilon, int sample_count, std::uint64_t seed) {
  if (!(epsilon > 0.0) || epsilon > 1e-2)
    throw ConfigError("gradient_check: epsilon must be in (0, 1e-2]");

  ModelParams work = params;
  ParamGrads grads = zero_grads(work);
  std::vector<int> ids{graph_id};
  loss_and_gradients(work, dataset, ids, grads);

  std::vector<double*> theta = parameter_entries(work);
  std::vector<const double*> analytic = gradient_entries(work, grads);

  std::vector<std::size_t> picks(theta.size());
  std::iota(picks.begin(), picks.end(), 0);
  if (static_cast<int>(picks.size()) > sample_count) {
    Rng rng = substream(seed, "gradient-check");
    rng.shuffle(picks);
    picks.resize(sample_count);
  }

  double max_rel = 0.0;
  ParamGrads scratch = zero_grads(work);
  for (std::size_t idx : picks) {
    double saved = *theta[idx];
    *theta[idx] = saved + epsilon;
    double up = loss_and_gradients(work, dataset, ids, scratch);
    *theta[idx] = saved - epsilon;
    double down = loss_and_gradients(work, dataset, ids, scratch);
    *theta[idx] = saved;
    double numeric = (up - down) / (2.0 * epsilon);
    double ga = *analytic[idx];
    double denom = std::max({std::abs(ga), std::abs(numeric), 1e-6});
    double rel = std::abs(ga - numeric) / denom;
    if (std::abs(ga) < 1e-12 && std::abs(numeric) < 1e-12) rel = 0.0;
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace graphdissect
