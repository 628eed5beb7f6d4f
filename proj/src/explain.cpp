#include "graphdissect/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "graphdissect/errors.hpp"

namespace graphdissect {

double ConceptActivationMap::edge_value(int i, int j) const {
  for (const auto& [u, v, val] : edges)
    if ((u == i && v == j) || (u == j && v == i)) return val;
  return 0.0;
}

std::vector<int> select_global_neurons(const HeadParams& head, int cls) {
  if (cls < 0 || cls >= head.w.rows()) throw ConfigError("class index out of range");
  std::vector<int> out;
  for (Eigen::Index k = 0; k < head.w.cols(); ++k)
    if (head.w(cls, k) > 0.0) out.push_back(static_cast<int>(k));
  return out;
}

int best_exemplar(int k, const DissectionContext& ctx) {
  if (k < 0 || k >= ctx.acts.rows()) throw ConfigError("best_exemplar: neuron out of range");
  double best = 0.0;
  int best_graph = -1;
  for (int pos = 0; pos < ctx.index.graph_count(); ++pos) {
    auto [lo, hi] = ctx.index.node_range(pos);
    double peak = 0.0;
    for (int i = lo; i < hi; ++i) peak = std::max(peak, ctx.acts(k, i));
    if (best_graph < 0 || peak > best) {
      best = peak;
      best_graph = ctx.graph_ids[pos];
    }
  }
  if (best_graph < 0 || !(best > 0.0))
    throw DeadNeuronError("best_exemplar: neuron " + std::to_string(k) +
                          " has no positive activation");
  return best_graph;
}

ConceptActivationMap concept_activation_map(const ModelParams& params,
                                            const GraphDataset& dataset, int graph_id, int cls,
                                            int neuron, const NeuronConceptMap& concept_map) {
  if (cls < 0 || cls >= params.head.w.rows()) throw ConfigError("class index out of range");
  const NeuronEntry& entry = concept_map.at(neuron);
  if (entry.dead || entry.entries.empty())
    throw ConfigError("concept_activation_map: neuron " + std::to_string(neuron) +
                      " has no concept entry; run dissection first");

  const Graph& graph = dataset.graphs.at(graph_id);
  ActivationRecord rec = forward_with_activations(params, graph, dataset);
  const Eigen::MatrixXd& last = rec.layer_acts.back();

  ConceptActivationMap cam;
  cam.neuron = neuron;
  cam.cls = cls;
  cam.graph_id = graph_id;
  cam.concept_formula = entry.entries.front().formula;
  cam.threshold = entry.entries.front().threshold;

  // d logit_y / d n_k is the head weight under the linear head.
  double grad = params.head.w(cls, neuron);
  cam.node_mask.resize(graph.node_count);
  cam.concept_nodes.resize(graph.node_count);
  for (int v = 0; v < graph.node_count; ++v) {
    cam.node_mask[v] = grad * last(neuron, v);
    cam.concept_nodes[v] = last(neuron, v) > cam.threshold;
  }
  for (int v = 0; v < graph.node_count; ++v)
    for (int u : graph.adjacency[v])
      if (v < u) cam.edges.emplace_back(v, u, cam.node_mask[v] + cam.node_mask[u]);
  return cam;
}

double absolute_contribution(const ModelParams& params, const GraphDataset& dataset, int graph_id,
                             int cls, int neuron) {
  ActivationRecord rec = forward_with_activations(params, dataset.graphs.at(graph_id), dataset);
  return params.head.w(cls, neuron) * rec.pooled(neuron);
}

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

double masked_objective(const ModelParams& params, const Eigen::VectorXd& pooled, int cls,
                        const Eigen::VectorXd& sig) {
  Eigen::VectorXd logits = params.head.w * sig.cwiseProduct(pooled) + params.head.b;
  return cross_entropy(logits, cls);
}

}  // namespace

double entropy_objective(const ModelParams& params, const Eigen::VectorXd& pooled, int cls,
                         const Eigen::VectorXd& eta) {
  return masked_objective(params, pooled, cls, sigmoid(eta));
}

EntropyMask entropy_mask_optimize(const ModelParams& params, const GraphDataset& dataset,
                                  int graph_id, int cls, EntropyMaskOptions options) {
  if (options.steps < 1) throw ConfigError("entropy_mask_optimize: steps must be >= 1");
  if (!(options.lr > 0.0)) throw ConfigError("entropy_mask_optimize: lr must be > 0");
  if (cls < 0 || cls >= params.head.w.rows()) throw ConfigError("class index out of range");

  Eigen::VectorXd pooled =
      forward_with_activations(params, dataset.graphs.at(graph_id), dataset).pooled;
  const int d = params.config.hidden_dim;

  EntropyMask mask;
  mask.eta = Eigen::VectorXd::Zero(d);
  double lr = options.lr;
  double current = entropy_objective(params, pooled, cls, mask.eta);
  if (!std::isfinite(current)) throw Error("entropy_mask_optimize: non-finite objective");
  mask.objective_history.push_back(current);
  mask.sigma_history.push_back(sigmoid(mask.eta));

  for (int step = 0; step < options.steps; ++step) {
    Eigen::VectorXd sig = sigmoid(mask.eta);
    Eigen::VectorXd logits = params.head.w * sig.cwiseProduct(pooled) + params.head.b;
    Eigen::VectorXd dlogits = softmax(logits);
    dlogits(cls) -= 1.0;
    Eigen::VectorXd dmasked = params.head.w.transpose() * dlogits;
    Eigen::VectorXd grad =
        dmasked.cwiseProduct(pooled).cwiseProduct(sig.cwiseProduct(Eigen::VectorXd::Ones(d) - sig));

    Eigen::VectorXd trial = mask.eta - lr * grad;
    double trial_obj = entropy_objective(params, pooled, cls, trial);
    if (!std::isfinite(trial_obj)) throw Error("entropy_mask_optimize: non-finite objective");
    if (trial_obj > current) {
      lr *= 0.5;  // revert the step; keep the descent contract
    } else {
      mask.eta = trial;
      current = trial_obj;
    }
    mask.objective_history.push_back(current);
    mask.sigma_history.push_back(sigmoid(mask.eta));
  }

  mask.sigma = sigmoid(mask.eta);
  mask.selected.resize(d);
  for (int k = 0; k < d; ++k)
    mask.selected[k] = static_cast<std::uint8_t>(std::round(mask.sigma(k)) >= 1.0);
  return mask;
}

EntropyImportance entropy_importance(const EntropyMask& mask, const ModelParams& params,
                                     const GraphDataset& dataset, int graph_id, int cls,
                                     int neuron) {
  EntropyImportance imp;
  imp.sigma = mask.sigma(neuron);
  imp.selected = mask.selected[neuron] != 0;
  imp.weighted =
      imp.selected ? absolute_contribution(params, dataset, graph_id, cls, neuron) : 0.0;
  return imp;
}

GlobalExplanation build_global_explanation(const ModelParams& params, const GraphDataset& dataset,
                                           const DissectionContext& final_layer_acts,
                                           const NeuronConceptMap& concept_map, int cls,
                                           EntropyMaskOptions entropy_options) {
  GlobalExplanation out;
  out.cls = cls;
  std::vector<int> s_glob = select_global_neurons(params.head, cls);
  if (s_glob.empty()) {
    out.warning = "S_glob is empty: no neuron has a positive head weight for this class";
    return out;
  }

  struct Ranked {
    int neuron;
    double score;
    std::string rendered;
  };
  std::vector<Ranked> ranked;
  for (int k : s_glob) {
    const NeuronEntry& entry = concept_map.at(k);
    if (entry.dead || entry.entries.empty()) continue;  // dead neurons are excluded
    ranked.push_back({k, entry.entries.front().score, render(entry.entries.front().formula)});
  }
  if (ranked.empty()) {
    out.warning = "S_glob contains only dead neurons";
    return out;
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.neuron < b.neuron;
  });

  // Entropy masks are optimized once per exemplar graph.
  std::vector<NeuronExplanation> built;
  for (const auto& r : ranked) {
    NeuronExplanation ne;
    ne.neuron = r.neuron;
    const auto& top = concept_map.at(r.neuron).entries.front();
    ne.formula = top.formula;
    ne.score = top.score;
    ne.threshold = top.threshold;
    ne.exemplar_graph = best_exemplar(r.neuron, final_layer_acts);
    ne.cam = concept_activation_map(params, dataset, ne.exemplar_graph, cls, r.neuron,
                                    concept_map);
    ne.abs_contribution =
        absolute_contribution(params, dataset, ne.exemplar_graph, cls, r.neuron);
    EntropyMask mask =
        entropy_mask_optimize(params, dataset, ne.exemplar_graph, cls, entropy_options);
    ne.entropy = entropy_importance(mask, params, dataset, ne.exemplar_graph, cls, r.neuron);
    built.push_back(std::move(ne));
  }

  // Collapse visually duplicate concepts: same thresholded node set on every
  // exemplar in the explanation.
  std::vector<int> exemplars;
  for (const auto& ne : built) exemplars.push_back(ne.exemplar_graph);
  std::sort(exemplars.begin(), exemplars.end());
  exemplars.erase(std::unique(exemplars.begin(), exemplars.end()), exemplars.end());

  auto visual_key = [&](int neuron, double threshold) {
    std::string key;
    for (int gid : exemplars) {
      ActivationRecord rec = forward_with_activations(params, dataset.graphs[gid], dataset);
      const Eigen::MatrixXd& last = rec.layer_acts.back();
      for (int v = 0; v < dataset.graphs[gid].node_count; ++v)
        key.push_back(last(neuron, v) > threshold ? '1' : '0');
      key.push_back('|');
    }
    return key;
  };

  std::vector<std::pair<std::string, std::size_t>> seen;  // key -> index into out.neurons
  for (auto& ne : built) {
    std::string key = visual_key(ne.neuron, ne.threshold);
    auto it = std::find_if(seen.begin(), seen.end(),
                           [&](const auto& p) { return p.first == key; });
    if (it != seen.end()) {
      out.neurons[it->second].collapsed_duplicates.push_back(ne.neuron);
    } else {
      seen.push_back({std::move(key), out.neurons.size()});
      out.neurons.push_back(std::move(ne));
    }
  }
  return out;
}

namespace {

std::string heat_color(double t) {
  // white (#ffffff) at 0 to deep orange-red (#d73027) at 1
  auto channel = [&](int from, int to) {
    return static_cast<int>(std::lround(from + t * (to - from)));
  };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(255, 215), channel(255, 48),
                channel(255, 39));
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string to_dot(const ConceptActivationMap& cam, const GraphDataset& dataset) {
  const Graph& graph = dataset.graphs.at(cam.graph_id);
  double lo = 0.0, hi = 0.0;
  if (!cam.node_mask.empty()) {
    lo = *std::min_element(cam.node_mask.begin(), cam.node_mask.end());
    hi = *std::max_element(cam.node_mask.begin(), cam.node_mask.end());
  }
  auto norm_node = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };

  double elo = 0.0, ehi = 0.0;
  if (!cam.edges.empty()) {
    elo = std::get<2>(*std::min_element(
        cam.edges.begin(), cam.edges.end(),
        [](const auto& a, const auto& b) { return std::get<2>(a) < std::get<2>(b); }));
    ehi = std::get<2>(*std::max_element(
        cam.edges.begin(), cam.edges.end(),
        [](const auto& a, const auto& b) { return std::get<2>(a) < std::get<2>(b); }));
  }
  auto norm_edge = [&](double v) { return ehi > elo ? (v - elo) / (ehi - elo) : 0.0; };

  std::string dot;
  dot += "graph cam_neuron" + std::to_string(cam.neuron) + "_class" + std::to_string(cam.cls) +
         " {\n";
  dot += "  graph [label=\"neuron " + std::to_string(cam.neuron) + " | class " +
         std::to_string(cam.cls) + " | graph " + std::to_string(cam.graph_id) + " | " +
         render(cam.concept_formula) + " | tau=" + fixed3(cam.threshold) + "\"];\n";
  dot += "  node [style=filled];\n";
  for (int v = 0; v < graph.node_count; ++v) {
    std::string label =
        graph.labeled() ? dataset.label_alphabet[graph.node_labels[v]] : std::to_string(v);
    dot += "  n" + std::to_string(v) + " [label=\"" + label + "\", fillcolor=\"" +
           heat_color(norm_node(cam.node_mask[v])) + "\", shape=" +
           (cam.concept_nodes[v] ? "doublecircle" : "circle") + "];\n";
  }
  for (const auto& [u, v, value] : cam.edges) {
    dot += "  n" + std::to_string(u) + " -- n" + std::to_string(v) + " [penwidth=" +
           fixed3(0.8 + 3.2 * norm_edge(value)) + "];\n";
  }
  dot += "}\n";
  return dot;
}

}  // namespace graphdissect
