#include "graphdissect/artifacts.hpp"

#include <fstream>

#include "graphdissect/errors.hpp"
#include "graphdissect/parallel.hpp"

namespace graphdissect {

std::string fmt_double(double v) { return nlohmann::json(v).dump(); }

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + file.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + file.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = data;
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw FormatError("checkpoint: tensor data does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++];
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  std::vector<double> data(v.data(), v.data() + v.size());
  return nlohmann::json(data);
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  Eigen::VectorXd v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) v(i) = data[i];
  return v;
}

}  // namespace

nlohmann::json checkpoint_to_json(const ModelParams& params) {
  nlohmann::json j;
  j["format"] = "graphdissect-checkpoint";
  j["version"] = 1;
  nlohmann::json cfg;
  cfg["num_layers"] = params.config.num_layers;
  cfg["hidden_dim"] = params.config.hidden_dim;
  cfg["layer_type"] = layer_type_name(params.config.layer_type);
  cfg["num_classes"] = params.config.num_classes;
  cfg["learning_rate"] = params.config.learning_rate;
  cfg["weight_decay"] = params.config.weight_decay;
  cfg["epochs"] = params.config.epochs;
  cfg["early_stop_patience"] =
      params.config.early_stop_patience ? nlohmann::json(*params.config.early_stop_patience)
                                        : nlohmann::json();
  cfg["batch_size"] = params.config.batch_size;
  cfg["seed"] = params.config.seed;
  j["config"] = cfg;
  j["input_dim"] = params.input_dim;

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : params.layers) {
    nlohmann::json lj;
    lj["type"] = layer_type_name(layer.type);
    lj["w1"] = matrix_to_json(layer.w1);
    lj["b1"] = vector_to_json(layer.b1);
    if (layer.type == LayerType::Gin) {
      lj["w2"] = matrix_to_json(layer.w2);
      lj["b2"] = vector_to_json(layer.b2);
    }
    layers.push_back(lj);
  }
  j["layers"] = layers;
  j["head"] = {{"w", matrix_to_json(params.head.w)}, {"b", vector_to_json(params.head.b)}};
  return j;
}

ModelParams checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "graphdissect-checkpoint")
    throw FormatError("not a graphdissect checkpoint");
  if (j.value("version", 0) != 1)
    throw FormatError("unsupported checkpoint version");

  ModelParams p;
  const auto& cfg = j.at("config");
  p.config.num_layers = cfg.at("num_layers").get<int>();
  p.config.hidden_dim = cfg.at("hidden_dim").get<int>();
  p.config.layer_type = layer_type_from_name(cfg.at("layer_type").get<std::string>());
  p.config.num_classes = cfg.at("num_classes").get<int>();
  p.config.learning_rate = cfg.at("learning_rate").get<double>();
  p.config.weight_decay = cfg.at("weight_decay").get<double>();
  p.config.epochs = cfg.at("epochs").get<int>();
  if (!cfg.at("early_stop_patience").is_null())
    p.config.early_stop_patience = cfg.at("early_stop_patience").get<int>();
  p.config.batch_size = cfg.at("batch_size").get<int>();
  p.config.seed = cfg.at("seed").get<std::uint64_t>();
  p.input_dim = j.at("input_dim").get<int>();

  for (const auto& lj : j.at("layers")) {
    LayerParams layer;
    layer.type = layer_type_from_name(lj.at("type").get<std::string>());
    layer.w1 = matrix_from_json(lj.at("w1"));
    layer.b1 = vector_from_json(lj.at("b1"));
    if (layer.type == LayerType::Gin) {
      layer.w2 = matrix_from_json(lj.at("w2"));
      layer.b2 = vector_from_json(lj.at("b2"));
    }
    p.layers.push_back(std::move(layer));
  }
  p.head.w = matrix_from_json(j.at("head").at("w"));
  p.head.b = vector_from_json(j.at("head").at("b"));

  if (static_cast<int>(p.layers.size()) != p.config.num_layers)
    throw FormatError("checkpoint: layer count does not match config");
  if (p.head.w.rows() != p.config.num_classes || p.head.w.cols() != p.config.hidden_dim)
    throw FormatError("checkpoint: head shape does not match config");
  return p;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& file) {
  write_text_file(file, checkpoint_to_json(params).dump(2) + "\n");
}

ModelParams load_checkpoint(const std::filesystem::path& file) {
  return checkpoint_from_json(nlohmann::json::parse(read_text_file(file)));
}

nlohmann::json concept_map_to_json(const NeuronConceptMap& map) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& neuron : map.neurons) {
    nlohmann::json nj;
    nj["neuron"] = neuron.neuron;
    nj["dead"] = neuron.dead;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : neuron.entries)
      entries.push_back(
          {{"formula", render(e.formula)}, {"score", e.score}, {"threshold", e.threshold}});
    nj["entries"] = entries;
    j.push_back(nj);
  }
  return j;
}

NeuronConceptMap concept_map_from_json(const nlohmann::json& j) {
  NeuronConceptMap map;
  for (const auto& nj : j) {
    NeuronEntry entry;
    entry.neuron = nj.at("neuron").get<int>();
    entry.dead = nj.at("dead").get<bool>();
    for (const auto& ej : nj.at("entries")) {
      ScoreEntry e;
      e.formula = parse_formula(ej.at("formula").get<std::string>());
      e.score = ej.at("score").get<double>();
      e.threshold = ej.at("threshold").get<double>();
      entry.entries.push_back(std::move(e));
    }
    map.neurons.push_back(std::move(entry));
  }
  return map;
}

void save_concept_map(const NeuronConceptMap& map, const std::filesystem::path& file) {
  write_text_file(file, concept_map_to_json(map).dump(2) + "\n");
}

NeuronConceptMap load_concept_map(const std::filesystem::path& file) {
  return concept_map_from_json(nlohmann::json::parse(read_text_file(file)));
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::string csv = "epoch,train_loss,train_acc,test_acc\n";
  for (const auto& row : log) {
    csv += std::to_string(row.epoch) + "," + fmt_double(row.train_loss) + "," +
           fmt_double(row.train_acc) + "," + fmt_double(row.test_acc) + "\n";
  }
  return csv;
}

std::string neuron_metrics_csv(const std::vector<NeuronMetrics>& metrics) {
  std::string csv = "neuron,importance,correctness,interpretability,dead\n";
  for (const auto& m : metrics) {
    csv += std::to_string(m.neuron) + "," + fmt_double(m.importance) + "," +
           fmt_double(m.correctness) + "," + fmt_double(m.interpretability) + "," +
           (m.dead ? "1" : "0") + "\n";
  }
  return csv;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& value_column) {
  std::string csv = value_column + ",test_accuracy,model_interpretability\n";
  for (const auto& p : points) {
    csv += std::to_string(p.sweep_value) + "," + fmt_double(p.test_accuracy) + "," +
           fmt_double(p.interpretability) + "\n";
  }
  return csv;
}

nlohmann::json explanation_to_json(const GlobalExplanation& explanation) {
  nlohmann::json j;
  j["class"] = explanation.cls;
  if (!explanation.warning.empty()) j["warning"] = explanation.warning;
  nlohmann::json neurons = nlohmann::json::array();
  for (const auto& ne : explanation.neurons) {
    nlohmann::json nj;
    nj["neuron"] = ne.neuron;
    nj["formula"] = render(ne.formula);
    nj["score"] = ne.score;
    nj["threshold"] = ne.threshold;
    nj["exemplar_graph"] = ne.exemplar_graph;
    nj["abs_contribution"] = ne.abs_contribution;
    nj["entropy"] = {{"sigma", ne.entropy.sigma},
                     {"selected", ne.entropy.selected},
                     {"weighted", ne.entropy.weighted}};
    if (!ne.collapsed_duplicates.empty()) nj["collapsed_duplicates"] = ne.collapsed_duplicates;
    neurons.push_back(nj);
  }
  j["neurons"] = neurons;
  return j;
}

ActivationExport export_activations(const ModelParams& params, const GraphDataset& dataset,
                                    const std::vector<int>& graph_ids, int threads) {
  ActivationExport out;
  out.layers = params.config.num_layers;
  out.neurons = params.config.hidden_dim;
  out.graph_ids = graph_ids;
  out.index.offsets.push_back(0);
  int total = 0;
  for (int id : graph_ids) {
    total += dataset.graphs.at(id).node_count;
    out.index.offsets.push_back(total);
  }
  out.index.index_vector.resize(total);
  for (int pos = 0; pos < out.index.graph_count(); ++pos) {
    auto [lo, hi] = out.index.node_range(pos);
    for (int i = lo; i < hi; ++i) out.index.index_vector[i] = pos;
  }

  out.data.assign(static_cast<std::size_t>(out.layers) * out.neurons * total, 0.0);
  parallel_for(static_cast<int>(graph_ids.size()), threads, [&](int pos) {
    ActivationRecord rec =
        forward_with_activations(params, dataset.graphs[graph_ids[pos]], dataset);
    auto [lo, hi] = out.index.node_range(pos);
    for (int l = 1; l <= out.layers; ++l) {
      const Eigen::MatrixXd& h = rec.layer_acts[l];
      for (int k = 0; k < out.neurons; ++k)
        for (int i = lo; i < hi; ++i)
          out.data[(static_cast<std::size_t>(l - 1) * out.neurons + k) * total + i] =
              h(k, i - lo);
    }
  });
  return out;
}

nlohmann::json activations_to_json(const ActivationExport& acts) {
  nlohmann::json j;
  j["format"] = "graphdissect-activations";
  j["version"] = 1;
  j["layers"] = acts.layers;
  j["neurons"] = acts.neurons;
  j["nodes"] = acts.index.total_nodes();
  j["graph_ids"] = acts.graph_ids;
  j["index_vector"] = acts.index.index_vector;
  j["offsets"] = acts.index.offsets;
  j["data"] = acts.data;
  return j;
}

ActivationExport activations_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "graphdissect-activations")
    throw FormatError("not a graphdissect activation dump");
  ActivationExport out;
  out.layers = j.at("layers").get<int>();
  out.neurons = j.at("neurons").get<int>();
  out.graph_ids = j.at("graph_ids").get<std::vector<int>>();
  out.index.index_vector = j.at("index_vector").get<std::vector<int>>();
  out.index.offsets = j.at("offsets").get<std::vector<int>>();
  out.data = j.at("data").get<std::vector<double>>();
  int total = out.index.total_nodes();
  if (static_cast<int>(out.index.index_vector.size()) != total ||
      out.data.size() != static_cast<std::size_t>(out.layers) * out.neurons * total)
    throw FormatError("activation dump: inconsistent shapes");
  return out;
}

DissectionContext context_from_export(const ActivationExport& acts, const GraphDataset& dataset,
                                      int layer) {
  if (layer < 1 || layer > acts.layers)
    throw ConfigError("activation dump has no layer " + std::to_string(layer));
  DissectionContext ctx;
  ctx.dataset = &dataset;
  ctx.graph_ids = acts.graph_ids;
  ctx.index = acts.index;
  ctx.layer = layer;
  int total = acts.index.total_nodes();
  ctx.acts.resize(acts.neurons, total);
  for (int k = 0; k < acts.neurons; ++k)
    for (int i = 0; i < total; ++i)
      ctx.acts(k, i) = acts.data[(static_cast<std::size_t>(layer - 1) * acts.neurons + k) * total + i];
  return ctx;
}

}  // namespace graphdissect
