#include "graphdissect/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>

#include "graphdissect/artifacts.hpp"
#include "graphdissect/errors.hpp"
#include "graphdissect/explain.hpp"
#include "graphdissect/metrics.hpp"
#include "graphdissect/rng.hpp"
#include "graphdissect/synthetic.hpp"
#include "graphdissect/tu_io.hpp"

namespace graphdissect::cli {

namespace {

using KeyValues = std::map<std::string, std::string>;

const std::map<std::string, KeyValues>& dataset_defaults() {
  static const std::map<std::string, KeyValues> defaults = {
      {"MUTAG",
       {{"num_layers", "3"}, {"hidden_dim", "64"}, {"layer_type", "GIN"},
        {"learning_rate", "0.001"}, {"weight_decay", "0.001"}, {"epochs", "850"},
        {"early_stop_patience", "none"}, {"batch_size", "32"}}},
      {"PROTEINS",
       {{"num_layers", "2"}, {"hidden_dim", "64"}, {"layer_type", "GIN"},
        {"learning_rate", "0.001"}, {"weight_decay", "0.001"}, {"epochs", "700"},
        {"early_stop_patience", "60"}, {"batch_size", "32"}}},
      {"IMDB-B",
       {{"num_layers", "3"}, {"hidden_dim", "64"}, {"layer_type", "GIN"},
        {"learning_rate", "0.004"}, {"weight_decay", "0.001"}, {"epochs", "1000"},
        {"early_stop_patience", "400"}, {"batch_size", "32"}}},
      {"REDDIT-B",
       {{"num_layers", "3"}, {"hidden_dim", "64"}, {"layer_type", "GCN"},
        {"learning_rate", "0.001"}, {"weight_decay", "0.001"}, {"epochs", "20000"},
        {"early_stop_patience", "1000"}, {"batch_size", "32"}}},
      {"synthetic-degree",
       {{"num_layers", "2"}, {"hidden_dim", "16"}, {"layer_type", "GIN"},
        {"learning_rate", "0.003"}, {"weight_decay", "0.0001"}, {"epochs", "300"},
        {"early_stop_patience", "none"}, {"batch_size", "32"}}},
  };
  return defaults;
}

KeyValues parse_config_file(const std::filesystem::path& file) {
  KeyValues kv;
  std::string text = read_text_file(file);
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.pop_back();
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct Resolved {
  KeyValues values;

  const std::string& str(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing config value: " + key);
    return it->second;
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return values.count(key) != 0; }
  int integer(const std::string& key) const {
    try {
      return std::stoi(str(key));
    } catch (const std::exception&) {
      throw ConfigError("config value '" + key + "' is not an integer: " + str(key));
    }
  }
  double real(const std::string& key) const {
    try {
      return std::stod(str(key));
    } catch (const std::exception&) {
      throw ConfigError("config value '" + key + "' is not a number: " + str(key));
    }
  }
  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(std::stoull(str_or("seed", "0")));
  }
};

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    std::string piece = text.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      out.push_back(std::stoi(piece));
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad integer '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    std::string piece = text.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      out.push_back(std::stod(piece));
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad number '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

Resolved resolve(const KeyValues& flags) {
  Resolved r;
  auto it = flags.find("config");
  KeyValues file_values;
  if (it != flags.end()) file_values = parse_config_file(it->second);

  std::string dataset;
  if (flags.count("dataset"))
    dataset = flags.at("dataset");
  else if (file_values.count("dataset"))
    dataset = file_values.at("dataset");
  if (dataset.empty()) throw ConfigError("no dataset given (--dataset or config file)");

  auto defaults_it = dataset_defaults().find(dataset);
  if (defaults_it != dataset_defaults().end()) r.values = defaults_it->second;
  r.values["dataset"] = dataset;
  r.values["depth"] = "3";
  r.values["width"] = "10";
  r.values["quantiles"] = "0.5,0.6,0.7,0.8,0.9,0.95,0.99";
  r.values["train_fraction"] = "0.8";
  r.values["seed"] = "0";
  r.values["split"] = "train";
  if (dataset == "synthetic-degree") {
    r.values["synthetic_graphs"] = "200";
    r.values["synthetic_threshold"] = "5";
  }
  for (const auto& [k, v] : file_values) r.values[k] = v;
  for (const auto& [k, v] : flags)
    if (k != "config") r.values[k] = v;

  if (defaults_it == dataset_defaults().end()) {
    for (const char* key : {"num_layers", "hidden_dim", "layer_type", "learning_rate",
                            "weight_decay", "epochs", "batch_size"})
      if (!r.has(key))
        throw ConfigError("dataset '" + dataset +
                          "' has no built-in defaults; set model option '" + key +
                          "' explicitly");
  }
  return r;
}

GraphDataset load_dataset(const Resolved& r) {
  const std::string& name = r.str("dataset");
  GraphDataset ds;
  if (name == "synthetic-degree") {
    PlantedDegreeOptions opts;
    if (r.has("synthetic_n_min")) opts.n_min = r.integer("synthetic_n_min");
    if (r.has("synthetic_n_max")) opts.n_max = r.integer("synthetic_n_max");
    ds = gen_planted_degree_dataset(r.integer("synthetic_graphs"),
                                    r.integer("synthetic_threshold"),
                                    mix_seed(r.seed(), "generator"), opts);
  } else {
    if (!r.has("data_dir"))
      throw ConfigError("dataset '" + name + "' needs --data-dir pointing at the TU files");
    ds = load_tu_dataset(r.str("data_dir"), name);
  }
  make_split(ds, r.real("train_fraction"), r.seed());
  return ds;
}

ModelConfig model_config(const Resolved& r, const GraphDataset& ds) {
  ModelConfig c;
  c.num_layers = r.integer("num_layers");
  c.hidden_dim = r.integer("hidden_dim");
  c.layer_type = layer_type_from_name(r.str("layer_type"));
  c.num_classes = ds.num_classes;
  c.learning_rate = r.real("learning_rate");
  c.weight_decay = r.real("weight_decay");
  c.epochs = r.integer("epochs");
  std::string patience = r.str_or("early_stop_patience", "none");
  if (patience != "none" && patience != "N/A") c.early_stop_patience = std::stoi(patience);
  c.batch_size = r.integer("batch_size");
  c.seed = r.seed();
  return c;
}

SearchOptions search_options(const Resolved& r) {
  SearchOptions opts;
  opts.depth = r.integer("depth");
  opts.width = r.integer("width");
  opts.quantile_levels = parse_double_list(r.str("quantiles"), "quantiles");
  opts.seed = r.seed();
  if (r.has("probe_graphs")) opts.probe_graphs = r.integer("probe_graphs");
  if (r.has("threads")) opts.threads = r.integer("threads");
  return opts;
}

std::vector<int> split_ids(const Resolved& r, const GraphDataset& ds) {
  const std::string& split = r.str("split");
  if (split == "train") return ds.train_indices;
  if (split == "test") return ds.test_indices;
  if (split == "all") {
    std::vector<int> ids(ds.size());
    for (int i = 0; i < ds.size(); ++i) ids[i] = i;
    return ids;
  }
  throw ConfigError("split must be train, test or all; got '" + split + "'");
}

void echo_config(const Resolved& r, const std::filesystem::path& out_dir) {
  std::string text;
  for (const auto& [k, v] : r.values) text += k + " = " + v + "\n";
  write_text_file(out_dir / "resolved_config.txt", text);
}

int threads_of(const Resolved& r) { return r.has("threads") ? r.integer("threads") : 0; }

Task vocab_task(const Resolved& r) {
  return task_from_name(r.str_or("vocab", r.str("dataset")));
}

int cmd_train(const Resolved& r) {
  std::filesystem::path out_dir = r.str("out");
  GraphDataset ds = load_dataset(r);
  ModelConfig config = model_config(r, ds);
  TrainResult result = train(config, ds);
  echo_config(r, out_dir);
  save_checkpoint(result.params, out_dir / "checkpoint.json");
  write_text_file(out_dir / "training_log.csv", training_log_csv(result.log));
  EvalStats train_stats = evaluate(result.params, ds, ds.train_indices);
  EvalStats test_stats = evaluate(result.params, ds, ds.test_indices);
  std::cout << "trained " << layer_type_name(config.layer_type) << " N=" << config.num_layers
            << " D=" << config.hidden_dim << " for " << result.log.size()
            << " epochs; train_acc=" << fmt_double(train_stats.accuracy)
            << " test_acc=" << fmt_double(test_stats.accuracy) << "\n";
  std::cout << "wrote " << (out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

int cmd_dissect(const Resolved& r) {
  std::filesystem::path out_dir = r.str("out");
  GraphDataset ds = load_dataset(r);
  std::vector<int> ids = split_ids(r, ds);
  SearchOptions opts = search_options(r);
  std::vector<BaseConcept> atoms = base_vocabulary(vocab_task(r));

  std::optional<ModelParams> params;
  if (r.has("checkpoint")) params = load_checkpoint(r.str("checkpoint"));

  DissectionContext ctx;
  if (r.has("activations_in")) {
    ActivationExport dump =
        activations_from_json(nlohmann::json::parse(read_text_file(r.str("activations_in"))));
    int layer = r.has("layer") ? r.integer("layer") : dump.layers;
    ctx = context_from_export(dump, ds, layer);
  } else {
    if (!params) throw ConfigError("dissect needs --checkpoint (or --activations-in)");
    int layer = r.has("layer") ? r.integer("layer") : params->config.num_layers;
    ctx = capture_activations(*params, ds, ids, layer, opts.threads);
  }

  NeuronConceptMap map = beam_search(ctx, atoms, opts);
  echo_config(r, out_dir);
  save_concept_map(map, out_dir / "concept_map.json");

  std::vector<NeuronMetrics> metrics;
  if (params) {
    metrics = compute_neuron_metrics(*params, ds, ctx.graph_ids, map, opts.threads);
  } else {
    for (const auto& entry : map.neurons) {
      NeuronMetrics m;
      m.neuron = entry.neuron;
      m.dead = entry.dead;
      m.interpretability = entry.dead || entry.entries.empty() ? 0.0 : entry.entries.front().score;
      m.importance = std::numeric_limits<double>::quiet_NaN();
      m.correctness = std::numeric_limits<double>::quiet_NaN();
      metrics.push_back(m);
    }
  }
  write_text_file(out_dir / "neuron_metrics.csv", neuron_metrics_csv(metrics));

  if (r.has("export_activations")) {
    if (!params) throw ConfigError("--export-activations needs --checkpoint");
    ActivationExport dump = export_activations(*params, ds, ctx.graph_ids, opts.threads);
    write_text_file(r.str("export_activations"), activations_to_json(dump).dump() + "\n");
  }

  int alive = 0;
  for (const auto& e : map.neurons) alive += !e.dead;
  std::cout << "dissected layer " << ctx.layer << ": " << alive << "/" << map.neurons.size()
            << " live neurons\n";
  std::cout << "wrote " << (out_dir / "concept_map.json").string() << "\n";
  return 0;
}

int cmd_explain(const Resolved& r) {
  std::filesystem::path out_dir = r.str("out");
  if (!r.has("checkpoint")) throw ConfigError("explain needs --checkpoint");
  if (!r.has("concept_map")) throw ConfigError("explain needs --concept-map");
  if (!r.has("class")) throw ConfigError("explain needs --class");

  GraphDataset ds = load_dataset(r);
  ModelParams params = load_checkpoint(r.str("checkpoint"));
  NeuronConceptMap map = load_concept_map(r.str("concept_map"));
  int cls = r.integer("class");
  if (cls < 0 || cls >= params.config.num_classes)
    throw ConfigError("class " + std::to_string(cls) + " out of range [0, " +
                      std::to_string(params.config.num_classes - 1) + "]");

  std::vector<int> ids = split_ids(r, ds);
  DissectionContext ctx =
      capture_activations(params, ds, ids, params.config.num_layers, threads_of(r));
  GlobalExplanation explanation = build_global_explanation(params, ds, ctx, map, cls);

  echo_config(r, out_dir);
  write_text_file(out_dir / ("explanation_class" + std::to_string(cls) + ".json"),
                  explanation_to_json(explanation).dump(2) + "\n");
  for (const auto& ne : explanation.neurons) {
    write_text_file(out_dir / ("cam_neuron" + std::to_string(ne.neuron) + "_class" +
                               std::to_string(cls) + ".dot"),
                    to_dot(ne.cam, ds));
  }
  if (!explanation.warning.empty()) std::cout << "warning: " << explanation.warning << "\n";
  std::cout << "explained class " << cls << " with " << explanation.neurons.size()
            << " neurons\n";
  return 0;
}

int cmd_experiment(const Resolved& r) {
  std::filesystem::path out_dir = r.str("out");
  const std::string kind = r.str_or("kind", "");
  GraphDataset ds = load_dataset(r);
  SearchOptions opts = search_options(r);
  std::vector<BaseConcept> atoms = base_vocabulary(vocab_task(r));
  echo_config(r, out_dir);

  if (kind == "epochs") {
    if (!r.has("epochs_list")) throw ConfigError("experiment kind=epochs needs --epochs-list");
    std::vector<int> epoch_list = parse_int_list(r.str("epochs_list"), "epochs-list");
    ModelConfig config = model_config(r, ds);
    auto points = sweep_epochs(config, ds, epoch_list, atoms, opts);
    write_text_file(out_dir / "sweep_epochs.csv", sweep_csv(points, "epochs"));
    for (const auto& p : points)
      write_text_file(out_dir / ("neuron_metrics_epochs" + std::to_string(p.sweep_value) + ".csv"),
                      neuron_metrics_csv(p.metrics));
    std::cout << "epoch sweep over " << points.size() << " budgets written\n";
    return 0;
  }
  if (kind == "layers") {
    if (!r.has("checkpoint")) throw ConfigError("experiment kind=layers needs --checkpoint");
    ModelParams params = load_checkpoint(r.str("checkpoint"));
    auto points = sweep_layers(params, ds, split_ids(r, ds), atoms, opts);
    write_text_file(out_dir / "sweep_layers.csv", sweep_csv(points, "layer"));
    for (const auto& p : points)
      write_text_file(out_dir / ("neuron_metrics_layer" + std::to_string(p.sweep_value) + ".csv"),
                      neuron_metrics_csv(p.metrics));
    std::cout << "layer sweep over " << points.size() << " layers written\n";
    return 0;
  }
  throw ConfigError("experiment --kind must be 'epochs' or 'layers'");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"graphdissect: train small GNN graph classifiers, dissect their neurons into "
               "logical concepts, and emit global explanations"};
  app.require_subcommand(1);

  KeyValues flags;
  auto add_common = [&](CLI::App* cmd) {
    auto capture = [&flags](const std::string& key) {
      return [&flags, key](const std::string& value) { flags[key] = value; };
    };
    cmd->add_option_function<std::string>("--config", capture("config"),
                                          "flat key=value config file");
    cmd->add_option_function<std::string>("--dataset", capture("dataset"),
                                          "MUTAG|PROTEINS|IMDB-B|REDDIT-B|synthetic-degree or a "
                                          "custom TU dataset name");
    cmd->add_option_function<std::string>("--data-dir", capture("data_dir"),
                                          "directory with <name>_*.txt TU files");
    cmd->add_option_function<std::string>("--out", capture("out"), "output directory")
        ->required();
    cmd->add_option_function<std::string>("--seed", capture("seed"), "master seed");
    cmd->add_option_function<std::string>("--threads", capture("threads"), "worker threads");
    cmd->add_option_function<std::string>("--train-fraction", capture("train_fraction"),
                                          "stratified split fraction");
    cmd->add_option_function<std::string>("--split", capture("split"),
                                          "graphs to dissect/explain over: train|test|all");
    cmd->add_option_function<std::string>("--vocab", capture("vocab"),
                                          "base-concept vocabulary task override");
    cmd->add_option_function<std::string>("--synthetic-graphs", capture("synthetic_graphs"),
                                          "synthetic-degree graph count");
    cmd->add_option_function<std::string>("--synthetic-threshold", capture("synthetic_threshold"),
                                          "synthetic-degree planted threshold");
    cmd->add_option_function<std::string>("--num-layers", capture("num_layers"), "GNN layers");
    cmd->add_option_function<std::string>("--hidden-dim", capture("hidden_dim"), "latent size");
    cmd->add_option_function<std::string>("--layer-type", capture("layer_type"), "GIN|GCN");
    cmd->add_option_function<std::string>("--learning-rate", capture("learning_rate"),
                                          "Adam learning rate");
    cmd->add_option_function<std::string>("--weight-decay", capture("weight_decay"), "L2 decay");
    cmd->add_option_function<std::string>("--epochs", capture("epochs"), "training epochs");
    cmd->add_option_function<std::string>("--patience", capture("early_stop_patience"),
                                          "early-stop patience or 'none'");
    cmd->add_option_function<std::string>("--batch-size", capture("batch_size"), "batch size");
    return cmd;
  };

  CLI::App* train_cmd = add_common(app.add_subcommand("train", "train a model"));
  (void)train_cmd;

  CLI::App* dissect_cmd = add_common(
      app.add_subcommand("dissect", "search per-neuron concepts and write metrics"));
  {
    auto capture = [&flags](const std::string& key) {
      return [&flags, key](const std::string& value) { flags[key] = value; };
    };
    dissect_cmd->add_option_function<std::string>("--checkpoint", capture("checkpoint"),
                                                  "model checkpoint");
    dissect_cmd->add_option_function<std::string>("--layer", capture("layer"),
                                                  "layer to dissect (default: final)");
    dissect_cmd->add_option_function<std::string>("--depth", capture("depth"),
                                                  "beam search depth");
    dissect_cmd->add_option_function<std::string>("--width", capture("width"), "beam width");
    dissect_cmd->add_option_function<std::string>("--quantiles", capture("quantiles"),
                                                  "threshold quantile levels");
    dissect_cmd->add_option_function<std::string>("--export-activations",
                                                  capture("export_activations"),
                                                  "write a flat activation dump here");
    dissect_cmd->add_option_function<std::string>("--activations-in", capture("activations_in"),
                                                  "dissect an imported activation dump");
  }

  CLI::App* explain_cmd =
      add_common(app.add_subcommand("explain", "build a class-level global explanation"));
  {
    auto capture = [&flags](const std::string& key) {
      return [&flags, key](const std::string& value) { flags[key] = value; };
    };
    explain_cmd->add_option_function<std::string>("--checkpoint", capture("checkpoint"),
                                                  "model checkpoint");
    explain_cmd->add_option_function<std::string>("--concept-map", capture("concept_map"),
                                                  "concept map JSON from dissect");
    explain_cmd->add_option_function<std::string>("--class", capture("class"), "target class");
  }

  CLI::App* experiment_cmd =
      add_common(app.add_subcommand("experiment", "epoch / layer sweeps"));
  {
    auto capture = [&flags](const std::string& key) {
      return [&flags, key](const std::string& value) { flags[key] = value; };
    };
    experiment_cmd->add_option_function<std::string>("--kind", capture("kind"),
                                                     "epochs or layers");
    experiment_cmd->add_option_function<std::string>("--epochs-list", capture("epochs_list"),
                                                     "comma-separated epoch budgets");
    experiment_cmd->add_option_function<std::string>("--checkpoint", capture("checkpoint"),
                                                     "model checkpoint (layer sweep)");
    experiment_cmd->add_option_function<std::string>("--depth", capture("depth"), "beam depth");
    experiment_cmd->add_option_function<std::string>("--width", capture("width"), "beam width");
    experiment_cmd->add_option_function<std::string>("--quantiles", capture("quantiles"),
                                                     "threshold quantile levels");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Resolved r = resolve(flags);
    if (app.got_subcommand("train")) return cmd_train(r);
    if (app.got_subcommand("dissect")) return cmd_dissect(r);
    if (app.got_subcommand("explain")) return cmd_explain(r);
    if (app.got_subcommand("experiment")) return cmd_experiment(r);
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IngestionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  return run(args);
}

}  // namespace graphdissect::cli
