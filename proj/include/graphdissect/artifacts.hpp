#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "graphdissect/explain.hpp"
#include "graphdissect/metrics.hpp"
#include "graphdissect/search.hpp"
#include "graphdissect/train.hpp"

namespace graphdissect {

// Shortest round-trip decimal rendering, shared by CSV/DOT/JSON writers so
// artifacts are byte-stable.
std::string fmt_double(double v);

void write_text_file(const std::filesystem::path& file, const std::string& content);
std::string read_text_file(const std::filesystem::path& file);

nlohmann::json checkpoint_to_json(const ModelParams& params);
ModelParams checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& file);
ModelParams load_checkpoint(const std::filesystem::path& file);

nlohmann::json concept_map_to_json(const NeuronConceptMap& map);
NeuronConceptMap concept_map_from_json(const nlohmann::json& j);
void save_concept_map(const NeuronConceptMap& map, const std::filesystem::path& file);
NeuronConceptMap load_concept_map(const std::filesystem::path& file);

std::string training_log_csv(const std::vector<EpochLog>& log);
std::string neuron_metrics_csv(const std::vector<NeuronMetrics>& metrics);
std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& value_column);

nlohmann::json explanation_to_json(const GlobalExplanation& explanation);

// Flat (layer, neuron, node)-indexed activation dump of every layer plus the
// batch index, so externally produced activations can feed concept search.
struct ActivationExport {
  int layers = 0;
  int neurons = 0;
  std::vector<int> graph_ids;
  BatchIndex index;
  std::vector<double> data;  // layer-major, then neuron, then node
};

ActivationExport export_activations(const ModelParams& params, const GraphDataset& dataset,
                                    const std::vector<int>& graph_ids, int threads = 0);
nlohmann::json activations_to_json(const ActivationExport& acts);
ActivationExport activations_from_json(const nlohmann::json& j);

// Builds a DissectionContext for one layer of an imported activation dump.
DissectionContext context_from_export(const ActivationExport& acts, const GraphDataset& dataset,
                                      int layer);

}  // namespace graphdissect
