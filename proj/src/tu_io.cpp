#include "graphdissect/tu_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "graphdissect/errors.hpp"

namespace graphdissect {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot open dataset file: " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

int parse_int(std::string_view s, const std::filesystem::path& file, std::size_t lineno) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + b, s.data() + e, value);
  if (ec != std::errc() || ptr != s.data() + e)
    throw FormatError(file.string() + ":" + std::to_string(lineno) + ": expected integer, got '" +
                      std::string(s) + "'");
  return value;
}

// Known node-label alphabets; anything else falls back to the decimal value.
std::vector<std::string> alphabet_for(const std::string& name, int max_label) {
  if (name == "MUTAG" && max_label <= 6) return {"C", "N", "O", "F", "I", "Cl", "Br"};
  if (name == "PROTEINS" && max_label <= 2) return {"A", "B", "C"};
  std::vector<std::string> names;
  for (int i = 0; i <= max_label; ++i) names.push_back(std::to_string(i));
  return names;
}

}  // namespace

GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
  const auto indicator_file = dir / (name + "_graph_indicator.txt");
  const auto edges_file = dir / (name + "_A.txt");
  const auto graph_labels_file = dir / (name + "_graph_labels.txt");
  const auto node_labels_file = dir / (name + "_node_labels.txt");

  auto indicator_lines = read_lines(indicator_file);
  auto label_lines = read_lines(graph_labels_file);
  const int num_graphs = static_cast<int>(label_lines.size());
  const int num_nodes = static_cast<int>(indicator_lines.size());

  std::vector<int> node_graph(num_nodes);  // 0-based owning graph per node
  int prev = 1;
  for (int i = 0; i < num_nodes; ++i) {
    int gid = parse_int(indicator_lines[i], indicator_file, i + 1);
    if (gid < 1 || gid > num_graphs)
      throw FormatError(indicator_file.string() + ":" + std::to_string(i + 1) +
                        ": graph id " + std::to_string(gid) + " out of range");
    if (gid < prev)
      throw FormatError(indicator_file.string() + ":" + std::to_string(i + 1) +
                        ": graph indicator must be nondecreasing");
    prev = gid;
    node_graph[i] = gid - 1;
  }

  GraphDataset ds;
  ds.graphs.resize(num_graphs);
  std::vector<int> first_node(num_graphs, -1);
  std::vector<int> node_counts(num_graphs, 0);
  for (int i = 0; i < num_nodes; ++i) {
    if (first_node[node_graph[i]] < 0) first_node[node_graph[i]] = i;
    ++node_counts[node_graph[i]];
  }
  for (int g = 0; g < num_graphs; ++g) ds.graphs[g].resize(node_counts[g]);

  auto edge_lines = read_lines(edges_file);
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    const std::string& line = edge_lines[ln];
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError(edges_file.string() + ":" + std::to_string(ln + 1) +
                        ": expected 'u, v' edge pair");
    int u = parse_int(std::string_view(line).substr(0, comma), edges_file, ln + 1);
    int v = parse_int(std::string_view(line).substr(comma + 1), edges_file, ln + 1);
    if (u < 1 || v < 1 || u > num_nodes || v > num_nodes)
      throw FormatError(edges_file.string() + ":" + std::to_string(ln + 1) +
                        ": node reference out of range (ids are 1-based)");
    int ug = node_graph[u - 1], vg = node_graph[v - 1];
    if (ug != vg)
      throw FormatError(edges_file.string() + ":" + std::to_string(ln + 1) +
                        ": edge crosses graph boundary");
    int base = first_node[ug];
    ds.graphs[ug].add_edge(u - 1 - base, v - 1 - base);
  }
  for (auto& g : ds.graphs) g.normalize();

  // Graph class labels, remapped to dense 0..r-1 by sorted value.
  std::vector<int> raw_labels(num_graphs);
  std::map<int, int> class_remap;
  for (int g = 0; g < num_graphs; ++g) {
    raw_labels[g] = parse_int(label_lines[g], graph_labels_file, g + 1);
    class_remap[raw_labels[g]] = 0;
  }
  int next_class = 0;
  for (auto& [value, dense] : class_remap) dense = next_class++;
  for (int g = 0; g < num_graphs; ++g) ds.graphs[g].graph_label = class_remap[raw_labels[g]];
  ds.num_classes = next_class;

  if (std::filesystem::exists(node_labels_file)) {
    auto node_label_lines = read_lines(node_labels_file);
    if (static_cast<int>(node_label_lines.size()) != num_nodes)
      throw FormatError(node_labels_file.string() + ": expected " + std::to_string(num_nodes) +
                        " node labels, got " + std::to_string(node_label_lines.size()));
    std::vector<int> raw(num_nodes);
    int max_label = 0;
    for (int i = 0; i < num_nodes; ++i) {
      raw[i] = parse_int(node_label_lines[i], node_labels_file, i + 1);
      if (raw[i] < 0)
        throw FormatError(node_labels_file.string() + ":" + std::to_string(i + 1) +
                          ": negative node label");
      max_label = std::max(max_label, raw[i]);
    }
    ds.label_alphabet = alphabet_for(name, max_label);
    if (static_cast<int>(ds.label_alphabet.size()) <= max_label)
      throw FormatError(node_labels_file.string() + ": node label " + std::to_string(max_label) +
                        " outside alphabet of size " + std::to_string(ds.label_alphabet.size()));
    for (int i = 0; i < num_nodes; ++i)
      ds.graphs[node_graph[i]].node_labels.push_back(raw[i]);
  }
  return ds;
}

void save_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& dir,
                     const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream a(dir / (name + "_A.txt"));
  std::ofstream ind(dir / (name + "_graph_indicator.txt"));
  std::ofstream gl(dir / (name + "_graph_labels.txt"));
  std::ofstream nl;
  if (dataset.labeled()) nl.open(dir / (name + "_node_labels.txt"));
  if (!a || !ind || !gl) throw IoError("cannot write TU files under " + dir.string());

  int base = 0;
  for (int g = 0; g < dataset.size(); ++g) {
    const Graph& graph = dataset.graphs[g];
    gl << graph.graph_label << "\n";
    for (int v = 0; v < graph.node_count; ++v) {
      ind << (g + 1) << "\n";
      if (dataset.labeled()) nl << graph.node_labels[v] << "\n";
      for (int u : graph.adjacency[v]) a << (base + v + 1) << ", " << (base + u + 1) << "\n";
    }
    base += graph.node_count;
  }
}

}  // namespace graphdissect
