#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "graphdissect/errors.hpp"
#include "graphdissect/graph.hpp"
#include "graphdissect/synthetic.hpp"
#include "graphdissect/tu_io.hpp"

using namespace graphdissect;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "graphdissect-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

bool same_graph(const Graph& a, const Graph& b) {
  if (a.node_count != b.node_count) return false;
  if (a.node_labels != b.node_labels) return false;
  for (int v = 0; v < a.node_count; ++v)
    if (a.adjacency[v] != b.adjacency[v]) return false;
  return true;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("make_batch concatenates graphs with block-diagonal adjacency") {
  GraphDataset ds;
  ds.num_classes = 2;
  Graph a;
  a.resize(3);
  a.add_edge(0, 1);
  a.add_edge(1, 2);
  a.graph_label = 0;
  Graph b;
  b.resize(2);
  b.add_edge(0, 1);
  b.graph_label = 1;
  ds.graphs = {a, b};

  auto [batch, bi] = make_batch(ds, {0, 1});
  CHECK(batch.node_count == 5);
  CHECK(bi.index_vector == std::vector<int>{0, 0, 0, 1, 1});
  CHECK(bi.offsets == std::vector<int>{0, 3, 5});
  CHECK(batch.has_edge(3, 4));
  CHECK_FALSE(batch.has_edge(2, 3));

  auto [single, sbi] = make_batch(ds, {1});
  CHECK(single.node_count == 2);
  CHECK(sbi.index_vector == std::vector<int>{0, 0});

  CHECK_THROWS_AS(make_batch(ds, {}), ConfigError);
}

TEST_CASE("batch then slice reconstructs the originals") {
  GraphDataset ds = testsupport::random_unlabeled_dataset(12, 1, 9, 0.35, 7);
  std::vector<int> ids = {3, 0, 7, 7, 11};
  auto [batch, bi] = make_batch(ds, ids);
  CHECK(bi.total_nodes() == batch.node_count);
  auto parts = split_batch(batch, bi);
  REQUIRE(parts.size() == ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(same_graph(parts[i], ds.graphs[ids[i]]));
}

TEST_CASE("adjacency symmetry and degree bookkeeping") {
  GraphDataset ds = testsupport::random_unlabeled_dataset(10, 2, 12, 0.3, 5);
  for (const auto& g : ds.graphs) {
    for (int v = 0; v < g.node_count; ++v) {
      CHECK(g.degree(v) == static_cast<int>(g.adjacency[v].size()));
      for (int u : g.adjacency[v]) {
        CHECK(u != v);
        CHECK(g.has_edge(u, v));
      }
    }
  }
}

TEST_CASE("TU loader parses a hand-written dataset") {
  fs::path dir = scratch_dir("tu-basic");
  // two graphs: a triangle and a single isolated node
  write_file(dir / "toy_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n");
  write_file(dir / "toy_graph_indicator.txt", "1\n1\n1\n2\n");
  write_file(dir / "toy_graph_labels.txt", "5\n-3\n");
  GraphDataset ds = load_tu_dataset(dir, "toy");
  REQUIRE(ds.size() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.graphs[0].graph_label == 1);  // labels remapped by sorted value: -3 -> 0, 5 -> 1
  CHECK(ds.graphs[1].graph_label == 0);
  CHECK(ds.graphs[0].node_count == 3);
  CHECK(ds.graphs[0].edge_count() == 3);
  CHECK(ds.graphs[1].node_count == 1);
  CHECK(ds.graphs[1].adjacency[0].empty());
  CHECK_FALSE(ds.labeled());
}

TEST_CASE("TU loader tolerates single-direction edges") {
  fs::path dir = scratch_dir("tu-single");
  write_file(dir / "toy_A.txt", "1, 2\n");
  write_file(dir / "toy_graph_indicator.txt", "1\n1\n");
  write_file(dir / "toy_graph_labels.txt", "0\n");
  GraphDataset ds = load_tu_dataset(dir, "toy");
  CHECK(ds.graphs[0].has_edge(0, 1));
  CHECK(ds.graphs[0].has_edge(1, 0));
}

TEST_CASE("TU loader error paths") {
  fs::path dir = scratch_dir("tu-errors");
  write_file(dir / "toy_graph_indicator.txt", "1\n1\n");
  write_file(dir / "toy_graph_labels.txt", "0\n");

  SUBCASE("missing edge file names the file") {
    try {
      load_tu_dataset(dir, "toy");
      FAIL("expected IngestionError");
    } catch (const IngestionError& e) {
      CHECK(std::string(e.what()).find("toy_A.txt") != std::string::npos);
    }
  }
  SUBCASE("1-based convention rejects node id 0") {
    write_file(dir / "toy_A.txt", "0, 1\n");
    CHECK_THROWS_AS(load_tu_dataset(dir, "toy"), FormatError);
  }
  SUBCASE("dangling node reference reports the line") {
    write_file(dir / "toy_A.txt", "1, 2\n1, 9\n");
    try {
      load_tu_dataset(dir, "toy");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
}

TEST_CASE("molecule fixture through the MUTAG alphabet path") {
  fs::path dir = scratch_dir("tu-mutag");
  GraphDataset fixture = testsupport::gen_molecule_fixture(30, 11);
  save_tu_dataset(fixture, dir, "MUTAG");

  GraphDataset loaded = load_tu_dataset(dir, "MUTAG");
  CHECK(loaded.size() == static_cast<int>(count_lines(dir / "MUTAG_graph_labels.txt")));
  REQUIRE(loaded.labeled());
  CHECK(loaded.label_alphabet ==
        std::vector<std::string>{"C", "N", "O", "F", "I", "Cl", "Br"});
  REQUIRE(loaded.size() == fixture.size());
  for (int i = 0; i < loaded.size(); ++i) {
    CHECK(same_graph(loaded.graphs[i], fixture.graphs[i]));
    CHECK(loaded.graphs[i].graph_label == fixture.graphs[i].graph_label);
  }
}

TEST_CASE("synthetic export round-trips through TU format") {
  fs::path dir = scratch_dir("tu-roundtrip");
  GraphDataset ds = gen_planted_degree_dataset(20, 3, 9);
  save_tu_dataset(ds, dir, "planted");
  GraphDataset loaded = load_tu_dataset(dir, "planted");
  REQUIRE(loaded.size() == ds.size());
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(same_graph(loaded.graphs[i], ds.graphs[i]));
    CHECK(loaded.graphs[i].graph_label == ds.graphs[i].graph_label);
  }
}

TEST_CASE("planted-degree generator honors the class property") {
  GraphDataset ds = gen_planted_degree_dataset(200, 5, 42);
  REQUIRE(ds.size() == 200);
  int per_class[2] = {0, 0};
  for (const auto& g : ds.graphs) {
    ++per_class[g.graph_label];
    // brute-force degree scan
    if (g.graph_label == 1)
      CHECK(g.max_degree() >= 6);
    else
      CHECK(g.max_degree() <= 5);
  }
  CHECK(per_class[0] == 100);
  CHECK(per_class[1] == 100);
}

TEST_CASE("planted-degree generator is deterministic") {
  GraphDataset a = gen_planted_degree_dataset(40, 4, 123);
  GraphDataset b = gen_planted_degree_dataset(40, 4, 123);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(same_graph(a.graphs[i], b.graphs[i]));
    CHECK(a.graphs[i].graph_label == b.graphs[i].graph_label);
  }
}

TEST_CASE("planted-degree generator smallest instance") {
  GraphDataset ds = gen_planted_degree_dataset(2, 1, 0);
  REQUIRE(ds.size() == 2);
  CHECK(ds.graphs[0].graph_label == 0);
  CHECK(ds.graphs[1].graph_label == 1);
  CHECK(ds.graphs[0].max_degree() <= 1);
  CHECK(ds.graphs[1].max_degree() >= 2);
}

TEST_CASE("planted-degree generator rejects infeasible thresholds") {
  PlantedDegreeOptions opts;
  opts.n_min = 4;
  opts.n_max = 6;
  CHECK_THROWS_AS(gen_planted_degree_dataset(4, 10, 0, opts), GenerationError);
  CHECK_THROWS_AS(gen_planted_degree_dataset(3, 5, 0), ConfigError);  // odd count
  CHECK_THROWS_AS(gen_planted_degree_dataset(4, 0, 0), ConfigError);  // threshold < 1
}

TEST_CASE("stratified split is disjoint, in range, deterministic") {
  GraphDataset ds = gen_planted_degree_dataset(60, 3, 4);
  make_split(ds, 0.8, 17);
  auto train = ds.train_indices;
  auto test = ds.test_indices;
  CHECK(train.size() + test.size() == static_cast<std::size_t>(ds.size()));
  for (int id : train) {
    CHECK(id >= 0);
    CHECK(id < ds.size());
    CHECK(std::find(test.begin(), test.end(), id) == test.end());
  }
  int train_pos = 0;
  for (int id : train) train_pos += ds.graphs[id].graph_label == 1;
  CHECK(train_pos == 24);  // 80% of the 30 positives

  GraphDataset ds2 = gen_planted_degree_dataset(60, 3, 4);
  make_split(ds2, 0.8, 17);
  CHECK(ds2.train_indices == train);
  CHECK(ds2.test_indices == test);
}
