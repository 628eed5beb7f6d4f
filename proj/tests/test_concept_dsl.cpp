#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>

#include "fixtures.hpp"
#include "graphdissect/concepts.hpp"
#include "graphdissect/errors.hpp"

using namespace graphdissect;

namespace {

const std::vector<std::string> kMutagAlphabet = {"C", "N", "O", "F", "I", "Cl", "Br"};

Graph path3() {
  Graph g;
  g.resize(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  return g;
}

Graph star(int leaves) {
  Graph g;
  g.resize(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

ConceptFormula random_formula(Rng& rng, const std::vector<BaseConcept>& atoms, int max_len) {
  int len = rng.uniform_int(1, max_len);
  ConceptFormula f =
      single_term(atoms[rng.uniform_int(0, static_cast<int>(atoms.size()) - 1)],
                  rng.uniform_int(0, 1) == 1);
  for (int i = 1; i < len; ++i)
    f = extend(f, rng.uniform_int(0, 1) ? Connective::And : Connective::Or,
               atoms[rng.uniform_int(0, static_cast<int>(atoms.size()) - 1)],
               rng.uniform_int(0, 1) == 1);
  return f;
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.node_count, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int u : g.adjacency[v])
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
  }
  return dist;
}

}  // namespace

TEST_CASE("degree predicates") {
  Graph g = path3();
  CHECK(eval_base(degree_is(1), g, {}) == ConceptMask{1, 0, 1});
  CHECK(eval_base(degree_is(2), g, {}) == ConceptMask{0, 1, 0});
  CHECK(eval_base(degree_greater(1), g, {}) == ConceptMask{0, 1, 0});
  CHECK(eval_base(nb_degree_is(2), g, {}) == ConceptMask{1, 0, 1});
  CHECK(eval_base(nb_degree_equal(2, 1), g, {}) == ConceptMask{0, 1, 0});
}

TEST_CASE("label predicates") {
  Graph g;
  g.resize(2);
  g.add_edge(0, 1);
  g.node_labels = {0, 1};  // C, N
  CHECK(eval_base(is_label("C"), g, kMutagAlphabet) == ConceptMask{1, 0});
  CHECK(eval_base(next_to({"C"}), g, kMutagAlphabet) == ConceptMask{0, 1});
  CHECK(eval_base(next_to({"N"}), g, kMutagAlphabet) == ConceptMask{1, 0});

  Graph nitro;  // ring carbon - N - (O, O)
  nitro.resize(4);
  nitro.add_edge(0, 1);
  nitro.add_edge(1, 2);
  nitro.add_edge(1, 3);
  nitro.node_labels = {0, 1, 2, 2};
  CHECK(eval_base(next_to({"O", "O"}), nitro, kMutagAlphabet) == ConceptMask{0, 1, 0, 0});
  CHECK(eval_base(next_to({"O"}), nitro, kMutagAlphabet) == ConceptMask{0, 1, 0, 0});
  CHECK(eval_base(nb_next_to({"O", "O"}), nitro, kMutagAlphabet) == ConceptMask{1, 0, 1, 1});

  Graph unlabeled = path3();
  CHECK_THROWS_AS(eval_base(is_label("C"), unlabeled, kMutagAlphabet), EvalError);
  CHECK_THROWS_AS(eval_base(is_label("Zn"), g, kMutagAlphabet), EvalError);
}

TEST_CASE("neighborhood degree-counting predicates on a star") {
  Graph g = star(5);
  // leaves have one neighbor (the center); the center's neighbors are leaves of degree 1
  ConceptMask m = eval_base(nb_degree_greater(2, 3), g, {});
  for (int v = 0; v < g.node_count; ++v) CHECK(m[v] == 0);
  CHECK(eval_base(nb_degree_greater(1, 3), g, {}) == ConceptMask{0, 1, 1, 1, 1, 1});
  CHECK(eval_base(nb_degree_equal(5, 1), g, {}) == ConceptMask{1, 0, 0, 0, 0, 0});
}

TEST_CASE("formula evaluation folds strictly left to right") {
  Graph g = path3();
  g.node_labels = {0, 1, 2};  // C, N, O

  SUBCASE("single term equals the base or its negation") {
    CHECK(eval_formula(single_term(degree_is(1)), g, kMutagAlphabet) ==
          eval_base(degree_is(1), g, kMutagAlphabet));
    ConceptMask negated = eval_formula(single_term(degree_is(1), true), g, kMutagAlphabet);
    CHECK(negated == ConceptMask{0, 1, 0});
  }
  SUBCASE("contradiction is the zero mask") {
    Rng rng(33);
    auto atoms = base_vocabulary(Task::Mutag);
    for (int trial = 0; trial < 50; ++trial) {
      const BaseConcept& c = atoms[rng.uniform_int(0, static_cast<int>(atoms.size()) - 1)];
      ConceptFormula f = extend(single_term(c, false), Connective::And, c, true);
      ConceptMask m = eval_formula(f, g, kMutagAlphabet);
      for (auto bit : m) CHECK(bit == 0);
    }
  }
  SUBCASE("pinned fold example against a per-node truth table") {
    ConceptFormula f = single_term(degree_is(1));
    f = extend(f, Connective::Or, degree_is(2), false);
    f = extend(f, Connective::And, is_label("C"), true);
    ConceptMask got = eval_formula(f, g, kMutagAlphabet);
    for (int v = 0; v < g.node_count; ++v) {
      bool t1 = g.degree(v) == 1;
      bool t2 = g.degree(v) == 2;
      bool t3 = g.node_labels[v] != 0;
      CHECK(static_cast<bool>(got[v]) == ((t1 || t2) && t3));
    }
  }
  SUBCASE("random formulas match a per-node left fold") {
    GraphDataset mols = testsupport::gen_molecule_fixture(6, 15);
    Rng rng(44);
    auto atoms = base_vocabulary(Task::Mutag);
    for (int trial = 0; trial < 200; ++trial) {
      ConceptFormula f = random_formula(rng, atoms, 4);
      const Graph& mg = mols.graphs[trial % mols.size()];
      ConceptMask got = eval_formula(f, mg, mols.label_alphabet);
      for (int v = 0; v < mg.node_count; ++v) {
        auto term_bit = [&](const ConceptTerm& t) {
          bool bit = eval_base(t.base, mg, mols.label_alphabet)[v] != 0;
          return t.negated ? !bit : bit;
        };
        bool acc = term_bit(f.terms[0]);
        for (std::size_t i = 0; i < f.ops.size(); ++i) {
          bool next = term_bit(f.terms[i + 1]);
          acc = f.ops[i] == Connective::And ? (acc && next) : (acc || next);
        }
        CHECK(static_cast<bool>(got[v]) == acc);
      }
    }
  }
}

TEST_CASE("masks only depend on the 2-hop neighborhood") {
  Rng rng(55);
  auto atoms = base_vocabulary(Task::SyntheticDegree);
  for (int trial = 0; trial < 40; ++trial) {
    Graph g = testsupport::random_graph(14, 0.18, rng);
    int probe = rng.uniform_int(0, g.node_count - 1);
    auto dist = bfs_distances(g, probe);
    std::vector<int> far;
    for (int v = 0; v < g.node_count; ++v)
      if (dist[v] < 0 || dist[v] >= 3) far.push_back(v);
    if (far.size() < 2) continue;

    ConceptFormula f = random_formula(rng, atoms, 3);
    bool before = eval_formula(f, g, {})[probe] != 0;

    Graph changed = g;
    int u = far[rng.uniform_int(0, static_cast<int>(far.size()) - 1)];
    int w = far[rng.uniform_int(0, static_cast<int>(far.size()) - 1)];
    if (u == w) continue;
    if (changed.has_edge(u, w)) {
      auto& nu = changed.adjacency[u];
      auto& nw = changed.adjacency[w];
      nu.erase(std::find(nu.begin(), nu.end(), w));
      nw.erase(std::find(nw.begin(), nw.end(), u));
    } else {
      changed.add_edge(u, w);
      changed.normalize();
    }
    CHECK((eval_formula(f, changed, {})[probe] != 0) == before);
  }
}

TEST_CASE("De Morgan holds at the mask level") {
  GraphDataset mols = testsupport::gen_molecule_fixture(4, 16);
  Rng rng(66);
  auto atoms = base_vocabulary(Task::Mutag);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph& g = mols.graphs[trial % mols.size()];
    const BaseConcept& c1 = atoms[rng.uniform_int(0, static_cast<int>(atoms.size()) - 1)];
    const BaseConcept& c2 = atoms[rng.uniform_int(0, static_cast<int>(atoms.size()) - 1)];
    ConceptMask lhs = eval_formula(extend(single_term(c1, true), Connective::Or, c2, true), g,
                                   mols.label_alphabet);
    ConceptMask conj = eval_formula(extend(single_term(c1, false), Connective::And, c2, false), g,
                                    mols.label_alphabet);
    for (int v = 0; v < g.node_count; ++v) CHECK(lhs[v] == static_cast<std::uint8_t>(!conj[v]));
  }
}

TEST_CASE("render uses the display forms and spells out NOT/AND/OR") {
  CHECK(render(ConceptTerm{degree_greater(7), true}) == "NOT deg-greater(7)");
  ConceptFormula f = single_term(is_label("C"));
  f = extend(f, Connective::And, next_to({"N"}), false);
  CHECK(render(f) == "is(C) AND next-to(N)");
  CHECK(render(nb_degree_equal(1, 10)) == "nb-degree-equal(1,10)");
  CHECK(render(nb_next_to({"A", "A"})) == "nb-next-to(A,A)");
}

TEST_CASE("parse inverts render on 1000 random formulas") {
  Rng rng(77);
  std::vector<BaseConcept> atoms = base_vocabulary(Task::Mutag);
  auto imdb = base_vocabulary(Task::ImdbB);
  auto reddit = base_vocabulary(Task::RedditB);
  auto proteins = base_vocabulary(Task::Proteins);
  atoms.insert(atoms.end(), imdb.begin(), imdb.end());
  atoms.insert(atoms.end(), reddit.begin(), reddit.end());
  atoms.insert(atoms.end(), proteins.begin(), proteins.end());
  for (int trial = 0; trial < 1000; ++trial) {
    ConceptFormula f = random_formula(rng, atoms, 4);
    ConceptFormula back = parse_formula(render(f));
    CHECK(back == f);
    CHECK(render(back) == render(f));  // rendering injective on round-trip
  }
}

TEST_CASE("parse rejects malformed formulas") {
  CHECK_THROWS_AS(parse_formula(""), FormatError);
  CHECK_THROWS_AS(parse_formula("NOT"), FormatError);
  CHECK_THROWS_AS(parse_formula("is(C) AND"), FormatError);
  CHECK_THROWS_AS(parse_formula("is(C) XOR is(N)"), FormatError);
  CHECK_THROWS_AS(parse_formula("frobnicate(3)"), FormatError);
  CHECK_THROWS_AS(parse_formula("degree-is(x)"), FormatError);
  CHECK_THROWS_AS(parse_formula("nb-degree-equal(1)"), FormatError);
}

TEST_CASE("per-task vocabularies match the published tables") {
  auto mutag = base_vocabulary(Task::Mutag);
  CHECK(mutag.size() == 27);
  auto contains = [](const std::vector<BaseConcept>& v, const BaseConcept& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  CHECK(contains(mutag, is_label("C")));
  CHECK(contains(mutag, next_to({"C", "C", "C"})));
  CHECK(contains(mutag, next_to({"O", "O"})));
  CHECK(contains(mutag, nb_degree_is(3)));

  auto proteins = base_vocabulary(Task::Proteins);
  CHECK(proteins.size() == 23);
  CHECK(contains(proteins, next_to({"C", "C", "C", "C", "C"})));
  CHECK(contains(proteins, nb_next_to({"B", "B", "B"})));

  auto imdb = base_vocabulary(Task::ImdbB);
  CHECK(imdb.size() == 60);
  CHECK(contains(imdb, degree_greater(1)));
  CHECK(contains(imdb, degree_greater(99)));
  CHECK(contains(imdb, nb_degree_greater(30, 5)));

  auto reddit = base_vocabulary(Task::RedditB);
  CHECK(reddit.size() == 44);
  CHECK(contains(reddit, degree_greater(97)));
  CHECK(contains(reddit, nb_degree_equal(1, 10)));

  CHECK(base_vocabulary(Task::SyntheticDegree).size() == 24);

  CHECK_THROWS_AS(task_from_name("ENZYMES"), ConfigError);
  CHECK(task_from_name("synthetic-degree") == Task::SyntheticDegree);
}
