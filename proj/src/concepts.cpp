#include "graphdissect/concepts.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "graphdissect/errors.hpp"

namespace graphdissect {

BaseConcept is_label(std::string label) {
  return {PredicateKind::Is, {std::move(label)}, 0, 0};
}
BaseConcept next_to(std::vector<std::string> labels) {
  return {PredicateKind::NextTo, std::move(labels), 0, 0};
}
BaseConcept nb_next_to(std::vector<std::string> labels) {
  return {PredicateKind::NbNextTo, std::move(labels), 0, 0};
}
BaseConcept degree_is(int x) { return {PredicateKind::DegreeIs, {}, x, 0}; }
BaseConcept nb_degree_is(int x) { return {PredicateKind::NbDegreeIs, {}, x, 0}; }
BaseConcept nb_degree_equal(int x, int y) { return {PredicateKind::NbDegreeEqual, {}, x, y}; }
BaseConcept degree_greater(int x) { return {PredicateKind::DegreeGreater, {}, x, 0}; }
BaseConcept nb_degree_greater(int x, int y) { return {PredicateKind::NbDegreeGreater, {}, x, y}; }

ConceptFormula single_term(BaseConcept base, bool negated) {
  ConceptFormula f;
  f.terms.push_back({std::move(base), negated});
  return f;
}

ConceptFormula extend(const ConceptFormula& f, Connective op, BaseConcept base, bool negated) {
  ConceptFormula out = f;
  out.ops.push_back(op);
  out.terms.push_back({std::move(base), negated});
  return out;
}

namespace {

int label_index(const std::vector<std::string>& alphabet, const std::string& name) {
  auto it = std::find(alphabet.begin(), alphabet.end(), name);
  if (it == alphabet.end()) throw EvalError("unknown node label name: " + name);
  return static_cast<int>(it - alphabet.begin());
}

// multiplicity per required label index
std::map<int, int> label_requirements(const BaseConcept& base,
                                      const std::vector<std::string>& alphabet) {
  std::map<int, int> req;
  for (const auto& name : base.labels) ++req[label_index(alphabet, name)];
  return req;
}

bool next_to_holds(const Graph& graph, int v, const std::map<int, int>& req) {
  for (auto [label, multiplicity] : req) {
    int count = 0;
    for (int u : graph.adjacency[v])
      if (graph.node_labels[u] == label) ++count;
    if (count < multiplicity) return false;
  }
  return true;
}

}  // namespace

ConceptMask eval_base(const BaseConcept& base, const Graph& graph,
                      const std::vector<std::string>& alphabet) {
  bool needs_labels = base.kind == PredicateKind::Is || base.kind == PredicateKind::NextTo ||
                      base.kind == PredicateKind::NbNextTo;
  if (needs_labels && !graph.labeled())
    throw EvalError("label predicate '" + render(base) + "' on an unlabeled graph");

  ConceptMask mask(graph.node_count, 0);
  switch (base.kind) {
    case PredicateKind::Is: {
      int label = label_index(alphabet, base.labels.at(0));
      for (int v = 0; v < graph.node_count; ++v) mask[v] = graph.node_labels[v] == label;
      break;
    }
    case PredicateKind::NextTo: {
      auto req = label_requirements(base, alphabet);
      for (int v = 0; v < graph.node_count; ++v) mask[v] = next_to_holds(graph, v, req);
      break;
    }
    case PredicateKind::NbNextTo: {
      auto req = label_requirements(base, alphabet);
      std::vector<std::uint8_t> inner(graph.node_count);
      for (int v = 0; v < graph.node_count; ++v) inner[v] = next_to_holds(graph, v, req);
      for (int v = 0; v < graph.node_count; ++v)
        for (int u : graph.adjacency[v])
          if (inner[u]) {
            mask[v] = 1;
            break;
          }
      break;
    }
    case PredicateKind::DegreeIs:
      for (int v = 0; v < graph.node_count; ++v) mask[v] = graph.degree(v) == base.x;
      break;
    case PredicateKind::NbDegreeIs:
      for (int v = 0; v < graph.node_count; ++v)
        for (int u : graph.adjacency[v])
          if (graph.degree(u) == base.x) {
            mask[v] = 1;
            break;
          }
      break;
    case PredicateKind::NbDegreeEqual:
      for (int v = 0; v < graph.node_count; ++v) {
        int count = 0;
        for (int u : graph.adjacency[v])
          if (graph.degree(u) == base.y) ++count;
        mask[v] = count >= base.x;
      }
      break;
    case PredicateKind::DegreeGreater:
      for (int v = 0; v < graph.node_count; ++v) mask[v] = graph.degree(v) > base.x;
      break;
    case PredicateKind::NbDegreeGreater:
      for (int v = 0; v < graph.node_count; ++v) {
        int count = 0;
        for (int u : graph.adjacency[v])
          if (graph.degree(u) > base.y) ++count;
        mask[v] = count >= base.x;
      }
      break;
  }
  return mask;
}

ConceptMask eval_formula(const ConceptFormula& formula, const Graph& graph,
                         const std::vector<std::string>& alphabet) {
  if (formula.terms.empty()) throw EvalError("empty concept formula");
  auto term_mask = [&](const ConceptTerm& t) {
    ConceptMask m = eval_base(t.base, graph, alphabet);
    if (t.negated)
      for (auto& bit : m) bit = !bit;
    return m;
  };
  ConceptMask acc = term_mask(formula.terms[0]);
  for (std::size_t i = 0; i < formula.ops.size(); ++i) {
    ConceptMask next = term_mask(formula.terms[i + 1]);
    if (formula.ops[i] == Connective::And)
      for (int v = 0; v < graph.node_count; ++v) acc[v] = acc[v] && next[v];
    else
      for (int v = 0; v < graph.node_count; ++v) acc[v] = acc[v] || next[v];
  }
  return acc;
}

namespace {

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ",";
    out += labels[i];
  }
  return out;
}

}  // namespace

std::string render(const BaseConcept& base) {
  switch (base.kind) {
    case PredicateKind::Is:
      return "is(" + base.labels.at(0) + ")";
    case PredicateKind::NextTo:
      return "next-to(" + join_labels(base.labels) + ")";
    case PredicateKind::NbNextTo:
      return "nb-next-to(" + join_labels(base.labels) + ")";
    case PredicateKind::DegreeIs:
      return "degree-is(" + std::to_string(base.x) + ")";
    case PredicateKind::NbDegreeIs:
      return "nb-degree-is(" + std::to_string(base.x) + ")";
    case PredicateKind::NbDegreeEqual:
      return "nb-degree-equal(" + std::to_string(base.x) + "," + std::to_string(base.y) + ")";
    case PredicateKind::DegreeGreater:
      return "deg-greater(" + std::to_string(base.x) + ")";
    case PredicateKind::NbDegreeGreater:
      return "nb-degree-greater(" + std::to_string(base.x) + "," + std::to_string(base.y) + ")";
  }
  throw Error("unreachable predicate kind");
}

std::string render(const ConceptTerm& term) {
  return term.negated ? "NOT " + render(term.base) : render(term.base);
}

std::string render(const ConceptFormula& formula) {
  std::string out = render(formula.terms.at(0));
  for (std::size_t i = 0; i < formula.ops.size(); ++i) {
    out += formula.ops[i] == Connective::And ? " AND " : " OR ";
    out += render(formula.terms[i + 1]);
  }
  return out;
}

namespace {

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

int parse_number(std::string_view s, std::string_view context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("formula parse: bad integer '" + std::string(s) + "' in " +
                      std::string(context));
  return value;
}

BaseConcept parse_base(const std::string& token) {
  auto open = token.find('(');
  if (open == std::string::npos || token.back() != ')')
    throw FormatError("formula parse: expected predicate(args), got '" + token + "'");
  std::string name = token.substr(0, open);
  std::string inner = token.substr(open + 1, token.size() - open - 2);

  std::vector<std::string> args;
  std::size_t start = 0;
  while (start <= inner.size() && !inner.empty()) {
    auto comma = inner.find(',', start);
    std::string arg = inner.substr(start, comma == std::string::npos ? comma : comma - start);
    while (!arg.empty() && arg.front() == ' ') arg.erase(arg.begin());
    while (!arg.empty() && arg.back() == ' ') arg.pop_back();
    args.push_back(arg);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (args.empty()) throw FormatError("formula parse: predicate '" + name + "' needs arguments");

  auto want = [&](std::size_t n) {
    if (args.size() != n)
      throw FormatError("formula parse: predicate '" + name + "' expects " + std::to_string(n) +
                        " argument(s)");
  };
  if (name == "is") {
    want(1);
    return is_label(args[0]);
  }
  if (name == "next-to") return next_to(args);
  if (name == "nb-next-to") return nb_next_to(args);
  if (name == "degree-is") {
    want(1);
    return degree_is(parse_number(args[0], name));
  }
  if (name == "nb-degree-is") {
    want(1);
    return nb_degree_is(parse_number(args[0], name));
  }
  if (name == "nb-degree-equal") {
    want(2);
    return nb_degree_equal(parse_number(args[0], name), parse_number(args[1], name));
  }
  if (name == "deg-greater" || name == "degree-greater") {
    want(1);
    return degree_greater(parse_number(args[0], name));
  }
  if (name == "nb-degree-greater") {
    want(2);
    return nb_degree_greater(parse_number(args[0], name), parse_number(args[1], name));
  }
  throw FormatError("formula parse: unknown predicate '" + name + "'");
}

}  // namespace

ConceptFormula parse_formula(std::string_view text) {
  auto tokens = split_ws(text);
  if (tokens.empty()) throw FormatError("formula parse: empty formula");

  ConceptFormula f;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool negated = false;
    if (tokens[i] == "NOT") {
      negated = true;
      ++i;
      if (i >= tokens.size()) throw FormatError("formula parse: dangling NOT");
    }
    f.terms.push_back({parse_base(tokens[i]), negated});
    ++i;
    if (i == tokens.size()) break;
    if (tokens[i] == "AND")
      f.ops.push_back(Connective::And);
    else if (tokens[i] == "OR")
      f.ops.push_back(Connective::Or);
    else
      throw FormatError("formula parse: expected AND/OR, got '" + tokens[i] + "'");
    ++i;
    if (i == tokens.size()) throw FormatError("formula parse: trailing connective");
  }
  return f;
}

Task task_from_name(const std::string& name) {
  if (name == "MUTAG") return Task::Mutag;
  if (name == "PROTEINS") return Task::Proteins;
  if (name == "IMDB-B" || name == "IMDB-BINARY") return Task::ImdbB;
  if (name == "REDDIT-B" || name == "REDDIT-BINARY") return Task::RedditB;
  if (name == "synthetic-degree") return Task::SyntheticDegree;
  throw ConfigError("unknown task: " + name);
}

std::string task_name(Task task) {
  switch (task) {
    case Task::Mutag: return "MUTAG";
    case Task::Proteins: return "PROTEINS";
    case Task::ImdbB: return "IMDB-B";
    case Task::RedditB: return "REDDIT-B";
    case Task::SyntheticDegree: return "synthetic-degree";
  }
  throw Error("unreachable task");
}

std::vector<BaseConcept> base_vocabulary(Task task) {
  std::vector<BaseConcept> v;
  switch (task) {
    case Task::Mutag: {
      for (const char* l : {"C", "N", "O", "Cl", "Br", "I", "F"}) v.push_back(is_label(l));
      for (const char* l : {"C", "N", "O", "Cl", "Br", "I", "F"}) v.push_back(next_to({l}));
      v.push_back(next_to({"C", "C"}));
      v.push_back(next_to({"C", "C", "C"}));
      v.push_back(next_to({"N", "N"}));
      v.push_back(next_to({"N", "N", "N"}));
      v.push_back(next_to({"O", "O"}));
      v.push_back(next_to({"O", "O", "O"}));
      for (int x = 1; x <= 4; ++x) v.push_back(degree_is(x));
      for (int x = 1; x <= 3; ++x) v.push_back(nb_degree_is(x));
      break;
    }
    case Task::Proteins: {
      for (const char* l : {"A", "B", "C"}) v.push_back(is_label(l));
      for (const char* l : {"A", "B"}) {
        v.push_back(next_to({l}));
        v.push_back(next_to({l, l}));
        v.push_back(next_to({l, l, l}));
      }
      v.push_back(next_to({"C"}));
      v.push_back(next_to({"C", "C"}));
      v.push_back(next_to({"C", "C", "C"}));
      v.push_back(next_to({"C", "C", "C", "C"}));
      v.push_back(next_to({"C", "C", "C", "C", "C"}));
      for (const char* l : {"A", "B", "C"}) {
        v.push_back(nb_next_to({l}));
        v.push_back(nb_next_to({l, l}));
        v.push_back(nb_next_to({l, l, l}));
      }
      break;
    }
    case Task::ImdbB: {
      for (int x = 1; x <= 99; x += 2) v.push_back(degree_greater(x));
      for (int x : {10, 30})
        for (int y = 1; y <= 5; ++y) v.push_back(nb_degree_greater(x, y));
      break;
    }
    case Task::RedditB: {
      for (int x = 1; x <= 99; x += 3) v.push_back(degree_greater(x));
      for (int x : {5, 10, 30})
        for (int y = 1; y <= 2; ++y) v.push_back(nb_degree_greater(x, y));
      for (int y : {1, 2, 3, 4, 10}) v.push_back(nb_degree_equal(1, y));
      break;
    }
    case Task::SyntheticDegree: {
      for (int x = 1; x <= 12; ++x) v.push_back(degree_greater(x));
      for (int x = 1; x <= 12; ++x) v.push_back(degree_is(x));
      break;
    }
  }
  return v;
}

}  // namespace graphdissect
