#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "graphdissect/graph.hpp"

namespace graphdissect {

enum class PredicateKind {
  Is,               // node has label A
  NextTo,           // neighborhood contains all of A1..An (distinct neighbors)
  NbNextTo,         // some neighbor satisfies NextTo(A1..An)
  DegreeIs,         // degree == X
  NbDegreeIs,       // some neighbor has degree == X
  NbDegreeEqual,    // >= X neighbors with degree == Y
  DegreeGreater,    // degree > X
  NbDegreeGreater,  // >= X neighbors with degree > Y
};

struct BaseConcept {
  PredicateKind kind = PredicateKind::Is;
  std::vector<std::string> labels;
  int x = 0;
  int y = 0;

  bool operator==(const BaseConcept&) const = default;
};

BaseConcept is_label(std::string label);
BaseConcept next_to(std::vector<std::string> labels);
BaseConcept nb_next_to(std::vector<std::string> labels);
BaseConcept degree_is(int x);
BaseConcept nb_degree_is(int x);
BaseConcept nb_degree_equal(int x, int y);
BaseConcept degree_greater(int x);
BaseConcept nb_degree_greater(int x, int y);

struct ConceptTerm {
  BaseConcept base;
  bool negated = false;

  bool operator==(const ConceptTerm&) const = default;
};

enum class Connective { And, Or };

// Left-fold chain t1 op1 t2 op2 ... with no operator precedence.
struct ConceptFormula {
  std::vector<ConceptTerm> terms;
  std::vector<Connective> ops;  // size == terms.size() - 1

  std::size_t size() const { return terms.size(); }
  bool operator==(const ConceptFormula&) const = default;
};

ConceptFormula single_term(BaseConcept base, bool negated = false);
ConceptFormula extend(const ConceptFormula& f, Connective op, BaseConcept base, bool negated);

// Boolean node mask, one bit per node.
using ConceptMask = std::vector<std::uint8_t>;

ConceptMask eval_base(const BaseConcept& base, const Graph& graph,
                      const std::vector<std::string>& alphabet);
ConceptMask eval_formula(const ConceptFormula& formula, const Graph& graph,
                         const std::vector<std::string>& alphabet);

std::string render(const BaseConcept& base);
std::string render(const ConceptTerm& term);
std::string render(const ConceptFormula& formula);
ConceptFormula parse_formula(std::string_view text);

enum class Task { Mutag, Proteins, ImdbB, RedditB, SyntheticDegree };

Task task_from_name(const std::string& name);
std::string task_name(Task task);

// The per-task atomic concept sets.
std::vector<BaseConcept> base_vocabulary(Task task);

}  // namespace graphdissect
