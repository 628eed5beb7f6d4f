#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphdissect/concepts.hpp"
#include "graphdissect/model.hpp"

namespace graphdissect {

// Quantile-derived binarization thresholds for one neuron. Realized values are
// taken from the neuron's activation sample over the whole dissection set, so
// a mostly-silent neuron realizes tau = 0 at the lower levels (support
// indicator). A neuron with no positive activation anywhere is dead.
struct ThresholdGrid {
  std::vector<double> levels;
  std::vector<double> thresholds;  // unique realized values, nondecreasing
  bool dead = false;
};

ThresholdGrid make_threshold_grid(std::span<const double> activations,
                                  std::span<const double> levels);

// bit i = activations[i] > tau (strict).
std::vector<std::uint8_t> apply_threshold(std::span<const double> activations, double tau);

// The concept/neuron agreement score for one graph: IOU of the concept mask
// against the thresholded activations (0 when the union is empty), scaled by
// the fraction of activation mass captured by their intersection. Requires a
// positive activation total; callers handle silent graphs.
double scaled_iou(std::span<const std::uint8_t> mask, std::span<const double> activations,
                  double tau);

// Activations of one layer over a fixed graph list, concatenated column-wise.
struct DissectionContext {
  const GraphDataset* dataset = nullptr;
  std::vector<int> graph_ids;  // dataset ids in batch order
  BatchIndex index;
  Eigen::MatrixXd acts;  // neurons x total nodes
  int layer = 1;

  const Graph& graph(int pos) const { return dataset->graphs[graph_ids[pos]]; }
};

DissectionContext capture_activations(const ModelParams& params, const GraphDataset& dataset,
                                      std::vector<int> graph_ids, int layer, int threads = 0);

// Concept mask evaluated per graph and concatenated in batch order.
ConceptMask concat_formula_mask(const ConceptFormula& formula, const DissectionContext& ctx);

struct ScoreEntry {
  ConceptFormula formula;
  double score = 0.0;
  double threshold = 0.0;
};

// Naive scoring route: per-graph slices, one scaled_iou per graph, mean over
// graphs, max over the grid (ties resolved to the lowest threshold).
ScoreEntry score_concept(const ConceptFormula& formula, const DissectionContext& ctx, int neuron,
                         const ThresholdGrid& grid);

// Scatter addition keyed by the index vector: out[g] = sum_{i : I_i = g} x_i.
std::vector<double> segment_sum(std::span<const double> x, const BatchIndex& index);

// Same semantics computed with segment sums over the concatenated batch in a
// single pass per (formula, threshold). Matches the naive route exactly.
struct CompareResult {
  std::vector<double> scores;
  std::vector<double> thresholds;
};
CompareResult compare_vectorized(std::span<const double> activations, const BatchIndex& index,
                                 const std::vector<ConceptMask>& formula_masks,
                                 std::span<const double> taus);

struct SearchOptions {
  int depth = 3;
  int width = 10;
  std::vector<double> quantile_levels = {0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99};
  int probe_graphs = 64;  // semantic-dedup subsample size
  std::uint64_t seed = 0;
  int threads = 0;
};

struct NeuronEntry {
  int neuron = 0;
  bool dead = false;
  std::vector<ScoreEntry> entries;  // ranked: score desc, shorter, lexicographic render
};

struct NeuronConceptMap {
  std::vector<NeuronEntry> neurons;

  const NeuronEntry& at(int neuron) const { return neurons.at(neuron); }
};

// Beam search over compositional formulas, one independent beam per neuron.
// Iteration 1 scores every atom and negated atom; later iterations extend each
// kept formula by one signed atom under AND/OR. Candidates are deduplicated by
// their mask over a seeded probe subsample and pruned to the beam width; the
// returned map merges the pruned beams of all iterations.
NeuronConceptMap beam_search(const DissectionContext& ctx, const std::vector<BaseConcept>& atoms,
                             const SearchOptions& options);

// Enumerates every left-fold formula up to max_len and returns the best entry
// under beam tie-breaking. Oracle for beam_search; guarded against blow-up.
ScoreEntry exhaustive_search(const DissectionContext& ctx, int neuron,
                             const std::vector<BaseConcept>& atoms, int max_len,
                             const SearchOptions& options, std::size_t formula_cap = 200000);

// Number of left-fold formulas with 1..max_len terms over `atoms`.
std::size_t formula_space_size(std::size_t atom_count, int max_len);

}  // namespace graphdissect
