#include "graphdissect/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "graphdissect/errors.hpp"
#include "graphdissect/parallel.hpp"
#include "graphdissect/rng.hpp"

namespace graphdissect {

namespace {

// Per-graph agreement given set counts and activation mass. A graph where the
// neuron is silent counts as perfect agreement for an empty mask and total
// disagreement for a nonempty one; with activation present the score is the
// IOU scaled by the captured mass fraction (empty union gives 0).
double pair_score(long long acnt, long long tbcnt, long long inter, double mass, double total) {
  if (!(total > 0.0)) return acnt == 0 ? 1.0 : 0.0;
  long long uni = acnt + tbcnt - inter;
  double iou = uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
  return iou * (mass / total);
}

}  // namespace

ThresholdGrid make_threshold_grid(std::span<const double> activations,
                                  std::span<const double> levels) {
  ThresholdGrid grid;
  grid.levels.assign(levels.begin(), levels.end());
  if (activations.empty()) throw ConfigError("make_threshold_grid: empty activation sample");
  if (grid.levels.empty()) throw ConfigError("make_threshold_grid: empty quantile level list");
  for (double q : grid.levels)
    if (!(q > 0.0 && q < 1.0))
      throw ConfigError("make_threshold_grid: quantile levels must lie in (0, 1)");

  grid.dead = true;
  for (double a : activations)
    if (a > 0.0) {
      grid.dead = false;
      break;
    }

  std::vector<double> sorted(activations.begin(), activations.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  for (double q : grid.levels) {
    auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n) - 1.0));
    idx = std::min(idx, sorted.size() - 1);
    grid.thresholds.push_back(sorted[idx]);
  }
  std::sort(grid.thresholds.begin(), grid.thresholds.end());
  grid.thresholds.erase(std::unique(grid.thresholds.begin(), grid.thresholds.end()),
                        grid.thresholds.end());
  return grid;
}

std::vector<std::uint8_t> apply_threshold(std::span<const double> activations, double tau) {
  if (tau < 0.0) throw ConfigError("apply_threshold: tau must be >= 0");
  std::vector<std::uint8_t> mask(activations.size());
  for (std::size_t i = 0; i < activations.size(); ++i) mask[i] = activations[i] > tau;
  return mask;
}

double scaled_iou(std::span<const std::uint8_t> mask, std::span<const double> activations,
                  double tau) {
  if (mask.size() != activations.size()) throw ConfigError("scaled_iou: length mismatch");
  if (tau < 0.0) throw ConfigError("scaled_iou: tau must be >= 0");
  double total = 0.0;
  for (double b : activations) total += b;
  if (!(total > 0.0))
    throw DeadNeuronError("scaled_iou: zero total activation; route through dead-neuron handling");

  long long acnt = 0, tbcnt = 0, inter = 0;
  double mass = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    bool a = mask[i] != 0;
    bool t = activations[i] > tau;
    acnt += a;
    tbcnt += t;
    if (a && t) {
      ++inter;
      mass += activations[i];
    }
  }
  return pair_score(acnt, tbcnt, inter, mass, total);
}

DissectionContext capture_activations(const ModelParams& params, const GraphDataset& dataset,
                                      std::vector<int> graph_ids, int layer, int threads) {
  if (layer < 1 || layer > params.config.num_layers)
    throw ConfigError("capture_activations: layer " + std::to_string(layer) +
                      " out of range [1, " + std::to_string(params.config.num_layers) + "]");
  if (graph_ids.empty()) throw ConfigError("capture_activations: empty graph list");

  DissectionContext ctx;
  ctx.dataset = &dataset;
  ctx.graph_ids = std::move(graph_ids);
  ctx.layer = layer;
  ctx.index.offsets.push_back(0);
  int total = 0;
  for (int id : ctx.graph_ids) {
    total += dataset.graphs.at(id).node_count;
    ctx.index.offsets.push_back(total);
  }
  ctx.index.index_vector.resize(total);
  for (int pos = 0; pos < ctx.index.graph_count(); ++pos) {
    auto [lo, hi] = ctx.index.node_range(pos);
    for (int i = lo; i < hi; ++i) ctx.index.index_vector[i] = pos;
  }

  ctx.acts.resize(params.config.hidden_dim, total);
  const int n = static_cast<int>(ctx.graph_ids.size());
  parallel_for(n, threads, [&](int pos) {
    ActivationRecord rec =
        forward_with_activations(params, dataset.graphs[ctx.graph_ids[pos]], dataset);
    auto [lo, hi] = ctx.index.node_range(pos);
    ctx.acts.block(0, lo, ctx.acts.rows(), hi - lo) = rec.layer_acts[layer];
  });
  return ctx;
}

ConceptMask concat_formula_mask(const ConceptFormula& formula, const DissectionContext& ctx) {
  ConceptMask mask;
  mask.reserve(ctx.index.total_nodes());
  for (int pos = 0; pos < ctx.index.graph_count(); ++pos) {
    ConceptMask part = eval_formula(formula, ctx.graph(pos), ctx.dataset->label_alphabet);
    mask.insert(mask.end(), part.begin(), part.end());
  }
  return mask;
}

namespace {

std::vector<double> neuron_row(const DissectionContext& ctx, int neuron) {
  if (neuron < 0 || neuron >= ctx.acts.rows())
    throw ConfigError("neuron index out of range: " + std::to_string(neuron));
  std::vector<double> h(ctx.acts.cols());
  for (Eigen::Index j = 0; j < ctx.acts.cols(); ++j) h[j] = ctx.acts(neuron, j);
  return h;
}

// Mean-over-graphs score at one threshold, per-graph slices (naive route).
double mean_score_at_tau(const ConceptMask& mask, std::span<const double> h,
                         const BatchIndex& index, double tau) {
  double sum = 0.0;
  for (int g = 0; g < index.graph_count(); ++g) {
    auto [lo, hi] = index.node_range(g);
    double total = 0.0;
    long long acnt = 0;
    for (int i = lo; i < hi; ++i) {
      total += h[i];
      acnt += mask[i] != 0;
    }
    if (!(total > 0.0)) {
      sum += acnt == 0 ? 1.0 : 0.0;
      continue;
    }
    sum += scaled_iou(std::span<const std::uint8_t>(mask.data() + lo, hi - lo),
                      std::span<const double>(h.data() + lo, hi - lo), tau);
  }
  return sum / static_cast<double>(index.graph_count());
}

std::pair<double, double> best_over_grid_naive(const ConceptMask& mask, std::span<const double> h,
                                               const BatchIndex& index,
                                               const ThresholdGrid& grid) {
  double best = -std::numeric_limits<double>::infinity();
  double best_tau = 0.0;
  for (double tau : grid.thresholds) {
    double s = mean_score_at_tau(mask, h, index, tau);
    if (s > best) {
      best = s;
      best_tau = tau;
    }
  }
  return {best, best_tau};
}

}  // namespace

ScoreEntry score_concept(const ConceptFormula& formula, const DissectionContext& ctx, int neuron,
                         const ThresholdGrid& grid) {
  if (grid.dead) throw DeadNeuronError("score_concept: neuron " + std::to_string(neuron) +
                                       " has no positive activation");
  std::vector<double> h = neuron_row(ctx, neuron);
  ConceptMask mask = concat_formula_mask(formula, ctx);
  auto [score, tau] = best_over_grid_naive(mask, h, ctx.index, grid);
  return {formula, score, tau};
}

std::vector<double> segment_sum(std::span<const double> x, const BatchIndex& index) {
  if (static_cast<int>(x.size()) != index.total_nodes())
    throw ConfigError("segment_sum: length does not match index");
  std::vector<double> out(index.graph_count(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[index.index_vector[i]] += x[i];
  return out;
}

CompareResult compare_vectorized(std::span<const double> activations, const BatchIndex& index,
                                 const std::vector<ConceptMask>& formula_masks,
                                 std::span<const double> taus) {
  const int n = index.total_nodes();
  const int b = index.graph_count();
  if (static_cast<int>(activations.size()) != n)
    throw ConfigError("compare_vectorized: activation length does not match index");
  for (const auto& m : formula_masks)
    if (static_cast<int>(m.size()) != n)
      throw ConfigError("compare_vectorized: mask length does not match index");

  // sigma(b): per-graph activation totals
  std::vector<double> total = segment_sum(activations, index);

  // thresholded activations and their per-graph counts, per tau
  std::vector<std::vector<std::uint8_t>> tb(taus.size());
  std::vector<std::vector<long long>> tbcnt(taus.size());
  for (std::size_t t = 0; t < taus.size(); ++t) {
    tb[t] = apply_threshold(activations, taus[t]);
    tbcnt[t].assign(b, 0);
    for (int i = 0; i < n; ++i) tbcnt[t][index.index_vector[i]] += tb[t][i];
  }

  CompareResult out;
  out.scores.resize(formula_masks.size());
  out.thresholds.resize(formula_masks.size());
  std::vector<long long> acnt(b), inter(b);
  std::vector<double> mass(b);
  for (std::size_t f = 0; f < formula_masks.size(); ++f) {
    const ConceptMask& a = formula_masks[f];
    std::fill(acnt.begin(), acnt.end(), 0);
    for (int i = 0; i < n; ++i) acnt[index.index_vector[i]] += a[i];

    double best = -std::numeric_limits<double>::infinity();
    double best_tau = 0.0;
    for (std::size_t t = 0; t < taus.size(); ++t) {
      std::fill(inter.begin(), inter.end(), 0);
      std::fill(mass.begin(), mass.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        if (a[i] && tb[t][i]) {
          int g = index.index_vector[i];
          ++inter[g];
          mass[g] += activations[i];
        }
      }
      double sum = 0.0;
      for (int g = 0; g < b; ++g)
        sum += pair_score(acnt[g], tbcnt[t][g], inter[g], mass[g], total[g]);
      double mean = sum / static_cast<double>(b);
      if (mean > best) {
        best = mean;
        best_tau = taus[t];
      }
    }
    out.scores[f] = best;
    out.thresholds[f] = best_tau;
  }
  return out;
}

namespace {

struct Candidate {
  ConceptFormula formula;
  ConceptMask mask;
  std::string rendered;
  double score = 0.0;
  double threshold = 0.0;
};

// Global tie-break order: higher score, then shorter formula, then
// lexicographic render.
bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.formula.size() != b.formula.size()) return a.formula.size() < b.formula.size();
  return a.rendered < b.rendered;
}

struct SignedTerm {
  BaseConcept base;
  bool negated;
  ConceptMask mask;
};

std::vector<SignedTerm> build_signed_terms(const DissectionContext& ctx,
                                           const std::vector<BaseConcept>& atoms) {
  std::vector<SignedTerm> terms;
  terms.reserve(atoms.size() * 2);
  for (const auto& atom : atoms) {
    ConceptMask positive;
    positive.reserve(ctx.index.total_nodes());
    for (int pos = 0; pos < ctx.index.graph_count(); ++pos) {
      ConceptMask part = eval_base(atom, ctx.graph(pos), ctx.dataset->label_alphabet);
      positive.insert(positive.end(), part.begin(), part.end());
    }
    ConceptMask negative(positive.size());
    for (std::size_t i = 0; i < positive.size(); ++i) negative[i] = !positive[i];
    terms.push_back({atom, false, std::move(positive)});
    terms.push_back({atom, true, std::move(negative)});
  }
  return terms;
}

ConceptMask combine_masks(const ConceptMask& a, const ConceptMask& b, Connective op) {
  ConceptMask out(a.size());
  if (op == Connective::And)
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  else
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] || b[i];
  return out;
}

// Probe node ranges for semantic dedup: a seeded subsample of batch positions.
std::vector<std::pair<int, int>> probe_ranges(const BatchIndex& index, int probe_graphs,
                                              std::uint64_t seed) {
  int b = index.graph_count();
  std::vector<int> positions(b);
  for (int i = 0; i < b; ++i) positions[i] = i;
  if (probe_graphs > 0 && probe_graphs < b) {
    Rng rng = substream(seed, "probe-subsample");
    rng.shuffle(positions);
    positions.resize(probe_graphs);
    std::sort(positions.begin(), positions.end());
  }
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(positions.size());
  for (int pos : positions) ranges.push_back(index.node_range(pos));
  return ranges;
}

std::string probe_key(const ConceptMask& mask, const std::vector<std::pair<int, int>>& ranges) {
  std::string key;
  std::uint8_t cur = 0;
  int bit = 0;
  for (auto [lo, hi] : ranges) {
    for (int i = lo; i < hi; ++i) {
      cur = static_cast<std::uint8_t>(cur | ((mask[i] ? 1 : 0) << bit));
      if (++bit == 8) {
        key.push_back(static_cast<char>(cur));
        cur = 0;
        bit = 0;
      }
    }
  }
  if (bit) key.push_back(static_cast<char>(cur));
  return key;
}

// Sorts by tie-break order, drops semantic duplicates (same probe key), keeps
// at most `width`.
void prune(std::vector<Candidate>& cands, int width,
           const std::vector<std::pair<int, int>>& ranges) {
  std::sort(cands.begin(), cands.end(), better);
  std::vector<Candidate> kept;
  std::unordered_set<std::string> seen;
  for (auto& c : cands) {
    if (static_cast<int>(kept.size()) >= width) break;
    if (seen.insert(probe_key(c.mask, ranges)).second) kept.push_back(std::move(c));
  }
  cands = std::move(kept);
}

}  // namespace

NeuronConceptMap beam_search(const DissectionContext& ctx, const std::vector<BaseConcept>& atoms,
                             const SearchOptions& options) {
  if (atoms.empty()) throw ConfigError("beam_search: empty atom set");
  if (options.depth < 1 || options.width < 1)
    throw ConfigError("beam_search: depth and width must be >= 1");

  const auto signed_terms = build_signed_terms(ctx, atoms);
  const auto ranges =
      probe_ranges(ctx.index, std::min<int>(options.probe_graphs, ctx.index.graph_count()),
                   options.seed);

  const int num_neurons = static_cast<int>(ctx.acts.rows());
  NeuronConceptMap map;
  map.neurons.resize(num_neurons);

  parallel_for(num_neurons, options.threads, [&](int k) {
    NeuronEntry& result = map.neurons[k];
    result.neuron = k;
    std::vector<double> h = neuron_row(ctx, k);
    ThresholdGrid grid = make_threshold_grid(h, options.quantile_levels);
    if (grid.dead) {
      result.dead = true;
      return;
    }

    std::vector<Candidate> beam;
    std::vector<Candidate> accumulated;
    std::vector<Candidate> cands;
    for (const auto& term : signed_terms) {
      Candidate c;
      c.formula = single_term(term.base, term.negated);
      c.mask = term.mask;
      c.rendered = render(c.formula);
      cands.push_back(std::move(c));
    }

    for (int iter = 1; iter <= options.depth; ++iter) {
      std::vector<ConceptMask> masks;
      masks.reserve(cands.size());
      for (const auto& c : cands) masks.push_back(c.mask);
      CompareResult scored = compare_vectorized(h, ctx.index, masks, grid.thresholds);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        cands[i].score = scored.scores[i];
        cands[i].threshold = scored.thresholds[i];
      }
      prune(cands, options.width, ranges);
      beam = cands;

      accumulated.insert(accumulated.end(), beam.begin(), beam.end());
      prune(accumulated, options.width, ranges);

      if (iter == options.depth) break;
      cands.clear();
      for (const auto& parent : beam) {
        for (Connective op : {Connective::And, Connective::Or}) {
          for (const auto& term : signed_terms) {
            Candidate c;
            c.formula = extend(parent.formula, op, term.base, term.negated);
            c.mask = combine_masks(parent.mask, term.mask, op);
            c.rendered = render(c.formula);
            cands.push_back(std::move(c));
          }
        }
      }
    }

    for (auto& c : accumulated) result.entries.push_back({c.formula, c.score, c.threshold});
  });
  return map;
}

std::size_t formula_space_size(std::size_t atom_count, int max_len) {
  const std::size_t s = 2 * atom_count;
  std::size_t total = 0, level = s;
  for (int len = 1; len <= max_len; ++len) {
    total += level;
    if (level > (std::numeric_limits<std::size_t>::max() >> 2) / std::max<std::size_t>(s, 1))
      return std::numeric_limits<std::size_t>::max();
    level *= 2 * s;
  }
  return total;
}

ScoreEntry exhaustive_search(const DissectionContext& ctx, int neuron,
                             const std::vector<BaseConcept>& atoms, int max_len,
                             const SearchOptions& options, std::size_t formula_cap) {
  if (max_len < 1 || max_len > 3)
    throw ConfigError("exhaustive_search: max_len must be in [1, 3]");
  if (atoms.empty()) throw ConfigError("exhaustive_search: empty atom set");
  std::size_t space = formula_space_size(atoms.size(), max_len);
  if (space > formula_cap)
    throw SearchSpaceError("exhaustive_search: formula space of " + std::to_string(space) +
                           " exceeds cap " + std::to_string(formula_cap));

  std::vector<double> h = neuron_row(ctx, neuron);
  ThresholdGrid grid = make_threshold_grid(h, options.quantile_levels);
  if (grid.dead)
    throw DeadNeuronError("exhaustive_search: neuron " + std::to_string(neuron) + " is dead");

  const auto signed_terms = build_signed_terms(ctx, atoms);
  Candidate best;
  bool have_best = false;

  // Depth-first over left-fold formulas; the fold makes prefix masks reusable.
  auto visit = [&](const ConceptFormula& formula, const ConceptMask& mask, auto&& self) -> void {
    Candidate c;
    c.formula = formula;
    c.rendered = render(formula);
    auto [score, tau] = best_over_grid_naive(mask, h, ctx.index, grid);
    c.score = score;
    c.threshold = tau;
    if (!have_best || better(c, best)) {
      best = c;
      best.mask = mask;
      have_best = true;
    }
    if (static_cast<int>(formula.size()) >= max_len) return;
    for (Connective op : {Connective::And, Connective::Or}) {
      for (const auto& term : signed_terms) {
        self(extend(formula, op, term.base, term.negated), combine_masks(mask, term.mask, op),
             self);
      }
    }
  };
  for (const auto& term : signed_terms)
    visit(single_term(term.base, term.negated), term.mask, visit);

  return {best.formula, best.score, best.threshold};
}

}  // namespace graphdissect
