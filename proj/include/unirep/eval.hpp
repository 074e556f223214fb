#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "unirep/model.hpp"

namespace unirep {

double cosine(const Vector& u, const Vector& v);  // throws on zero vectors

// Mann-Whitney statistic: P(pos > neg) + 0.5 * P(tie).
double auc(std::span<const double> positives, std::span<const double> negatives);

// Caches text embeddings; evaluation pools reuse concepts heavily.
class Embedder {
 public:
  explicit Embedder(const ModelState& model) : model_(&model) {}

  const Vector& text(const std::string& normalized);
  Vector snp(int index) const { return model_->embed_snp(index); }
  const ModelState& model() const { return *model_; }

 private:
  const ModelState* model_;
  std::map<std::string, Vector> cache_;
};

struct EvalPair {
  std::string head;  // normalized text
  bool tail_is_snp = true;
  int tail_snp = -1;
  std::string tail_text;
  double weight = 1.0;

  std::string tail_key() const;
  static EvalPair from_weighted(const WeightedPair& pair);
};

struct PoolItem {
  bool is_snp = true;
  int snp_index = -1;
  std::string text;

  std::string key() const;
  static PoolItem snp(int index) { return PoolItem{true, index, {}}; }
  static PoolItem term(std::string t) { return PoolItem{false, -1, std::move(t)}; }
};

// (head text, tail key) pairs that must never be sampled as negatives.
using KnownPositives = std::set<std::pair<std::string, std::string>>;

KnownPositives known_from_pairs(std::span<const EvalPair> pairs);

enum class AnchorSide { Head, Tail };

struct RelatedEvalConfig {
  AnchorSide anchor = AnchorSide::Head;
  int k_neg = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
};

struct EvalReport {
  std::string metric;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::string config;

  static EvalReport from_values(std::string metric, std::vector<double> per_seed,
                                std::string config);
  void write_tsv(const std::filesystem::path& path) const;
};

// Anchored-negative AUC: per positive, the anchor side is fixed and the
// other side is drawn uniformly from the pool minus known positives (and
// minus the pair's own member). Cosine scores, AUC per seed, mean +- std.
// `head_transform` substitutes anchor surface forms at embedding time only;
// concept identity (and its exclusions) stays with the original text.
EvalReport eval_related(Embedder& embedder, std::span<const EvalPair> positives,
                        std::span<const PoolItem> pool, const KnownPositives& known,
                        const RelatedEvalConfig& config,
                        const std::function<std::string(const std::string&)>& head_transform = {});

struct GapTriple {
  std::string trait;
  int snp_a = -1;
  int snp_b = -1;
  double w_a = 0.0;
  double w_b = 0.0;
};

struct GapBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> accuracy;  // absent when the bin is empty
};

std::vector<double> default_gap_edges();

// Correct iff sign(cos(t, a) - cos(t, b)) == sign(w_a - w_b), binned by
// |w_a - w_b| over `edges` (half-open [lo, hi) bins; last bin open-ended).
std::vector<GapBin> gap_ranking(Embedder& embedder, std::span<const GapTriple> triples,
                                std::span<const double> edges);

// All same-anchor pairs of TERM_SNP positives with distinct weights.
std::vector<GapTriple> make_gap_triples(std::span<const WeightedPair> pairs);

struct SwapReports {
  EvalReport original;
  EvalReport swapped;
};

// Runs eval_related twice with identical seeds; the second pass replaces
// every head phrase through `synonym_map` (identity where unmapped).
SwapReports synonym_swap_eval(Embedder& embedder, std::span<const EvalPair> positives,
                              std::span<const PoolItem> pool, const KnownPositives& known,
                              const RelatedEvalConfig& config,
                              const std::map<std::string, std::string>& synonym_map);

struct Neighbor {
  std::string label;
  double cosine = 0.0;
};

std::vector<Neighbor> nearest(Embedder& embedder, const Vector& query, int k,
                              std::span<const PoolItem> pool);

// Principal-component projection to 2D (rows centered first). Requires
// n >= 3 rows. Axis signs are fixed deterministically.
Matrix project_2d(const Matrix& embeddings);

void write_projection(const std::filesystem::path& path, std::span<const std::string> labels,
                      const Matrix& coords);

}  // namespace unirep
