#pragma once

#include <cstdint>
#include <span>

#include "unirep/common.hpp"
#include "unirep/synthetic.hpp"

namespace unirep {

enum class BaselineKind { TransE, DistMult };

BaselineKind baseline_kind_from_string(std::string_view s);
std::string_view to_string(BaselineKind kind);

struct BaselineParams {
  Matrix entities;   // [n_entities x d]
  Matrix relations;  // [n_relations x d]
  BaselineKind kind = BaselineKind::DistMult;
};

// TransE: -||e_h + e_r - e_t||_2; DistMult: sum_k e_h[k] * e_r[k] * e_t[k].
// Higher means more related.
double baseline_score(const BaselineParams& params, int head, int relation, int tail);

double margin_ranking_loss(double pos_score, double neg_score, double margin);

struct BaselineConfig {
  BaselineKind kind = BaselineKind::DistMult;
  int d = 32;
  int epochs = 200;
  int batch_size = 64;
  double lr = 1e-2;
  double margin = 1.0;
  std::uint64_t seed = 1;
};

// Margin ranking over uniformly corrupted heads/tails (one negative per
// positive per step), Adam updates shared with the main optimizer. TransE
// entity rows are re-normalized to unit length after each update.
BaselineParams train_baseline(const BaselineConfig& config, std::span<const IdTriple> triples,
                              int n_entities, int n_relations);

}  // namespace unirep
