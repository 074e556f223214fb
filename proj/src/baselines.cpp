#include "unirep/baselines.hpp"

#include <cmath>
#include <set>

#include "unirep/optim.hpp"
#include "unirep/rng.hpp"

namespace unirep {

BaselineKind baseline_kind_from_string(std::string_view s) {
  if (s == "transe") return BaselineKind::TransE;
  if (s == "distmult") return BaselineKind::DistMult;
  throw ConfigError("unknown baseline kind: " + std::string(s));
}

std::string_view to_string(BaselineKind kind) {
  return kind == BaselineKind::TransE ? "transe" : "distmult";
}

double baseline_score(const BaselineParams& params, int head, int relation, int tail) {
  const auto n = params.entities.rows();
  if (head < 0 || head >= n || tail < 0 || tail >= n || relation < 0 ||
      relation >= params.relations.rows()) {
    throw DataError("baseline score index out of range");
  }
  if (params.kind == BaselineKind::TransE) {
    return -(params.entities.row(head) + params.relations.row(relation) - params.entities.row(tail))
                .norm();
  }
  return params.entities.row(head)
      .cwiseProduct(params.relations.row(relation))
      .cwiseProduct(params.entities.row(tail))
      .sum();
}

double margin_ranking_loss(double pos_score, double neg_score, double margin) {
  return std::max(0.0, margin - (pos_score - neg_score));
}

namespace {

void renormalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) m.row(i) /= norm;
  }
}

// Accumulates d(score)/d(params) scaled by `coef` into the gradient arrays.
void accumulate_score_grad(const BaselineParams& params, int h, int r, int t, double coef,
                           Matrix& d_entities, Matrix& d_relations) {
  if (params.kind == BaselineKind::TransE) {
    Eigen::RowVectorXd diff =
        params.entities.row(h) + params.relations.row(r) - params.entities.row(t);
    const double norm = diff.norm();
    if (norm < 1e-12) return;  // score gradient vanishes at the exact translation
    Eigen::RowVectorXd unit = diff / norm;
    d_entities.row(h) += coef * -unit;
    d_relations.row(r) += coef * -unit;
    d_entities.row(t) += coef * unit;
  } else {
    d_entities.row(h) +=
        coef * params.relations.row(r).cwiseProduct(params.entities.row(t));
    d_relations.row(r) +=
        coef * params.entities.row(h).cwiseProduct(params.entities.row(t));
    d_entities.row(t) +=
        coef * params.entities.row(h).cwiseProduct(params.relations.row(r));
  }
}

}  // namespace

BaselineParams train_baseline(const BaselineConfig& config, std::span<const IdTriple> triples,
                              int n_entities, int n_relations) {
  if (triples.empty()) throw ConfigError("baseline training needs at least one triple");
  if (n_entities < 2 || n_relations < 1) throw ConfigError("baseline needs >= 2 entities and >= 1 relation");
  if (config.d < 1 || config.epochs < 1 || config.batch_size < 1 || !(config.lr > 0.0)) {
    throw ConfigError("invalid baseline hyperparameters");
  }
  for (const auto& t : triples) {
    if (t.head < 0 || t.head >= n_entities || t.tail < 0 || t.tail >= n_entities ||
        t.relation < 0 || t.relation >= n_relations) {
      throw DataError("baseline triple index out of range");
    }
  }

  Rng rng(derive_seed(config.seed, fnv1a64("baseline")));
  BaselineParams params;
  params.kind = config.kind;
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.d));
  params.entities.resize(n_entities, config.d);
  params.relations.resize(n_relations, config.d);
  for (Eigen::Index i = 0; i < params.entities.rows(); ++i) {
    for (Eigen::Index j = 0; j < params.entities.cols(); ++j) {
      params.entities(i, j) = rng.uniform(-bound, bound);
    }
  }
  for (Eigen::Index i = 0; i < params.relations.rows(); ++i) {
    for (Eigen::Index j = 0; j < params.relations.cols(); ++j) {
      params.relations(i, j) = rng.uniform(-bound, bound);
    }
  }
  if (config.kind == BaselineKind::TransE) renormalize_rows(params.entities);

  std::set<std::tuple<int, int, int>> known;
  for (const auto& t : triples) known.emplace(t.head, t.relation, t.tail);

  AdamConfig adam_cfg;
  adam_cfg.lr_lm = config.lr;
  std::vector<double> m_e(static_cast<std::size_t>(params.entities.size()), 0.0);
  std::vector<double> v_e(m_e.size(), 0.0);
  std::vector<double> m_r(static_cast<std::size_t>(params.relations.size()), 0.0);
  std::vector<double> v_r(m_r.size(), 0.0);
  long step = 0;

  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Matrix d_entities = Matrix::Zero(n_entities, config.d);
  Matrix d_relations = Matrix::Zero(n_relations, config.d);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      d_entities.setZero();
      d_relations.setZero();
      bool any_active = false;
      for (std::size_t i = start; i < end; ++i) {
        const IdTriple& pos = triples[order[i]];
        // Corrupt one side; avoid manufacturing a known positive.
        IdTriple neg = pos;
        const bool corrupt_head = rng.coin();
        for (int attempt = 0; attempt < 100; ++attempt) {
          const int candidate = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_entities)));
          if (corrupt_head) {
            neg.head = candidate;
          } else {
            neg.tail = candidate;
          }
          if (!known.count({neg.head, neg.relation, neg.tail})) break;
        }
        const double s_pos = baseline_score(params, pos.head, pos.relation, pos.tail);
        const double s_neg = baseline_score(params, neg.head, neg.relation, neg.tail);
        if (margin_ranking_loss(s_pos, s_neg, config.margin) <= 0.0) continue;
        any_active = true;
        accumulate_score_grad(params, pos.head, pos.relation, pos.tail, -1.0, d_entities, d_relations);
        accumulate_score_grad(params, neg.head, neg.relation, neg.tail, 1.0, d_entities, d_relations);
      }
      if (!any_active) continue;
      ++step;
      adam_update_array(params.entities.data(), d_entities.data(), m_e.data(), v_e.data(),
                        params.entities.size(), step, config.lr, adam_cfg);
      adam_update_array(params.relations.data(), d_relations.data(), m_r.data(), v_r.data(),
                        params.relations.size(), step, config.lr, adam_cfg);
      if (config.kind == BaselineKind::TransE) renormalize_rows(params.entities);
    }
  }
  return params;
}

}  // namespace unirep
