#include "unirep/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace unirep {

Temperature clamp_temperature(Temperature t) {
  // Bounds are float32-representable so clamped parameters stay exactly
  // storable, and exp(hi) never exceeds the cap.
  static const double lo = std::log(Temperature::kMinInvTau);  // exactly 0
  static const double hi = [] {
    const double h = std::log(Temperature::kMaxInvTau);
    float f = static_cast<float>(h);
    while (static_cast<double>(f) > h) f = std::nextafterf(f, 0.0f);
    return static_cast<double>(f);
  }();
  t.log_inv_tau = std::clamp(t.log_inv_tau, lo, hi);
  return t;
}

LossDirection loss_direction_from_string(std::string_view s) {
  if (s == "symmetric") return LossDirection::Symmetric;
  if (s == "head_only") return LossDirection::HeadOnly;
  throw ConfigError("unknown loss direction: " + std::string(s));
}

std::string_view to_string(LossDirection d) {
  return d == LossDirection::Symmetric ? "symmetric" : "head_only";
}

double similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw DataError("similarity: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
  }
  return u.dot(v);
}

void ObjectiveBatch::validate() const {
  const auto b = heads.rows();
  if (b < 1) throw DataError("contrastive batch must contain at least one pair");
  if (tails.rows() != b || weights.size() != b ||
      static_cast<Eigen::Index>(head_keys.size()) != b ||
      static_cast<Eigen::Index>(tail_keys.size()) != b) {
    throw DataError("contrastive batch rows are not aligned");
  }
  if (heads.cols() != tails.cols()) throw DataError("head/tail embedding dimensions differ");
  for (Eigen::Index i = 0; i < b; ++i) {
    if (!(weights(i) > 0.0)) throw DataError("contrastive batch weight must be positive");
  }
}

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct LossParts {
  Matrix logits;      // z(i, j) = inv_tau * <h_i, t_j>
  Matrix sims;        // <h_i, t_j>
  BoolArray row_ok;   // candidate j allowed in the tails-vary softmax of pair i
  BoolArray col_ok;   // candidate i allowed in the heads-vary softmax of pair j
  Matrix p_row;       // row softmax over allowed tails
  Matrix p_col;       // column softmax over allowed heads
  Vector loss_row;    // -log p_row(i, i)
  Vector loss_col;    // -log p_col(j, j) indexed by pair
  double loss = 0.0;
  double weight_sum = 0.0;
};

LossParts compute_parts(const ObjectiveBatch& batch, const Temperature& temperature,
                        LossDirection direction) {
  batch.validate();
  const Eigen::Index b = batch.size();
  const double inv_tau = temperature.inv_tau();
  if (!std::isfinite(inv_tau)) throw NumericError("temperature is not finite");

  LossParts parts;
  parts.sims.noalias() = batch.heads * batch.tails.transpose();
  parts.logits = parts.sims * inv_tau;

  // Duplicate positives are false negatives; drop them from denominators.
  parts.row_ok = BoolArray::Constant(b, b, true);
  parts.col_ok = BoolArray::Constant(b, b, true);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      if (i == j) continue;
      if (batch.tail_keys[static_cast<std::size_t>(j)] == batch.tail_keys[static_cast<std::size_t>(i)]) {
        parts.row_ok(i, j) = false;
      }
      if (batch.head_keys[static_cast<std::size_t>(i)] == batch.head_keys[static_cast<std::size_t>(j)]) {
        parts.col_ok(i, j) = false;
      }
    }
  }

  parts.p_row = Matrix::Zero(b, b);
  parts.p_col = Matrix::Zero(b, b);
  parts.loss_row.resize(b);
  parts.loss_col.resize(b);

  for (Eigen::Index i = 0; i < b; ++i) {
    double max_z = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b; ++j) {
      if (parts.row_ok(i, j)) max_z = std::max(max_z, parts.logits(i, j));
    }
    if (!std::isfinite(max_z)) throw DataError("contrastive row is fully masked");
    double denom = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (parts.row_ok(i, j)) denom += std::exp(parts.logits(i, j) - max_z);
    }
    for (Eigen::Index j = 0; j < b; ++j) {
      if (parts.row_ok(i, j)) parts.p_row(i, j) = std::exp(parts.logits(i, j) - max_z) / denom;
    }
    parts.loss_row(i) = std::log(denom) + max_z - parts.logits(i, i);
  }
  for (Eigen::Index j = 0; j < b; ++j) {
    double max_z = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < b; ++i) {
      if (parts.col_ok(i, j)) max_z = std::max(max_z, parts.logits(i, j));
    }
    if (!std::isfinite(max_z)) throw DataError("contrastive column is fully masked");
    double denom = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      if (parts.col_ok(i, j)) denom += std::exp(parts.logits(i, j) - max_z);
    }
    for (Eigen::Index i = 0; i < b; ++i) {
      if (parts.col_ok(i, j)) parts.p_col(i, j) = std::exp(parts.logits(i, j) - max_z) / denom;
    }
    parts.loss_col(j) = std::log(denom) + max_z - parts.logits(j, j);
  }

  parts.weight_sum = batch.weights.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double per_pair = direction == LossDirection::Symmetric
                                ? 0.5 * (parts.loss_row(i) + parts.loss_col(i))
                                : parts.loss_col(i);
    acc += batch.weights(i) * per_pair;
  }
  parts.loss = acc / parts.weight_sum;
  if (!std::isfinite(parts.loss)) throw NumericError("contrastive loss is not finite");
  return parts;
}

}  // namespace

InfoNceResult infonce_weighted(const ObjectiveBatch& batch, const Temperature& temperature,
                               LossDirection direction) {
  LossParts parts = compute_parts(batch, temperature, direction);
  return InfoNceResult{parts.loss, std::move(parts.logits)};
}

InfoNceGrads infonce_backward(const ObjectiveBatch& batch, const Temperature& temperature,
                              LossDirection direction) {
  LossParts parts = compute_parts(batch, temperature, direction);
  const Eigen::Index b = batch.size();
  const double inv_tau = temperature.inv_tau();
  const double w_sum = parts.weight_sum;

  Matrix d_z = Matrix::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      double g = 0.0;
      if (direction == LossDirection::Symmetric && parts.row_ok(i, j)) {
        g += 0.5 * batch.weights(i) * (parts.p_row(i, j) - (i == j ? 1.0 : 0.0));
      }
      if (parts.col_ok(i, j)) {
        const double w_dir = direction == LossDirection::Symmetric ? 0.5 * batch.weights(j)
                                                                   : batch.weights(j);
        g += w_dir * (parts.p_col(i, j) - (i == j ? 1.0 : 0.0));
      }
      d_z(i, j) = g / w_sum;
    }
  }

  InfoNceGrads grads;
  grads.loss = parts.loss;
  Matrix d_sims = d_z * inv_tau;
  grads.d_heads.noalias() = d_sims * batch.tails;
  grads.d_tails.noalias() = d_sims.transpose() * batch.heads;
  grads.d_log_inv_tau = inv_tau * d_z.cwiseProduct(parts.sims).sum();
  return grads;
}

}  // namespace unirep
