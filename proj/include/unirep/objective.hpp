#pragma once

#include <cstdint>
#include <vector>

#include "unirep/common.hpp"

namespace unirep {

// Stores log(1/tau); the trainable CLIP-style temperature.
struct Temperature {
  double log_inv_tau = 0.0;

  static constexpr double kMinInvTau = 1.0;
  static constexpr double kMaxInvTau = 100.0;
  static constexpr double kInitInvTau = 14.3;

  double inv_tau() const { return std::exp(log_inv_tau); }
  double tau() const { return 1.0 / inv_tau(); }

  static Temperature initial() { return Temperature{std::log(kInitInvTau)}; }
};

// Clips so 1/tau stays in [1, 100]; applied after every optimizer step.
Temperature clamp_temperature(Temperature t);

// Aligned contrastive pairs with per-pair weights and identity keys used to
// mask duplicate positives out of softmax denominators.
struct ObjectiveBatch {
  Matrix heads;    // [B x d]
  Matrix tails;    // [B x d]
  Vector weights;  // [B], each in (0, cap]
  std::vector<std::int64_t> head_keys;
  std::vector<std::int64_t> tail_keys;

  Eigen::Index size() const { return heads.rows(); }
  void validate() const;
};

// Symmetric averages the tails-as-negatives and heads-as-negatives
// cross-entropies (the CLIP form); HeadOnly keeps only the direction where
// candidate heads vary against a fixed tail.
enum class LossDirection { Symmetric, HeadOnly };

LossDirection loss_direction_from_string(std::string_view s);
std::string_view to_string(LossDirection d);

double similarity(const Vector& u, const Vector& v);  // inner product

struct InfoNceResult {
  double loss = 0.0;
  Matrix logits;  // [B x B], logits(i, j) = <head_i, tail_j> / tau
};

InfoNceResult infonce_weighted(const ObjectiveBatch& batch, const Temperature& temperature,
                               LossDirection direction = LossDirection::Symmetric);

struct InfoNceGrads {
  double loss = 0.0;
  Matrix d_heads;          // [B x d]
  Matrix d_tails;          // [B x d]
  double d_log_inv_tau = 0.0;
};

InfoNceGrads infonce_backward(const ObjectiveBatch& batch, const Temperature& temperature,
                              LossDirection direction = LossDirection::Symmetric);

}  // namespace unirep
