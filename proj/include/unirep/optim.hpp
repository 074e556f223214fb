#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "unirep/model.hpp"

namespace unirep {

// One task-homogeneous training batch in token/index form; embeddings are
// produced inside the forward pass.
struct TrainingBatch {
  TaskTag task = TaskTag::TermTerm;
  std::vector<TokenSeq> head_tokens;
  std::vector<TokenSeq> tail_tokens;    // text-tail tasks
  std::vector<int> tail_snp_indices;    // TERM_SNP
  Vector weights;
  std::vector<std::int64_t> head_keys;
  std::vector<std::int64_t> tail_keys;

  Eigen::Index size() const { return weights.size(); }
  void validate() const;
};

// Forward-only loss for the full composition.
double batch_loss(const ModelState& model, const TrainingBatch& batch,
                  LossDirection direction = LossDirection::Symmetric);

// Exact reverse-mode gradients of the composed loss, accumulated into a
// zeroed `grads`. Parameters untouched by the batch's task keep zero
// gradient. Throws NumericError naming the offending parameter group.
double backward(const ModelState& model, const TrainingBatch& batch, GradientSet& grads,
                LossDirection direction = LossDirection::Symmetric);

struct AdamConfig {
  double lr_lm = 1e-3;
  double lr_snp = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled; 0 makes AdamW coincide with Adam
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState init(ModelParams& params);
};

// Bias-corrected AdamW update with per-group learning rates, followed by
// the temperature clamp and the float32 snap.
void adam_step(ModelParams& params, GradientSet& grads, AdamState& state, const AdamConfig& cfg);

// Generic single-array update used by both the model and the baselines.
void adam_update_array(double* value, const double* grad, double* m, double* v,
                       Eigen::Index n, long step, double lr, const AdamConfig& cfg);

// Central finite differences over every coordinate of `views` against the
// analytic gradients in `grad_data` (aligned with views). Relative error
// uses denominator max(|analytic|, |numeric|, 1e-8).
double finite_diff_views(const std::function<double()>& loss,
                         std::span<const ParamView> views,
                         std::span<const ParamView> grad_data, double step);

// Runs backward once, then sweeps every model parameter. Returns the
// maximum relative error.
double finite_diff_check(ModelState& model, const TrainingBatch& batch, double step,
                         LossDirection direction = LossDirection::Symmetric);

}  // namespace unirep
