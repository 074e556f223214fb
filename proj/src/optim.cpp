#include "unirep/optim.hpp"

#include <cmath>

namespace unirep {

void TrainingBatch::validate() const {
  const auto b = weights.size();
  if (b < 1) throw DataError("training batch is empty");
  if (static_cast<Eigen::Index>(head_tokens.size()) != b ||
      static_cast<Eigen::Index>(head_keys.size()) != b ||
      static_cast<Eigen::Index>(tail_keys.size()) != b) {
    throw DataError("training batch arrays are misaligned");
  }
  if (task == TaskTag::TermSnp) {
    if (static_cast<Eigen::Index>(tail_snp_indices.size()) != b) {
      throw DataError("TERM_SNP batch needs one SNP index per pair");
    }
  } else if (static_cast<Eigen::Index>(tail_tokens.size()) != b) {
    throw DataError("text batch needs one tail token sequence per pair");
  }
}

namespace {

// Encodes both sides; caches are filled only when backprop will follow.
ObjectiveBatch encode_batch(const ModelState& model, const TrainingBatch& batch,
                            std::vector<EncoderCache>* head_caches,
                            std::vector<EncoderCache>* tail_caches) {
  batch.validate();
  const Eigen::Index b = batch.size();
  ObjectiveBatch ob;
  ob.heads.resize(b, model.cfg.d);
  ob.tails.resize(b, model.cfg.d);
  ob.weights = batch.weights;
  ob.head_keys = batch.head_keys;
  ob.tail_keys = batch.tail_keys;
  if (head_caches) head_caches->resize(static_cast<std::size_t>(b));
  if (tail_caches && batch.task != TaskTag::TermSnp) {
    tail_caches->resize(static_cast<std::size_t>(b));
  }
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    ob.heads.row(i) = encode_text(model.params.encoder, model.params.proj, batch.head_tokens[ui],
                                  head_caches ? &(*head_caches)[ui] : nullptr)
                          .transpose();
    if (batch.task == TaskTag::TermSnp) {
      ob.tails.row(i) = encode_snp(model.params.snp, batch.tail_snp_indices[ui]).transpose();
    } else {
      ob.tails.row(i) = encode_text(model.params.encoder, model.params.proj, batch.tail_tokens[ui],
                                    tail_caches ? &(*tail_caches)[ui] : nullptr)
                            .transpose();
    }
  }
  return ob;
}

}  // namespace

double batch_loss(const ModelState& model, const TrainingBatch& batch, LossDirection direction) {
  ObjectiveBatch ob = encode_batch(model, batch, nullptr, nullptr);
  return infonce_weighted(ob, model.params.temp, direction).loss;
}

double backward(const ModelState& model, const TrainingBatch& batch, GradientSet& grads,
                LossDirection direction) {
  std::vector<EncoderCache> head_caches;
  std::vector<EncoderCache> tail_caches;
  ObjectiveBatch ob = encode_batch(model, batch, &head_caches, &tail_caches);
  InfoNceGrads og = infonce_backward(ob, model.params.temp, direction);

  const Eigen::Index b = batch.size();
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Vector d_head = og.d_heads.row(i).transpose();
    encode_text_backward(model.params.encoder, model.params.proj, batch.head_tokens[ui],
                         head_caches[ui], d_head, grads.encoder, grads.proj);
  }
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (batch.task == TaskTag::TermSnp) {
      grads.snp_rows.row(batch.tail_snp_indices[ui]) += og.d_tails.row(i);
    } else {
      Vector d_tail = og.d_tails.row(i).transpose();
      encode_text_backward(model.params.encoder, model.params.proj, batch.tail_tokens[ui],
                           tail_caches[ui], d_tail, grads.encoder, grads.proj);
    }
  }
  grads.log_inv_tau += og.d_log_inv_tau;

  for (const auto& view : grad_views(grads)) {
    for (Eigen::Index i = 0; i < view.size; ++i) {
      if (!std::isfinite(view.data[i])) {
        throw NumericError("non-finite gradient in parameter group " + view.name);
      }
    }
  }
  return og.loss;
}

AdamState AdamState::init(ModelParams& params) {
  AdamState state;
  for (const auto& view : param_views(params)) {
    state.m.emplace_back(static_cast<std::size_t>(view.size), 0.0);
    state.v.emplace_back(static_cast<std::size_t>(view.size), 0.0);
  }
  return state;
}

void adam_update_array(double* value, const double* grad, double* m, double* v,
                       Eigen::Index n, long step, double lr, const AdamConfig& cfg) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    value[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * value[i]);
  }
}

void adam_step(ModelParams& params, GradientSet& grads, AdamState& state, const AdamConfig& cfg) {
  auto views = param_views(params);
  auto gviews = grad_views(grads);
  if (views.size() != gviews.size() || views.size() != state.m.size()) {
    throw ConfigError("optimizer state does not match the parameter layout");
  }
  ++state.step;
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (views[k].size != gviews[k].size) {
      throw ConfigError("gradient shape mismatch in " + views[k].name);
    }
    const double lr = views[k].group == LrGroup::SnpTable ? cfg.lr_snp : cfg.lr_lm;
    adam_update_array(views[k].data, gviews[k].data, state.m[k].data(), state.v[k].data(),
                      views[k].size, state.step, lr, cfg);
  }
  params.temp = clamp_temperature(params.temp);
  snap_params(params);
}

double finite_diff_views(const std::function<double()>& loss,
                         std::span<const ParamView> views,
                         std::span<const ParamView> grad_data, double step) {
  if (views.size() != grad_data.size()) {
    throw ConfigError("finite-difference views are misaligned");
  }
  // Per parameter group: ||analytic - numeric||_inf over the group,
  // relative to max(||analytic||_inf, ||numeric||_inf, 1e-8). A per-scalar
  // quotient would drown near-null coordinates in O(step^2) truncation
  // noise and report spurious mismatches.
  double max_rel = 0.0;
  for (std::size_t k = 0; k < views.size(); ++k) {
    double diff_norm = 0.0;
    double analytic_norm = 0.0;
    double numeric_norm = 0.0;
    for (Eigen::Index i = 0; i < views[k].size; ++i) {
      double& theta = views[k].data[i];
      const double saved = theta;
      theta = saved + step;
      const double plus = loss();
      theta = saved - step;
      const double minus = loss();
      theta = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = grad_data[k].data[i];
      diff_norm = std::max(diff_norm, std::abs(analytic - numeric));
      analytic_norm = std::max(analytic_norm, std::abs(analytic));
      numeric_norm = std::max(numeric_norm, std::abs(numeric));
    }
    if (views[k].size == 0) continue;
    const double denom = std::max({analytic_norm, numeric_norm, 1e-8});
    max_rel = std::max(max_rel, diff_norm / denom);
  }
  return max_rel;
}

double finite_diff_check(ModelState& model, const TrainingBatch& batch, double step,
                         LossDirection direction) {
  GradientSet grads = zero_gradients(model);
  backward(model, batch, grads, direction);
  auto views = param_views(model.params);
  auto gviews = grad_views(grads);
  auto loss = [&]() { return batch_loss(model, batch, direction); };
  return finite_diff_views(loss, views, gviews, step);
}

}  // namespace unirep
