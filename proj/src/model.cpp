#include "unirep/model.hpp"

#include "unirep/rng.hpp"

namespace unirep {

void ModelConfig::validate() const {
  if (d < 1 || d_model < 1 || n_layers < 1 || n_heads < 1 || ff_dim < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model must be divisible by the head count");
  }
}

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

LinearLayer make_linear(int in, int out, double bound, Rng& rng) {
  LinearLayer l;
  l.W.resize(in, out);
  fill_uniform(l.W, bound, rng);
  l.b = Vector::Zero(out);
  return l;
}

template <typename Encoder, typename Proj>
void collect_views(Encoder& enc, Proj& proj, Matrix& snp_rows, double& log_inv_tau,
                   std::vector<ParamView>& out) {
  auto add = [&out](std::string name, auto& array, LrGroup group) {
    Eigen::Index rows = array.rows();
    Eigen::Index cols = array.cols();
    out.push_back(ParamView{std::move(name), array.data(), array.size(), rows, cols, group});
  };
  add("token_embeddings", enc.token_embeddings, LrGroup::LanguageModel);
  add("positional_embeddings", enc.positional_embeddings, LrGroup::LanguageModel);
  for (std::size_t b = 0; b < enc.blocks.size(); ++b) {
    auto& blk = enc.blocks[b];
    const std::string p = "block" + std::to_string(b) + ".";
    add(p + "q.W", blk.q.W, LrGroup::LanguageModel);
    add(p + "q.b", blk.q.b, LrGroup::LanguageModel);
    add(p + "k.W", blk.k_W, LrGroup::LanguageModel);
    add(p + "v.W", blk.v.W, LrGroup::LanguageModel);
    add(p + "v.b", blk.v.b, LrGroup::LanguageModel);
    add(p + "o.W", blk.o.W, LrGroup::LanguageModel);
    add(p + "o.b", blk.o.b, LrGroup::LanguageModel);
    add(p + "ln1.gamma", blk.ln1.gamma, LrGroup::LanguageModel);
    add(p + "ln1.beta", blk.ln1.beta, LrGroup::LanguageModel);
    add(p + "ff1.W", blk.ff1.W, LrGroup::LanguageModel);
    add(p + "ff1.b", blk.ff1.b, LrGroup::LanguageModel);
    add(p + "ff2.W", blk.ff2.W, LrGroup::LanguageModel);
    add(p + "ff2.b", blk.ff2.b, LrGroup::LanguageModel);
    add(p + "ln2.gamma", blk.ln2.gamma, LrGroup::LanguageModel);
    add(p + "ln2.beta", blk.ln2.beta, LrGroup::LanguageModel);
  }
  add("proj.W", proj.W, LrGroup::LanguageModel);
  add("proj.b", proj.b, LrGroup::LanguageModel);
  add("snp_table", snp_rows, LrGroup::SnpTable);
  out.push_back(ParamView{"log_inv_tau", &log_inv_tau, 1, 1, 1, LrGroup::LanguageModel});
}

}  // namespace

ModelState init_model(const ModelConfig& cfg, const TokenizerConfig& tok,
                      const SnpVocabulary& vocab, std::uint64_t seed) {
  cfg.validate();
  tok.validate();
  Rng rng(derive_seed(seed, fnv1a64("model-init")));

  ModelState model;
  model.cfg = cfg;
  model.tok = tok;

  const double lm_bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  auto& enc = model.params.encoder;
  enc.d_model = cfg.d_model;
  enc.n_heads = cfg.n_heads;
  enc.token_embeddings.resize(tok.hash_vocab_size, cfg.d_model);
  fill_uniform(enc.token_embeddings, lm_bound, rng);
  enc.positional_embeddings.resize(tok.max_len, cfg.d_model);
  fill_uniform(enc.positional_embeddings, lm_bound, rng);
  enc.blocks.resize(static_cast<std::size_t>(cfg.n_layers));
  for (auto& blk : enc.blocks) {
    blk.q = make_linear(cfg.d_model, cfg.d_model, lm_bound, rng);
    blk.k_W.resize(cfg.d_model, cfg.d_model);
    fill_uniform(blk.k_W, lm_bound, rng);
    blk.v = make_linear(cfg.d_model, cfg.d_model, lm_bound, rng);
    blk.o = make_linear(cfg.d_model, cfg.d_model, lm_bound, rng);
    blk.ln1.gamma = Vector::Ones(cfg.d_model);
    blk.ln1.beta = Vector::Zero(cfg.d_model);
    blk.ff1 = make_linear(cfg.d_model, cfg.ff_dim, lm_bound, rng);
    blk.ff2 = make_linear(cfg.ff_dim, cfg.d_model, lm_bound, rng);
    blk.ln2.gamma = Vector::Ones(cfg.d_model);
    blk.ln2.beta = Vector::Zero(cfg.d_model);
  }
  model.params.proj.W.resize(cfg.d, cfg.d_model);
  fill_uniform(model.params.proj.W, lm_bound, rng);
  model.params.proj.b = Vector::Zero(cfg.d);

  model.params.snp.vocab = vocab;
  model.params.snp.rows.resize(vocab.size(), cfg.d);
  fill_uniform(model.params.snp.rows, 1.0 / std::sqrt(static_cast<double>(cfg.d)), rng);

  model.params.temp = Temperature::initial();

  snap_params(model.params);
  return model;
}

std::vector<ParamView> param_views(ModelParams& params) {
  std::vector<ParamView> views;
  collect_views(params.encoder, params.proj, params.snp.rows, params.temp.log_inv_tau, views);
  return views;
}

std::vector<ParamView> grad_views(GradientSet& grads) {
  std::vector<ParamView> views;
  collect_views(grads.encoder, grads.proj, grads.snp_rows, grads.log_inv_tau, views);
  return views;
}

GradientSet zero_gradients(const ModelState& model) {
  GradientSet g;
  const auto& enc = model.params.encoder;
  g.encoder.d_model = enc.d_model;
  g.encoder.n_heads = enc.n_heads;
  g.encoder.token_embeddings = Matrix::Zero(enc.token_embeddings.rows(), enc.token_embeddings.cols());
  g.encoder.positional_embeddings =
      Matrix::Zero(enc.positional_embeddings.rows(), enc.positional_embeddings.cols());
  g.encoder.blocks.resize(enc.blocks.size());
  for (std::size_t b = 0; b < enc.blocks.size(); ++b) {
    const auto& src = enc.blocks[b];
    auto& dst = g.encoder.blocks[b];
    auto zero_linear = [](const LinearLayer& l) {
      return LinearLayer{Matrix::Zero(l.W.rows(), l.W.cols()), Vector::Zero(l.b.size())};
    };
    dst.q = zero_linear(src.q);
    dst.k_W = Matrix::Zero(src.k_W.rows(), src.k_W.cols());
    dst.v = zero_linear(src.v);
    dst.o = zero_linear(src.o);
    dst.ff1 = zero_linear(src.ff1);
    dst.ff2 = zero_linear(src.ff2);
    dst.ln1 = LayerNormParams{Vector::Zero(src.ln1.gamma.size()), Vector::Zero(src.ln1.beta.size())};
    dst.ln2 = LayerNormParams{Vector::Zero(src.ln2.gamma.size()), Vector::Zero(src.ln2.beta.size())};
  }
  g.proj.W = Matrix::Zero(model.params.proj.W.rows(), model.params.proj.W.cols());
  g.proj.b = Vector::Zero(model.params.proj.b.size());
  g.snp_rows = Matrix::Zero(model.params.snp.rows.rows(), model.params.snp.rows.cols());
  g.log_inv_tau = 0.0;
  return g;
}

void set_zero(GradientSet& grads) {
  for (auto& view : grad_views(grads)) {
    std::fill(view.data, view.data + view.size, 0.0);
  }
}

void snap_params(ModelParams& params) {
  for (auto& view : param_views(params)) {
    for (Eigen::Index i = 0; i < view.size; ++i) view.data[i] = snap_f32(view.data[i]);
  }
}

}  // namespace unirep
