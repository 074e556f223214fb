#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unirep/common.hpp"
#include "unirep/encoder.hpp"
#include "unirep/genomic.hpp"
#include "unirep/objective.hpp"
#include "unirep/tokenizer.hpp"

namespace unirep {

struct ModelConfig {
  int d = 64;        // shared embedding dimension
  int d_model = 64;  // transformer width
  int n_layers = 2;
  int n_heads = 2;
  int ff_dim = 128;

  void validate() const;
};

enum class LrGroup { LanguageModel, SnpTable };

// Every trainable array of the model. Gradient sets share the same layout.
struct ModelParams {
  TextEncoderParams encoder;
  ProjectionHead proj;
  SnpEmbeddingTable snp;
  Temperature temp;
};

struct GradientSet {
  TextEncoderParams encoder;
  ProjectionHead proj;
  Matrix snp_rows;
  double log_inv_tau = 0.0;
};

struct ParamView {
  std::string name;
  double* data = nullptr;  // Eigen column-major storage
  Eigen::Index size = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  LrGroup group = LrGroup::LanguageModel;

  double& at(Eigen::Index r, Eigen::Index c) const { return data[c * rows + r]; }
};

struct ModelState {
  ModelConfig cfg;
  TokenizerConfig tok;
  ModelParams params;

  TokenSeq tokenize(const ConceptText& text) const { return unirep::tokenize(tok, text); }
  Vector embed_tokens(const TokenSeq& seq) const {
    return encode_text(params.encoder, params.proj, seq);
  }
  Vector embed_snp(int index) const { return encode_snp(params.snp, index); }
};

// Seed-controlled initialization: embeddings and weight matrices uniform in
// +-1/sqrt(d_model) (SNP rows +-1/sqrt(d)), layer-norm gains 1, biases 0,
// 1/tau = 14.3. Parameters come out float32-representable.
ModelState init_model(const ModelConfig& cfg, const TokenizerConfig& tok,
                      const SnpVocabulary& vocab, std::uint64_t seed);

// Fixed, documented enumeration order shared by the optimizer, the
// finite-difference checker and the checkpoint format:
//   token_embeddings, positional_embeddings,
//   per block: Wq bq Wk Wv bv Wo bo ln1.g ln1.b W1 b1 W2 b2 ln2.g ln2.b,
//   proj.W, proj.b, snp_table, log_inv_tau.
std::vector<ParamView> param_views(ModelParams& params);
std::vector<ParamView> grad_views(GradientSet& grads);

GradientSet zero_gradients(const ModelState& model);
void set_zero(GradientSet& grads);

// Rounds every parameter to the nearest float32 value so the float32
// checkpoint arrays round-trip exactly.
void snap_params(ModelParams& params);

}  // namespace unirep
