#pragma once

#include <span>
#include <vector>

#include "unirep/common.hpp"
#include "unirep/tokenizer.hpp"

namespace unirep {

struct LinearLayer {
  Matrix W;  // [in x out], applied as y = x * W + b
  Vector b;  // [out]
};

struct LayerNormParams {
  Vector gamma;
  Vector beta;
};

struct EncoderBlockParams {
  LinearLayer q, v, o;
  // The key projection carries no bias: a constant added to every key
  // shifts each attention row uniformly, which softmax cancels exactly.
  Matrix k_W;
  LayerNormParams ln1, ln2;
  LinearLayer ff1, ff2;
};

struct TextEncoderParams {
  Matrix token_embeddings;       // [hash_vocab x d_model]
  Matrix positional_embeddings;  // [max_len x d_model]
  std::vector<EncoderBlockParams> blocks;
  int d_model = 0;
  int n_heads = 1;
};

// Maps the [CLS] hidden state into the shared d-dimensional space:
// out = W * h_cls + b.
struct ProjectionHead {
  Matrix W;  // [d x d_model]
  Vector b;  // [d]
};

// Activations needed to backpropagate one sequence. Only the first
// `length` positions are ever computed; PAD cannot influence the output.
struct EncoderCache {
  int length = 0;
  Matrix x0;
  struct BlockCache {
    Matrix attn_in;
    Matrix n1_hat;  // layer-normed rows before gain/bias
    Vector inv_std1;
    Matrix n1;
    Matrix q, k, v;
    std::vector<Matrix> probs;  // attention softmax per head
    Matrix attn_cat;
    Matrix mid;
    Matrix n2_hat;
    Vector inv_std2;
    Matrix n2;
    Matrix h1;  // feed-forward pre-activation
    Matrix g;   // feed-forward activation
  };
  std::vector<BlockCache> blocks;
  Matrix x_final;
};

// Pre-norm transformer forward; returns the projected [CLS] embedding.
// `cache` may be null when gradients are not needed. Throws NumericError
// naming the first non-finite stage.
Vector encode_text(const TextEncoderParams& params, const ProjectionHead& head,
                   const TokenSeq& tokens, EncoderCache* cache = nullptr);

// Row i equals encode_text of item i exactly; items run through the same
// per-item code path so batching cannot change arithmetic.
Matrix encode_text_batch(const TextEncoderParams& params, const ProjectionHead& head,
                         std::span<const TokenSeq> tokens);

// Accumulates gradients for one sequence into `grads`/`head_grads`
// (shapes must already match the parameters).
void encode_text_backward(const TextEncoderParams& params, const ProjectionHead& head,
                          const TokenSeq& tokens, const EncoderCache& cache,
                          const Vector& d_out, TextEncoderParams& grads,
                          ProjectionHead& head_grads);

double gelu(double x);
double gelu_grad(double x);

}  // namespace unirep
