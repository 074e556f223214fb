#include "unirep/encoder.hpp"

#include <cmath>

namespace unirep {

namespace {

constexpr double kLnEps = 1e-5;
const double kGeluScale = std::sqrt(2.0 / M_PI);

// Returns x̂ (normalized rows) and fills inv_std; out = x̂ * diag(gamma) + beta.
Matrix layer_norm(const Matrix& x, const LayerNormParams& ln, Matrix& x_hat, Vector& inv_std) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  x_hat.resize(rows, cols);
  inv_std.resize(rows);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().sum() / static_cast<double>(cols);
    const double is = 1.0 / std::sqrt(var + kLnEps);
    inv_std(i) = is;
    x_hat.row(i) = (x.row(i).array() - mean) * is;
    out.row(i) = x_hat.row(i).cwiseProduct(ln.gamma.transpose()) + ln.beta.transpose();
  }
  return out;
}

void layer_norm_backward(const Matrix& d_out, const Matrix& x_hat, const Vector& inv_std,
                         const LayerNormParams& ln, LayerNormParams& grads, Matrix& d_x) {
  const auto rows = d_out.rows();
  d_x.resize(rows, d_out.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    grads.gamma += d_out.row(i).cwiseProduct(x_hat.row(i)).transpose();
    grads.beta += d_out.row(i).transpose();
    Eigen::RowVectorXd d_hat = d_out.row(i).cwiseProduct(ln.gamma.transpose());
    const double mean_d = d_hat.mean();
    const double mean_dx = d_hat.cwiseProduct(x_hat.row(i)).mean();
    d_x.row(i) = inv_std(i) * (d_hat.array() - mean_d - x_hat.row(i).array() * mean_dx);
  }
}

Matrix linear(const Matrix& x, const LinearLayer& l) {
  Matrix y = x * l.W;
  y.rowwise() += l.b.transpose();
  return y;
}

void linear_backward(const Matrix& d_y, const Matrix& x, const LinearLayer& l,
                     LinearLayer& grads, Matrix& d_x) {
  grads.W.noalias() += x.transpose() * d_y;
  grads.b += d_y.colwise().sum().transpose();
  d_x.noalias() = d_y * l.W.transpose();
}

Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& z) {
  Eigen::RowVectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

void check_finite(const Matrix& m, const char* stage) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite values in ") + stage);
  }
}

}  // namespace

double gelu(double x) {
  const double u = kGeluScale * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  const double u = kGeluScale * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double sech2 = 1.0 - t * t;
  return 0.5 * (1.0 + t) + 0.5 * x * sech2 * kGeluScale * (1.0 + 3.0 * 0.044715 * x * x);
}

Vector encode_text(const TextEncoderParams& params, const ProjectionHead& head,
                   const TokenSeq& tokens, EncoderCache* cache) {
  const int len = tokens.length;
  const int d_model = params.d_model;
  const int n_heads = params.n_heads;
  if (len < 1) throw DataError("token sequence must contain at least CLS");
  if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by the head count");
  const int d_head = d_model / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

  Matrix x(len, d_model);
  for (int p = 0; p < len; ++p) {
    const auto id = tokens.ids[static_cast<std::size_t>(p)];
    if (id < 0 || id >= params.token_embeddings.rows()) {
      throw DataError("token id out of embedding range");
    }
    x.row(p) = params.token_embeddings.row(id) + params.positional_embeddings.row(p);
  }

  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c.length = len;
  c.x0 = x;
  c.blocks.clear();
  c.blocks.resize(params.blocks.size());

  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    const auto& blk = params.blocks[b];
    auto& bc = c.blocks[b];
    bc.attn_in = x;
    bc.n1 = layer_norm(x, blk.ln1, bc.n1_hat, bc.inv_std1);
    bc.q = linear(bc.n1, blk.q);
    bc.k.noalias() = bc.n1 * blk.k_W;
    bc.v = linear(bc.n1, blk.v);
    bc.probs.resize(static_cast<std::size_t>(n_heads));
    bc.attn_cat.resize(len, d_model);
    for (int h = 0; h < n_heads; ++h) {
      auto qh = bc.q.middleCols(h * d_head, d_head);
      auto kh = bc.k.middleCols(h * d_head, d_head);
      auto vh = bc.v.middleCols(h * d_head, d_head);
      Matrix scores = qh * kh.transpose() * scale;
      Matrix& probs = bc.probs[static_cast<std::size_t>(h)];
      probs.resize(len, len);
      for (int i = 0; i < len; ++i) probs.row(i) = softmax_row(scores.row(i));
      bc.attn_cat.middleCols(h * d_head, d_head).noalias() = probs * vh;
    }
    Matrix attn_out = linear(bc.attn_cat, blk.o);
    x += attn_out;
    bc.mid = x;
    bc.n2 = layer_norm(x, blk.ln2, bc.n2_hat, bc.inv_std2);
    bc.h1 = linear(bc.n2, blk.ff1);
    bc.g = bc.h1.unaryExpr([](double v) { return gelu(v); });
    Matrix ff_out = linear(bc.g, blk.ff2);
    x += ff_out;
    check_finite(x, ("encoder block " + std::to_string(b)).c_str());
  }
  c.x_final = x;

  Vector h_cls = x.row(0).transpose();
  Vector out = head.W * h_cls + head.b;
  check_finite(out, "projection head");
  return out;
}

Matrix encode_text_batch(const TextEncoderParams& params, const ProjectionHead& head,
                         std::span<const TokenSeq> tokens) {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), head.W.rows());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = encode_text(params, head, tokens[i]).transpose();
  }
  return out;
}

void encode_text_backward(const TextEncoderParams& params, const ProjectionHead& head,
                          const TokenSeq& tokens, const EncoderCache& cache,
                          const Vector& d_out, TextEncoderParams& grads,
                          ProjectionHead& head_grads) {
  const int len = cache.length;
  const int d_model = params.d_model;
  const int n_heads = params.n_heads;
  const int d_head = d_model / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

  // Projection: out = W * h_cls + b.
  Vector h_cls = cache.x_final.row(0).transpose();
  head_grads.W.noalias() += d_out * h_cls.transpose();
  head_grads.b += d_out;

  Matrix d_x = Matrix::Zero(len, d_model);
  d_x.row(0) = (head.W.transpose() * d_out).transpose();

  for (std::size_t bi = params.blocks.size(); bi-- > 0;) {
    const auto& blk = params.blocks[bi];
    const auto& bc = cache.blocks[bi];
    auto& gb = grads.blocks[bi];

    // x = mid + ff2(gelu(ff1(ln2(mid))))
    Matrix d_ff_out = d_x;  // residual carries d_x through unchanged
    Matrix d_g;
    linear_backward(d_ff_out, bc.g, blk.ff2, gb.ff2, d_g);
    Matrix d_h1 = d_g.cwiseProduct(bc.h1.unaryExpr([](double v) { return gelu_grad(v); }));
    Matrix d_n2;
    linear_backward(d_h1, bc.n2, blk.ff1, gb.ff1, d_n2);
    Matrix d_mid;
    layer_norm_backward(d_n2, bc.n2_hat, bc.inv_std2, blk.ln2, gb.ln2, d_mid);
    d_x += d_mid;

    // mid = attn_in + o(attn_cat)
    Matrix d_attn_cat;
    linear_backward(d_x, bc.attn_cat, blk.o, gb.o, d_attn_cat);
    Matrix d_q = Matrix::Zero(len, d_model);
    Matrix d_k = Matrix::Zero(len, d_model);
    Matrix d_v = Matrix::Zero(len, d_model);
    for (int h = 0; h < n_heads; ++h) {
      auto qh = bc.q.middleCols(h * d_head, d_head);
      auto kh = bc.k.middleCols(h * d_head, d_head);
      auto vh = bc.v.middleCols(h * d_head, d_head);
      const Matrix& probs = bc.probs[static_cast<std::size_t>(h)];
      auto d_oh = d_attn_cat.middleCols(h * d_head, d_head);
      Matrix d_probs = d_oh * vh.transpose();
      d_v.middleCols(h * d_head, d_head).noalias() = probs.transpose() * d_oh;
      Matrix d_scores(len, len);
      for (int i = 0; i < len; ++i) {
        const double dot = probs.row(i).cwiseProduct(d_probs.row(i)).sum();
        d_scores.row(i) = probs.row(i).cwiseProduct((d_probs.row(i).array() - dot).matrix());
      }
      d_q.middleCols(h * d_head, d_head).noalias() = d_scores * kh * scale;
      d_k.middleCols(h * d_head, d_head).noalias() = d_scores.transpose() * qh * scale;
    }
    Matrix d_n1 = Matrix::Zero(len, d_model);
    Matrix tmp;
    linear_backward(d_q, bc.n1, blk.q, gb.q, tmp);
    d_n1 += tmp;
    gb.k_W.noalias() += bc.n1.transpose() * d_k;
    d_n1.noalias() += d_k * blk.k_W.transpose();
    linear_backward(d_v, bc.n1, blk.v, gb.v, tmp);
    d_n1 += tmp;
    Matrix d_attn_in;
    layer_norm_backward(d_n1, bc.n1_hat, bc.inv_std1, blk.ln1, gb.ln1, d_attn_in);
    d_x += d_attn_in;
  }

  for (int p = 0; p < len; ++p) {
    grads.token_embeddings.row(tokens.ids[static_cast<std::size_t>(p)]) += d_x.row(p);
    grads.positional_embeddings.row(p) += d_x.row(p);
  }
}

}  // namespace unirep
