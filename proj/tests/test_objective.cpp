#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unirep/objective.hpp"
#include "unirep/rng.hpp"

using namespace unirep;

namespace {

// Independent direct computation: explicit exp/sum per pair, no
// stabilization tricks. Kept free of any code shared with the
// implementation path it checks.
double oracle_infonce(const ObjectiveBatch& b, double log_inv_tau, LossDirection direction) {
  const auto n = b.heads.rows();
  const double inv_tau = std::exp(log_inv_tau);
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    // tails vary against head i
    double row_denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && b.tail_keys[j] == b.tail_keys[i]) continue;
      double sim = 0.0;
      for (Eigen::Index k = 0; k < b.heads.cols(); ++k) sim += b.heads(i, k) * b.tails(j, k);
      row_denom += std::exp(sim * inv_tau);
    }
    double sim_ii = 0.0;
    for (Eigen::Index k = 0; k < b.heads.cols(); ++k) sim_ii += b.heads(i, k) * b.tails(i, k);
    const double row_loss = -std::log(std::exp(sim_ii * inv_tau) / row_denom);

    // heads vary against tail i
    double col_denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && b.head_keys[j] == b.head_keys[i]) continue;
      double sim = 0.0;
      for (Eigen::Index k = 0; k < b.heads.cols(); ++k) sim += b.heads(j, k) * b.tails(i, k);
      col_denom += std::exp(sim * inv_tau);
    }
    const double col_loss = -std::log(std::exp(sim_ii * inv_tau) / col_denom);

    const double per_pair =
        direction == LossDirection::Symmetric ? 0.5 * (row_loss + col_loss) : col_loss;
    weighted += b.weights(i) * per_pair;
    weight_sum += b.weights(i);
  }
  return weighted / weight_sum;
}

ObjectiveBatch random_batch(Rng& rng, Eigen::Index n, Eigen::Index d, bool with_duplicates) {
  ObjectiveBatch b;
  b.heads.resize(n, d);
  b.tails.resize(n, d);
  b.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      b.heads(i, k) = rng.uniform(-1.5, 1.5);
      b.tails(i, k) = rng.uniform(-1.5, 1.5);
    }
    b.weights(i) = rng.uniform(0.05, 2.0);
    // Duplicate keys appear with some probability so masking is exercised.
    const std::int64_t hk = with_duplicates && i > 0 && rng.uniform() < 0.3 ? b.head_keys[0] : 100 + i;
    const std::int64_t tk = with_duplicates && i > 0 && rng.uniform() < 0.3 ? b.tail_keys[0] : 200 + i;
    b.head_keys.push_back(hk);
    b.tail_keys.push_back(tk);
  }
  return b;
}

}  // namespace

TEST_CASE("similarity is the inner product") {
  CHECK(similarity(Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}) == 0.0);
  CHECK(similarity(Vector{{1.0, 2.0}}, Vector{{3.0, 4.0}}) == 11.0);
  CHECK(similarity(Vector{{3.0, 4.0}}, Vector{{3.0, 4.0}}) == 25.0);
  CHECK_THROWS_AS(similarity(Vector{{1.0}}, Vector{{1.0, 2.0}}), DataError);
}

TEST_CASE("clamp_temperature keeps 1/tau in [1, 100]") {
  Temperature t;
  t.log_inv_tau = std::log(150.0);
  CHECK(clamp_temperature(t).inv_tau() == doctest::Approx(100.0));
  t.log_inv_tau = std::log(50.0);
  CHECK(clamp_temperature(t).inv_tau() == doctest::Approx(50.0));
  t.log_inv_tau = std::log(0.5);
  CHECK(clamp_temperature(t).inv_tau() == doctest::Approx(1.0));
  CHECK(Temperature::initial().inv_tau() == doctest::Approx(14.3));
}

TEST_CASE("single-pair batch has zero loss") {
  Rng rng(3);
  auto b = random_batch(rng, 1, 4, false);
  auto result = infonce_weighted(b, Temperature::initial());
  CHECK(result.loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("uniform embeddings give ln B") {
  ObjectiveBatch b;
  const Eigen::Index n = 4;
  b.heads = Matrix::Ones(n, 3);
  b.tails = Matrix::Ones(n, 3);
  b.weights = Vector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.head_keys.push_back(i);
    b.tail_keys.push_back(100 + i);
  }
  Temperature t;  // any temperature: all sims equal
  t.log_inv_tau = std::log(7.0);
  auto result = infonce_weighted(b, t);
  CHECK(result.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("logits follow the documented layout") {
  Rng rng(17);
  auto b = random_batch(rng, 3, 5, false);
  Temperature t = Temperature::initial();
  auto result = infonce_weighted(b, t);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double expected = b.heads.row(i).dot(b.tails.row(j)) * t.inv_tau();
      CHECK(result.logits(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss matches the brute-force oracle") {
  Rng rng(99);
  for (int round = 0; round < 100; ++round) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto d = 2 + static_cast<Eigen::Index>(rng.below(6));
    auto b = random_batch(rng, n, d, round % 2 == 1);
    Temperature t;
    t.log_inv_tau = rng.uniform(0.0, std::log(30.0));
    for (LossDirection dir : {LossDirection::Symmetric, LossDirection::HeadOnly}) {
      const double expected = oracle_infonce(b, t.log_inv_tau, dir);
      const double actual = infonce_weighted(b, t, dir).loss;
      CHECK(std::abs(actual - expected) < 1e-6);
    }
  }
}

TEST_CASE("loss is invariant under weight scaling and batch permutation") {
  Rng rng(4);
  auto b = random_batch(rng, 6, 4, true);
  Temperature t = Temperature::initial();
  const double base = infonce_weighted(b, t).loss;

  ObjectiveBatch scaled = b;
  scaled.weights *= 37.5;
  CHECK(infonce_weighted(scaled, t).loss == doctest::Approx(base).epsilon(1e-12));

  std::vector<Eigen::Index> perm = {3, 0, 5, 1, 4, 2};
  ObjectiveBatch permuted;
  permuted.heads.resize(6, 4);
  permuted.tails.resize(6, 4);
  permuted.weights.resize(6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    permuted.heads.row(i) = b.heads.row(perm[static_cast<std::size_t>(i)]);
    permuted.tails.row(i) = b.tails.row(perm[static_cast<std::size_t>(i)]);
    permuted.weights(i) = b.weights(perm[static_cast<std::size_t>(i)]);
    permuted.head_keys.push_back(b.head_keys[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    permuted.tail_keys.push_back(b.tail_keys[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
  }
  CHECK(infonce_weighted(permuted, t).loss == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("empty batch is rejected") {
  ObjectiveBatch b;
  b.heads.resize(0, 4);
  b.tails.resize(0, 4);
  b.weights.resize(0);
  CHECK_THROWS_AS(infonce_weighted(b, Temperature::initial()), DataError);
}

TEST_CASE("analytic gradients match finite differences on raw embeddings") {
  // The linear toy oracle: embeddings given directly, no encoder in the
  // way. Tame magnitudes keep the softmax well away from saturation so the
  // numeric reference is trustworthy at double precision.
  Rng rng(12);
  ObjectiveBatch b;
  b.heads.resize(5, 3);
  b.tails.resize(5, 3);
  b.weights.resize(5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      b.heads(i, k) = rng.uniform(-0.5, 0.5);
      b.tails(i, k) = rng.uniform(-0.5, 0.5);
    }
    b.weights(i) = rng.uniform(0.2, 2.0);
    b.head_keys.push_back(i == 3 ? 0 : i);  // one duplicate head
    b.tail_keys.push_back(100 + i);
  }
  Temperature t;
  t.log_inv_tau = std::log(4.0);
  for (LossDirection dir : {LossDirection::Symmetric, LossDirection::HeadOnly}) {
    auto grads = infonce_backward(b, t, dir);
    const double delta = 1e-5;  // noise/truncation sweet spot for these scales
    double diff_norm = 0.0;
    double scale = 0.0;
    auto probe = [&](double* slot, double analytic) {
      const double saved = *slot;
      *slot = saved + delta;
      const double plus = infonce_weighted(b, t, dir).loss;
      *slot = saved - delta;
      const double minus = infonce_weighted(b, t, dir).loss;
      *slot = saved;
      const double numeric = (plus - minus) / (2.0 * delta);
      diff_norm = std::max(diff_norm, std::abs(analytic - numeric));
      scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
    };
    for (Eigen::Index i = 0; i < b.heads.rows(); ++i) {
      for (Eigen::Index k = 0; k < b.heads.cols(); ++k) {
        probe(&b.heads(i, k), grads.d_heads(i, k));
        probe(&b.tails(i, k), grads.d_tails(i, k));
      }
    }
    probe(&t.log_inv_tau, grads.d_log_inv_tau);
    CHECK(diff_norm / std::max(scale, 1e-8) < 1e-10);
  }
}

TEST_CASE("gradients are identical under weight scaling") {
  Rng rng(8);
  auto b = random_batch(rng, 5, 4, false);
  Temperature t = Temperature::initial();
  auto g1 = infonce_backward(b, t);
  ObjectiveBatch scaled = b;
  scaled.weights *= 11.0;
  auto g2 = infonce_backward(scaled, t);
  CHECK((g1.d_heads - g2.d_heads).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g1.d_tails - g2.d_tails).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(g1.d_log_inv_tau - g2.d_log_inv_tau) < 1e-12);
}

TEST_CASE("duplicate tails are masked out of the denominator") {
  ObjectiveBatch b;
  b.heads = Matrix::Zero(3, 2);
  b.tails = Matrix::Zero(3, 2);
  b.heads << 1, 0, 0, 1, 1, 1;
  b.tails << 1, 0, 1, 0, 0, 1;  // rows 0 and 1 carry the same tail
  b.weights = Vector::Ones(3);
  b.head_keys = {0, 1, 2};
  b.tail_keys = {7, 7, 8};
  Temperature t;
  t.log_inv_tau = 0.0;
  const double masked = infonce_weighted(b, t).loss;
  ObjectiveBatch unmasked = b;
  unmasked.tail_keys = {7, 9, 8};
  const double no_mask = infonce_weighted(unmasked, t).loss;
  CHECK(masked < no_mask);  // the false negative no longer competes
  CHECK(masked == doctest::Approx(oracle_infonce(b, 0.0, LossDirection::Symmetric)).epsilon(1e-12));
}
