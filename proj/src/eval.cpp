#include "unirep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "unirep/rng.hpp"

namespace unirep {

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw DataError("cosine of a zero vector is undefined");
  return u.dot(v) / (nu * nv);
}

double auc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw DataError("AUC needs non-empty positive and negative score lists");
  }
  double wins = 0.0;
  for (double p : positives) {
    for (double n : negatives) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

const Vector& Embedder::text(const std::string& normalized) {
  auto it = cache_.find(normalized);
  if (it != cache_.end()) return it->second;
  TokenSeq seq = model_->tokenize(ConceptText{normalized, normalized});
  Vector emb = model_->embed_tokens(seq);
  return cache_.emplace(normalized, std::move(emb)).first->second;
}

std::string EvalPair::tail_key() const {
  return tail_is_snp ? "s:" + std::to_string(tail_snp) : "t:" + tail_text;
}

EvalPair EvalPair::from_weighted(const WeightedPair& pair) {
  EvalPair e;
  e.head = pair.head.normalized;
  e.weight = pair.weight;
  if (pair.tail_is_snp()) {
    e.tail_is_snp = true;
    e.tail_snp = pair.tail_snp().index;
  } else {
    e.tail_is_snp = false;
    e.tail_text = pair.tail_text().normalized;
  }
  return e;
}

std::string PoolItem::key() const {
  return is_snp ? "s:" + std::to_string(snp_index) : "t:" + text;
}

KnownPositives known_from_pairs(std::span<const EvalPair> pairs) {
  KnownPositives known;
  for (const auto& p : pairs) known.emplace(p.head, p.tail_key());
  return known;
}

EvalReport EvalReport::from_values(std::string metric, std::vector<double> per_seed,
                                   std::string config) {
  EvalReport report;
  report.metric = std::move(metric);
  report.per_seed = std::move(per_seed);
  report.config = std::move(config);
  const auto n = report.per_seed.size();
  if (n == 0) throw DataError("EvalReport needs at least one seed value");
  double sum = 0.0;
  for (double v : report.per_seed) sum += v;
  report.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : report.per_seed) ss += (v - report.mean) * (v - report.mean);
    report.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return report;
}

void EvalReport::write_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "metric\tmean\tstd\tseeds\tconfig\n";
  char buf[64];
  out << metric << '\t';
  std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t", mean, stddev);
  out << buf;
  for (std::size_t i = 0; i < per_seed.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.6f", i ? "," : "", per_seed[i]);
    out << buf;
  }
  out << '\t' << config << '\n';
}

namespace {

Vector embed_pool_item(Embedder& embedder, const PoolItem& item) {
  return item.is_snp ? embedder.snp(item.snp_index) : embedder.text(item.text);
}

}  // namespace

EvalReport eval_related(Embedder& embedder, std::span<const EvalPair> positives,
                        std::span<const PoolItem> pool, const KnownPositives& known,
                        const RelatedEvalConfig& config,
                        const std::function<std::string(const std::string&)>& head_transform) {
  if (positives.empty()) throw DataError("no positive pairs to evaluate");
  if (pool.empty()) throw DataError("empty candidate pool");
  if (config.k_neg < 1) throw ConfigError("k_neg must be >= 1");
  if (config.seeds.empty()) throw ConfigError("at least one evaluation seed is required");
  {
    std::set<std::uint64_t> distinct(config.seeds.begin(), config.seeds.end());
    if (distinct.size() != config.seeds.size()) throw ConfigError("evaluation seeds must be distinct");
  }

  auto head_text = [&](const std::string& h) { return head_transform ? head_transform(h) : h; };

  // Valid negative candidates per anchor, memoized: the pool minus known
  // positives of that anchor (and, for tail anchors, the anchor itself).
  std::map<std::string, std::vector<std::size_t>> valid_cache;
  auto valid_for_head_anchor = [&](const std::string& head) -> const std::vector<std::size_t>& {
    auto it = valid_cache.find(head);
    if (it != valid_cache.end()) return it->second;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool[i].is_snp && pool[i].text == head) continue;
      if (known.count({head, pool[i].key()})) continue;
      valid.push_back(i);
    }
    return valid_cache.emplace(head, std::move(valid)).first->second;
  };
  auto valid_for_tail_anchor = [&](const EvalPair& p) -> const std::vector<std::size_t>& {
    const std::string anchor_key = "a:" + p.tail_key();
    auto it = valid_cache.find(anchor_key);
    if (it != valid_cache.end()) return it->second;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].is_snp) continue;  // tail-anchored negatives draw heads, i.e. texts
      if (pool[i].text == p.head) continue;
      if (known.count({pool[i].text, p.tail_key()})) continue;
      valid.push_back(i);
    }
    return valid_cache.emplace(anchor_key, std::move(valid)).first->second;
  };

  std::vector<double> per_seed;
  per_seed.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) {
    Rng rng(derive_seed(seed, fnv1a64("eval-related")));
    std::vector<double> pos_scores;
    std::vector<double> neg_scores;
    pos_scores.reserve(positives.size());
    neg_scores.reserve(positives.size() * static_cast<std::size_t>(config.k_neg));
    for (const auto& p : positives) {
      const Vector& h = embedder.text(head_text(p.head));
      Vector t = p.tail_is_snp ? embedder.snp(p.tail_snp) : embedder.text(p.tail_text);
      pos_scores.push_back(cosine(h, t));
      const auto& valid =
          config.anchor == AnchorSide::Head ? valid_for_head_anchor(p.head) : valid_for_tail_anchor(p);
      if (valid.empty()) {
        throw DataError("candidate pool too small to sample negatives for anchor '" +
                        (config.anchor == AnchorSide::Head ? p.head : p.tail_key()) + "'");
      }
      for (int k = 0; k < config.k_neg; ++k) {
        const PoolItem& cand = pool[valid[rng.below(valid.size())]];
        if (config.anchor == AnchorSide::Head) {
          Vector neg_tail = embed_pool_item(embedder, cand);
          neg_scores.push_back(cosine(h, neg_tail));
        } else {
          const Vector& neg_head = embedder.text(head_text(cand.text));
          neg_scores.push_back(cosine(neg_head, t));
        }
      }
    }
    per_seed.push_back(auc(pos_scores, neg_scores));
  }

  std::string cfg_desc = std::string("anchor=") +
                         (config.anchor == AnchorSide::Head ? "head" : "tail") +
                         " k_neg=" + std::to_string(config.k_neg) +
                         " seeds=" + std::to_string(config.seeds.size());
  return EvalReport::from_values("auc", std::move(per_seed), std::move(cfg_desc));
}

std::vector<double> default_gap_edges() { return {0.0, 0.25, 0.5, 1.0, 2.0}; }

std::vector<GapBin> gap_ranking(Embedder& embedder, std::span<const GapTriple> triples,
                                std::span<const double> edges) {
  if (edges.size() < 1) throw ConfigError("gap ranking needs at least one bin edge");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ConfigError("gap bin edges must be increasing");
  }
  std::vector<GapBin> bins;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    GapBin bin;
    bin.lo = edges[i];
    bin.hi = i + 1 < edges.size() ? edges[i + 1] : std::numeric_limits<double>::infinity();
    bins.push_back(bin);
  }
  std::vector<std::size_t> correct(bins.size(), 0);
  for (const auto& t : triples) {
    if (t.w_a == t.w_b) throw DataError("gap triple with equal weights");
    const double gap = std::abs(t.w_a - t.w_b);
    std::size_t bi = bins.size();
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (gap >= bins[i].lo && gap < bins[i].hi) {
        bi = i;
        break;
      }
    }
    if (bi == bins.size()) continue;  // below the first edge
    const Vector& trait = embedder.text(t.trait);
    const double ca = cosine(trait, embedder.snp(t.snp_a));
    const double cb = cosine(trait, embedder.snp(t.snp_b));
    const double ds = ca - cb;
    const double dw = t.w_a - t.w_b;
    ++bins[bi].count;
    if ((ds > 0 && dw > 0) || (ds < 0 && dw < 0)) ++correct[bi];
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].count > 0) {
      bins[i].accuracy = static_cast<double>(correct[i]) / static_cast<double>(bins[i].count);
    }
  }
  return bins;
}

std::vector<GapTriple> make_gap_triples(std::span<const WeightedPair> pairs) {
  std::map<std::string, std::vector<std::pair<int, double>>> by_trait;
  for (const auto& p : pairs) {
    if (!p.tail_is_snp()) continue;
    by_trait[p.head.normalized].emplace_back(p.tail_snp().index, p.weight);
  }
  std::vector<GapTriple> triples;
  for (const auto& [trait, snps] : by_trait) {
    for (std::size_t a = 0; a < snps.size(); ++a) {
      for (std::size_t b = a + 1; b < snps.size(); ++b) {
        if (snps[a].second == snps[b].second) continue;
        triples.push_back(GapTriple{trait, snps[a].first, snps[b].first,
                                    snps[a].second, snps[b].second});
      }
    }
  }
  return triples;
}

SwapReports synonym_swap_eval(Embedder& embedder, std::span<const EvalPair> positives,
                              std::span<const PoolItem> pool, const KnownPositives& known,
                              const RelatedEvalConfig& config,
                              const std::map<std::string, std::string>& synonym_map) {
  SwapReports reports{
      eval_related(embedder, positives, pool, known, config),
      eval_related(embedder, positives, pool, known, config,
                   [&synonym_map](const std::string& head) {
                     auto it = synonym_map.find(head);
                     return it == synonym_map.end() ? head : it->second;
                   })};
  reports.original.metric = "auc_original";
  reports.swapped.metric = "auc_synonym_swapped";
  return reports;
}

std::vector<Neighbor> nearest(Embedder& embedder, const Vector& query, int k,
                              std::span<const PoolItem> pool) {
  if (pool.empty()) throw DataError("nearest: empty pool");
  if (k < 1) throw ConfigError("nearest: k must be >= 1");
  std::vector<Neighbor> scored;
  scored.reserve(pool.size());
  for (const auto& item : pool) {
    Vector v = embed_pool_item(embedder, item);
    std::string label = item.is_snp ? embedder.model().params.snp.vocab.at(item.snp_index).label()
                                    : item.text;
    scored.push_back(Neighbor{std::move(label), cosine(query, v)});
  }
  std::sort(scored.begin(), scored.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.label < b.label;
  });
  if (static_cast<std::size_t>(k) < scored.size()) scored.resize(static_cast<std::size_t>(k));
  return scored;
}

Matrix project_2d(const Matrix& embeddings) {
  const auto n = embeddings.rows();
  if (n < 3) throw DataError("projection needs at least 3 points");
  Matrix centered = embeddings.rowwise() - embeddings.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed in project_2d");
  const auto d = embeddings.cols();
  Matrix axes = Matrix::Zero(d, 2);
  axes.col(0) = solver.eigenvectors().col(d - 1);  // eigenvalues ascend
  if (d >= 2) axes.col(1) = solver.eigenvectors().col(d - 2);
  // Deterministic sign: the largest-magnitude component of each axis is
  // made positive (first index on ties).
  for (int c = 0; c < 2; ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < d; ++i) {
      if (std::abs(axes(i, c)) > std::abs(axes(best, c))) best = i;
    }
    if (axes(best, c) < 0.0) axes.col(c) = -axes.col(c);
  }
  Matrix coords = centered * axes;
  // Degenerate directions (zero variance) stay exactly at 0.
  for (int c = 0; c < 2; ++c) {
    const Eigen::Index ev_index = d - 1 - c;
    if (ev_index < 0 || solver.eigenvalues()(ev_index) <= 0.0) coords.col(c).setZero();
  }
  return coords;
}

void write_projection(const std::filesystem::path& path, std::span<const std::string> labels,
                      const Matrix& coords) {
  if (static_cast<Eigen::Index>(labels.size()) != coords.rows()) {
    throw DataError("projection labels and coordinates are misaligned");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "label\tx\ty\n";
  char buf[80];
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "\t%.10g\t%.10g\n", coords(i, 0), coords(i, 1));
    out << labels[static_cast<std::size_t>(i)] << buf;
  }
}

}  // namespace unirep
