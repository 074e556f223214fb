#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "unirep/synthetic.hpp"

using namespace unirep;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.n_traits = 8;
  spec.n_snps = 24;
  spec.n_clusters = 2;
  spec.snp_pairs_per_trait = 4;
  spec.term_term_pairs = 20;
  spec.eval_pairs_per_trait = 2;
  return spec;
}

std::set<std::pair<std::string, int>> pair_keys(const std::vector<WeightedPair>& pairs) {
  std::set<std::pair<std::string, int>> keys;
  for (const auto& p : pairs) keys.insert({p.head.normalized, p.tail_snp().index});
  return keys;
}

}  // namespace

TEST_CASE("partition arithmetic matches the even split") {
  SyntheticSpec spec;  // 40 traits, 200 snps, 5 clusters
  auto bundle = generate_synthetic(spec, 3);
  std::map<int, int> trait_counts, snp_counts;
  for (int c : bundle.trait_cluster) ++trait_counts[c];
  for (int c : bundle.snp_cluster) ++snp_counts[c];
  REQUIRE(trait_counts.size() == 5);
  for (const auto& [k, n] : trait_counts) CHECK(n == 8);
  for (const auto& [k, n] : snp_counts) CHECK(n == 40);
}

TEST_CASE("degenerate specs are rejected") {
  SyntheticSpec one_cluster = small_spec();
  one_cluster.n_clusters = 1;
  CHECK_THROWS_AS(generate_synthetic(one_cluster, 1), ConfigError);

  SyntheticSpec too_many_pairs = small_spec();
  too_many_pairs.snp_pairs_per_trait = 13;  // cluster has only 12 SNPs
  CHECK_THROWS_AS(generate_synthetic(too_many_pairs, 1), ConfigError);

  SyntheticSpec too_many_edges = small_spec();
  too_many_edges.term_term_pairs = 1000;
  CHECK_THROWS_AS(generate_synthetic(too_many_edges, 1), ConfigError);
}

TEST_CASE("generation is deterministic in (spec, seed)") {
  auto a = generate_synthetic(small_spec(), 42);
  auto b = generate_synthetic(small_spec(), 42);
  REQUIRE(a.term_snp.pairs.size() == b.term_snp.pairs.size());
  for (std::size_t i = 0; i < a.term_snp.pairs.size(); ++i) {
    CHECK(a.term_snp.pairs[i].head.normalized == b.term_snp.pairs[i].head.normalized);
    CHECK(a.term_snp.pairs[i].tail_snp().index == b.term_snp.pairs[i].tail_snp().index);
    CHECK(a.term_snp.pairs[i].weight == b.term_snp.pairs[i].weight);
  }
  CHECK(a.trait_texts == b.trait_texts);
  CHECK(a.synonym_map == b.synonym_map);
  auto c = generate_synthetic(small_spec(), 43);
  CHECK(c.trait_texts != a.trait_texts);
}

TEST_CASE("planted structure invariants") {
  auto bundle = generate_synthetic(small_spec(), 9);

  SUBCASE("pairs are intra-cluster with weights in (0, 2]") {
    for (const auto& p : bundle.term_snp.pairs) {
      const int t = bundle.trait_id(p.head.normalized);
      REQUIRE(t >= 0);
      CHECK(bundle.cluster_compatible(t, p.tail_snp().index));
      CHECK(p.weight > 0.0);
      CHECK(p.weight <= 2.0);
    }
    for (const auto& p : bundle.term_term.pairs) {
      const int a = bundle.trait_id(p.head.normalized);
      const int b = bundle.trait_id(p.tail_text().normalized);
      REQUIRE(a >= 0);
      REQUIRE(b >= 0);
      CHECK(a != b);
      CHECK(bundle.trait_cluster[static_cast<std::size_t>(a)] ==
            bundle.trait_cluster[static_cast<std::size_t>(b)]);
    }
  }

  SUBCASE("held-out positives are disjoint from training positives") {
    auto train = pair_keys(bundle.term_snp.pairs);
    auto eval = pair_keys(bundle.eval_positives);
    for (const auto& key : eval) CHECK(train.count(key) == 0);
    CHECK(eval.size() == 8 * 2);
  }

  SUBCASE("every SNP is covered by at least one training pair") {
    std::set<int> covered;
    for (const auto& p : bundle.term_snp.pairs) covered.insert(p.tail_snp().index);
    CHECK(covered.size() == static_cast<std::size_t>(bundle.snp_vocab->size()));
  }

  SUBCASE("synonym table maps every trait to a distinct variant") {
    CHECK(bundle.synonym_map.size() == bundle.trait_texts.size());
    std::set<std::string> all_names(bundle.trait_texts.begin(), bundle.trait_texts.end());
    for (const auto& [trait, variant] : bundle.synonym_map) {
      CHECK(variant != trait);
      CHECK(all_names.count(variant) == 0);
    }
    // Both orders, repeated synonym_copies times.
    CHECK(bundle.synonyms.pairs.size() == 2 * 2 * bundle.trait_texts.size());
  }

  SUBCASE("datasets validate") {
    bundle.term_snp.validate();
    bundle.term_term.validate();
    bundle.synonyms.validate();
  }
}

TEST_CASE("cross-source bundle separates identifier spaces") {
  CrossSourceSpec spec;
  spec.n_traits = 8;
  spec.n_snps = 32;
  spec.n_clusters = 2;
  spec.train_pairs_per_trait_per_source = 3;
  spec.eval_pairs_per_trait = 2;
  auto bundle = generate_cross_source(spec, 5);

  CHECK(bundle.n_entities == 2 * 8 + 32);
  REQUIRE(bundle.eval_positives.size() == bundle.eval_triples.size());

  // Baseline training triples never mention the eval entity pairs.
  std::set<std::pair<int, int>> train_edges;
  for (const auto& t : bundle.baseline_triples) train_edges.insert({t.head, t.tail});
  for (const auto& t : bundle.eval_triples) {
    CHECK(train_edges.count({t.head, t.tail}) == 0);
  }

  // Eval triples pair a trait id with a SNP that only the other source
  // trained, so the id-keyed graph has no direct edge to generalize from.
  std::map<int, std::set<int>> partners;  // trait entity -> snp entities
  for (const auto& t : bundle.baseline_triples) partners[t.head].insert(t.tail);
  for (const auto& t : bundle.eval_triples) {
    auto it = partners.find(t.head);
    if (it != partners.end()) CHECK(it->second.count(t.tail) == 0);
  }

  // The text layer sees the association: eval pairs are intra-cluster.
  for (const auto& p : bundle.eval_positives) {
    int trait = -1;
    for (std::size_t i = 0; i < bundle.trait_texts.size(); ++i) {
      if (bundle.trait_texts[i] == p.head.normalized) trait = static_cast<int>(i);
    }
    REQUIRE(trait >= 0);
    CHECK(bundle.cluster_compatible(trait, p.tail_snp().index));
  }

  auto again = generate_cross_source(spec, 5);
  CHECK(again.trait_texts == bundle.trait_texts);
  REQUIRE(again.baseline_triples.size() == bundle.baseline_triples.size());
  for (std::size_t i = 0; i < bundle.baseline_triples.size(); ++i) {
    CHECK(again.baseline_triples[i].head == bundle.baseline_triples[i].head);
    CHECK(again.baseline_triples[i].tail == bundle.baseline_triples[i].tail);
  }
}
