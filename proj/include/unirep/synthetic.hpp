#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "unirep/corpus.hpp"

namespace unirep {

// Planted-cluster generator. Traits and SNPs are partitioned into clusters;
// every intra-cluster (trait, SNP) combination counts as a ground-truth
// association, a sampled subset of which becomes training pairs (with
// per-pair weights) and a disjoint subset held-out eval positives.
struct SyntheticSpec {
  int n_traits = 40;
  int n_snps = 200;
  int n_clusters = 5;
  int snp_pairs_per_trait = 8;    // training TERM_SNP quota per trait
  int term_term_pairs = 240;      // intra-cluster trait-trait pairs
  int eval_pairs_per_trait = 5;   // held-out positives per trait
  double weight_min = 0.1;        // planted weight range before jitter
  double weight_max = 2.0;
  double weight_noise = 0.0;      // additive jitter, clamped back into (0, 2]
  int synonym_copies = 1;         // repetitions of the all-orders synonym pairs
  std::vector<std::string> word_atoms;  // defaults used when empty

  void validate() const;  // throws ConfigError on infeasible specs
};

struct SyntheticBundle {
  // Heap-owned so PairDataset vocabulary pointers survive bundle moves.
  std::shared_ptr<SnpVocabulary> snp_vocab;
  std::vector<std::string> trait_texts;     // normalized, index = trait id
  std::vector<int> trait_cluster;
  std::vector<int> snp_cluster;
  PairDataset term_snp;
  PairDataset term_term;
  PairDataset synonyms;
  std::vector<WeightedPair> eval_positives;  // disjoint from training pairs
  std::map<std::string, std::string> synonym_map;  // trait -> lexical variant

  bool cluster_compatible(int trait_id, int snp_index) const {
    return trait_cluster[static_cast<std::size_t>(trait_id)] ==
           snp_cluster[static_cast<std::size_t>(snp_index)];
  }
  int trait_id(const std::string& normalized) const;
};

SyntheticBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Two-source variant for the code-mapping comparison: every trait carries a
// distinct identifier per source while the surface text is shared, and each
// cluster's SNPs are split between the sources. Held-out positives cross the
// source boundary, which identifier-keyed baselines cannot bridge.
struct CrossSourceSpec {
  int n_traits = 24;
  int n_snps = 96;
  int n_clusters = 4;
  int train_pairs_per_trait_per_source = 4;
  int eval_pairs_per_trait = 4;  // split across both directions
  std::vector<std::string> word_atoms;

  void validate() const;
};

struct IdTriple {
  int head = 0;
  int relation = 0;
  int tail = 0;
};

struct CrossSourceBundle {
  std::shared_ptr<SnpVocabulary> snp_vocab;
  std::vector<std::string> trait_texts;
  std::vector<int> trait_cluster;
  std::vector<int> snp_cluster;
  PairDataset term_snp;                    // text-keyed training pairs, both sources
  std::vector<IdTriple> baseline_triples;  // identifier-keyed training triples
  // Held-out positives: identical pairs in both keyed forms.
  std::vector<WeightedPair> eval_positives;      // (trait text, snp)
  std::vector<IdTriple> eval_triples;            // (per-source trait id, snp entity)
  int n_entities = 0;  // trait ids: source A = t, source B = n_traits + t;
                       // SNP entity id = 2 * n_traits + snp index
  int snp_entity(int snp_index) const;
  bool cluster_compatible(int trait_id, int snp_index) const {
    return trait_cluster[static_cast<std::size_t>(trait_id)] ==
           snp_cluster[static_cast<std::size_t>(snp_index)];
  }
};

CrossSourceBundle generate_cross_source(const CrossSourceSpec& spec, std::uint64_t seed);

}  // namespace unirep
