#include "unirep/synthetic.hpp"

#include <algorithm>
#include <set>

#include "unirep/rng.hpp"

namespace unirep {

namespace {

// Consonant-vowel-consonant syllables; large enough that every name slot
// can take a fresh atom, so traits share lexical material only where the
// generator intends (trait vs its synonym variant).
const std::vector<std::string>& default_atoms() {
  static const std::vector<std::string> atoms = [] {
    const std::string heads = "bcdfghklmnprstvz";
    const std::string vowels = "aeiou";
    std::vector<std::string> out;
    out.reserve(heads.size() * vowels.size() * heads.size());
    for (char a : heads) {
      for (char v : vowels) {
        for (char b : heads) {
          out.push_back(std::string{a, v, b});
        }
      }
    }
    return out;
  }();
  return atoms;
}

// Contiguous cluster assignment; earlier clusters absorb the remainder.
std::vector<int> partition(int n, int clusters) {
  std::vector<int> assignment(static_cast<std::size_t>(n));
  const int base = n / clusters;
  const int extra = n % clusters;
  int idx = 0;
  for (int k = 0; k < clusters; ++k) {
    const int size = base + (k < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) assignment[static_cast<std::size_t>(idx++)] = k;
  }
  return assignment;
}

std::vector<std::vector<int>> members_by_cluster(const std::vector<int>& assignment, int clusters) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    members[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
  }
  return members;
}

const std::vector<std::string>& atom_pool(const std::vector<std::string>& user_atoms) {
  return user_atoms.empty() ? default_atoms() : user_atoms;
}

// Trait names are three concatenated atoms; synonym variants are inflected
// forms (the name plus a trailing atom), a mild lexical shift. A second
// variant per trait enriches the synonym task with variant-variant pairs.
struct NameTable {
  std::vector<std::string> traits;
  std::vector<std::string> variants;
  std::vector<std::string> alt_variants;
};

NameTable make_names(const std::vector<std::string>& atoms, int n_traits, Rng& rng) {
  if (atoms.size() < 5) throw ConfigError("need at least 5 word atoms");
  for (const auto& a : atoms) {
    if (!is_normalized(a) || a.find(' ') != std::string::npos) {
      throw ConfigError("word atoms must be normalized single words");
    }
  }
  const std::size_t n = atoms.size();
  if (n * (n - 1) * (n - 2) < static_cast<std::size_t>(2 * n_traits)) {
    throw ConfigError("atom pool too small for the requested trait count");
  }
  // Variants inflect with suffixes drawn from a small shared pool, the way
  // real morphology reuses a handful of endings across many words.
  std::vector<std::size_t> suffix_pool;
  while (suffix_pool.size() < 4) {
    const auto s = rng.below(n);
    if (std::find(suffix_pool.begin(), suffix_pool.end(), s) == suffix_pool.end()) {
      suffix_pool.push_back(s);
    }
  }
  NameTable table;
  std::set<std::string> used_names;
  for (int t = 0; t < n_traits; ++t) {
    std::string name, variant, alt;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw ConfigError("could not find unique trait names");
      const auto a = rng.below(n);
      const auto b = rng.below(n);
      const auto c = rng.below(n);
      const auto d = suffix_pool[rng.below(suffix_pool.size())];
      const auto e = suffix_pool[rng.below(suffix_pool.size())];
      if (a == b || a == c || b == c || a == d || b == d || c == d || a == e || b == e ||
          c == e || d == e) {
        continue;
      }
      name = atoms[a] + atoms[b] + atoms[c];
      variant = name + atoms[d];
      alt = name + atoms[e];
      if (used_names.count(name) || used_names.count(variant) || used_names.count(alt)) continue;
      break;
    }
    used_names.insert(name);
    used_names.insert(variant);
    used_names.insert(alt);
    table.traits.push_back(name);
    table.variants.push_back(variant);
    table.alt_variants.push_back(alt);
  }
  return table;
}

std::shared_ptr<SnpVocabulary> make_snp_vocab(int n_snps, Rng& rng) {
  static constexpr char kAlleles[] = {'A', 'T', 'C', 'G'};
  auto vocab = std::make_shared<SnpVocabulary>();
  vocab->entries.reserve(static_cast<std::size_t>(n_snps));
  for (int g = 0; g < n_snps; ++g) {
    // Fixed-width numbering keeps lexicographic order equal to index order.
    GenomicConcept snp{"rs" + std::to_string(100000 + g), kAlleles[rng.below(4)], g};
    vocab->lookup.emplace(std::make_pair(snp.rsid, snp.allele), g);
    vocab->entries.push_back(std::move(snp));
  }
  return vocab;
}

double draw_weight(double lo, double hi, double noise, Rng& rng) {
  double w = rng.uniform(lo, hi);
  if (noise > 0.0) w += rng.uniform(-noise, noise);
  return std::clamp(w, 0.05, 2.0);
}

WeightedPair make_term_snp_pair(const std::string& trait, const GenomicConcept& snp, double weight,
                                const std::string& source) {
  WeightedPair pair;
  pair.head = ConceptText{trait, trait};
  pair.tail = snp;
  pair.weight = weight;
  pair.task = TaskTag::TermSnp;
  pair.source = source;
  return pair;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_clusters < 2) {
    throw ConfigError("synthetic spec needs at least 2 clusters to define negatives");
  }
  if (n_traits < n_clusters || n_snps < n_clusters) {
    throw ConfigError("every cluster needs at least one trait and one SNP");
  }
  if (snp_pairs_per_trait < 1 || eval_pairs_per_trait < 0 || term_term_pairs < 0 ||
      synonym_copies < 1) {
    throw ConfigError("pair counts must be non-negative (and >= 1 for TERM_SNP training)");
  }
  if (!(weight_min > 0.0) || weight_max < weight_min || weight_max > 2.0 || weight_noise < 0.0) {
    throw ConfigError("planted weights must satisfy 0 < min <= max <= 2");
  }
  auto traits_of = partition(n_traits, n_clusters);
  auto snps_of = partition(n_snps, n_clusters);
  auto t_members = members_by_cluster(traits_of, n_clusters);
  auto s_members = members_by_cluster(snps_of, n_clusters);
  long term_term_capacity = 0;
  for (int k = 0; k < n_clusters; ++k) {
    const auto traits_k = static_cast<long>(t_members[static_cast<std::size_t>(k)].size());
    const auto snps_k = static_cast<long>(s_members[static_cast<std::size_t>(k)].size());
    const long forced_per_trait = (snps_k + traits_k - 1) / traits_k;
    if (snp_pairs_per_trait < forced_per_trait) {
      throw ConfigError("snp_pairs_per_trait too small to cover every SNP in cluster " +
                        std::to_string(k));
    }
    if (snp_pairs_per_trait + eval_pairs_per_trait > snps_k) {
      throw ConfigError("requested more pairs per trait than intra-cluster SNPs in cluster " +
                        std::to_string(k));
    }
    term_term_capacity += traits_k * (traits_k - 1);
  }
  if (term_term_pairs > term_term_capacity) {
    throw ConfigError("requested more TERM_TERM pairs than possible intra-cluster pairs");
  }
}

int SyntheticBundle::trait_id(const std::string& normalized) const {
  for (std::size_t i = 0; i < trait_texts.size(); ++i) {
    if (trait_texts[i] == normalized) return static_cast<int>(i);
  }
  return -1;
}

SyntheticBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, fnv1a64("synthetic")));

  SyntheticBundle bundle;
  bundle.trait_cluster = partition(spec.n_traits, spec.n_clusters);
  bundle.snp_cluster = partition(spec.n_snps, spec.n_clusters);
  const auto trait_members = members_by_cluster(bundle.trait_cluster, spec.n_clusters);
  const auto snp_members = members_by_cluster(bundle.snp_cluster, spec.n_clusters);

  NameTable names = make_names(atom_pool(spec.word_atoms), spec.n_traits, rng);
  bundle.trait_texts = names.traits;
  for (int t = 0; t < spec.n_traits; ++t) {
    bundle.synonym_map[names.traits[static_cast<std::size_t>(t)]] =
        names.variants[static_cast<std::size_t>(t)];
  }
  bundle.snp_vocab = make_snp_vocab(spec.n_snps, rng);

  bundle.term_snp.task = TaskTag::TermSnp;
  bundle.term_snp.snp_vocab = bundle.snp_vocab.get();
  bundle.term_term.task = TaskTag::TermTerm;
  bundle.synonyms.task = TaskTag::Synonym;

  // Training TERM_SNP pairs: cover every SNP first, then fill each trait's
  // quota with unused intra-cluster partners.
  std::vector<std::set<int>> partners(static_cast<std::size_t>(spec.n_traits));
  for (int k = 0; k < spec.n_clusters; ++k) {
    const auto& traits_k = trait_members[static_cast<std::size_t>(k)];
    std::vector<int> snps_k = snp_members[static_cast<std::size_t>(k)];
    rng.shuffle(snps_k);
    for (std::size_t i = 0; i < snps_k.size(); ++i) {
      const int t = traits_k[i % traits_k.size()];
      partners[static_cast<std::size_t>(t)].insert(snps_k[i]);
    }
    for (int t : traits_k) {
      auto& mine = partners[static_cast<std::size_t>(t)];
      std::vector<int> available;
      for (int s : snp_members[static_cast<std::size_t>(k)]) {
        if (!mine.count(s)) available.push_back(s);
      }
      rng.shuffle(available);
      for (std::size_t i = 0; mine.size() < static_cast<std::size_t>(spec.snp_pairs_per_trait) &&
                              i < available.size();
           ++i) {
        mine.insert(available[i]);
      }
    }
  }
  for (int t = 0; t < spec.n_traits; ++t) {
    for (int s : partners[static_cast<std::size_t>(t)]) {
      const double w = draw_weight(spec.weight_min, spec.weight_max, spec.weight_noise, rng);
      bundle.term_snp.add(make_term_snp_pair(bundle.trait_texts[static_cast<std::size_t>(t)],
                                             bundle.snp_vocab->at(s), w, "synthetic"));
    }
  }

  // Held-out positives: intra-cluster combinations disjoint from training.
  for (int t = 0; t < spec.n_traits; ++t) {
    const int k = bundle.trait_cluster[static_cast<std::size_t>(t)];
    std::vector<int> unseen;
    for (int s : snp_members[static_cast<std::size_t>(k)]) {
      if (!partners[static_cast<std::size_t>(t)].count(s)) unseen.push_back(s);
    }
    rng.shuffle(unseen);
    for (int i = 0; i < spec.eval_pairs_per_trait && i < static_cast<int>(unseen.size()); ++i) {
      const double w = draw_weight(spec.weight_min, spec.weight_max, spec.weight_noise, rng);
      bundle.eval_positives.push_back(
          make_term_snp_pair(bundle.trait_texts[static_cast<std::size_t>(t)],
                             bundle.snp_vocab->at(unseen[static_cast<std::size_t>(i)]), w,
                             "synthetic-eval"));
    }
  }

  // TERM_TERM: sampled ordered intra-cluster trait pairs.
  std::vector<std::pair<int, int>> candidates;
  for (int k = 0; k < spec.n_clusters; ++k) {
    const auto& traits_k = trait_members[static_cast<std::size_t>(k)];
    for (int a : traits_k) {
      for (int b : traits_k) {
        if (a != b) candidates.emplace_back(a, b);
      }
    }
  }
  rng.shuffle(candidates);
  for (int i = 0; i < spec.term_term_pairs; ++i) {
    const auto& [a, b] = candidates[static_cast<std::size_t>(i)];
    WeightedPair pair;
    pair.head = ConceptText{bundle.trait_texts[static_cast<std::size_t>(a)],
                            bundle.trait_texts[static_cast<std::size_t>(a)]};
    pair.tail = ConceptText{bundle.trait_texts[static_cast<std::size_t>(b)],
                            bundle.trait_texts[static_cast<std::size_t>(b)]};
    pair.weight = 1.0;
    pair.task = TaskTag::TermTerm;
    pair.source = "synthetic";
    bundle.term_term.add(std::move(pair));
  }

  // Synonym pairs: each trait's surface forms (the name and two inflected
  // variants) pair up in both orders, repeated per `synonym_copies`.
  // Surfaces keep their own identities: contrasting a trait's surfaces
  // against each other keeps the alignment gradient alive far longer than
  // masking them would.
  auto add_synonym = [&bundle](const std::string& a, const std::string& b) {
    WeightedPair pair;
    pair.head = ConceptText{a, a};
    pair.tail = ConceptText{b, b};
    pair.weight = 1.0;
    pair.task = TaskTag::Synonym;
    pair.source = "synthetic";
    bundle.synonyms.add(std::move(pair));
  };
  for (int copy = 0; copy < spec.synonym_copies; ++copy) {
    for (int t = 0; t < spec.n_traits; ++t) {
      const auto& trait = bundle.trait_texts[static_cast<std::size_t>(t)];
      const auto& variant = bundle.synonym_map.at(trait);
      const auto& alt = names.alt_variants[static_cast<std::size_t>(t)];
      add_synonym(trait, variant);
      add_synonym(variant, trait);
      add_synonym(trait, alt);
      add_synonym(alt, trait);
    }
  }
  return bundle;
}

void CrossSourceSpec::validate() const {
  if (n_clusters < 2) throw ConfigError("cross-source spec needs at least 2 clusters");
  if (n_traits % n_clusters != 0 || n_snps % n_clusters != 0) {
    throw ConfigError("cross-source spec requires even cluster partitions");
  }
  const int snps_k = n_snps / n_clusters;
  const int half = snps_k / 2;
  if (half < train_pairs_per_trait_per_source + (eval_pairs_per_trait + 1) / 2) {
    throw ConfigError("per-source SNP halves too small for the requested pair counts");
  }
}

int CrossSourceBundle::snp_entity(int snp_index) const {
  return 2 * static_cast<int>(trait_texts.size()) + snp_index;
}

CrossSourceBundle generate_cross_source(const CrossSourceSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, fnv1a64("cross-source")));

  CrossSourceBundle bundle;
  bundle.trait_cluster = partition(spec.n_traits, spec.n_clusters);
  bundle.snp_cluster = partition(spec.n_snps, spec.n_clusters);
  const auto trait_members = members_by_cluster(bundle.trait_cluster, spec.n_clusters);
  const auto snp_members = members_by_cluster(bundle.snp_cluster, spec.n_clusters);

  NameTable names = make_names(atom_pool(spec.word_atoms), spec.n_traits, rng);
  bundle.trait_texts = names.traits;
  bundle.snp_vocab = make_snp_vocab(spec.n_snps, rng);
  bundle.term_snp.task = TaskTag::TermSnp;
  bundle.term_snp.snp_vocab = bundle.snp_vocab.get();
  bundle.n_entities = 2 * spec.n_traits + spec.n_snps;

  const int quota = spec.train_pairs_per_trait_per_source;
  for (int k = 0; k < spec.n_clusters; ++k) {
    const auto& traits_k = trait_members[static_cast<std::size_t>(k)];
    const auto& snps_k = snp_members[static_cast<std::size_t>(k)];
    const std::size_t half = snps_k.size() / 2;
    const std::vector<int> halves[2] = {
        std::vector<int>(snps_k.begin(), snps_k.begin() + static_cast<std::ptrdiff_t>(half)),
        std::vector<int>(snps_k.begin() + static_cast<std::ptrdiff_t>(half), snps_k.end())};

    for (int source = 0; source < 2; ++source) {
      std::vector<int> pool = halves[source];
      rng.shuffle(pool);
      std::vector<std::set<int>> partners(traits_k.size());
      for (std::size_t i = 0; i < pool.size(); ++i) {  // coverage first
        partners[i % traits_k.size()].insert(pool[i]);
      }
      for (std::size_t ti = 0; ti < traits_k.size(); ++ti) {
        auto& mine = partners[ti];
        std::vector<int> available;
        for (int s : halves[source]) {
          if (!mine.count(s)) available.push_back(s);
        }
        rng.shuffle(available);
        for (std::size_t i = 0; mine.size() < static_cast<std::size_t>(quota) && i < available.size(); ++i) {
          mine.insert(available[i]);
        }
        const int trait = traits_k[ti];
        const int trait_entity = source == 0 ? trait : spec.n_traits + trait;
        for (int s : mine) {
          const double w = draw_weight(0.5, 2.0, 0.0, rng);
          bundle.term_snp.add(make_term_snp_pair(bundle.trait_texts[static_cast<std::size_t>(trait)],
                                                 bundle.snp_vocab->at(s), w,
                                                 source == 0 ? "source_a" : "source_b"));
          bundle.baseline_triples.push_back(IdTriple{trait_entity, 0, bundle.snp_entity(s)});
        }
        // Held-out cross-source positives: this trait keyed by the OTHER
        // source's identifier, paired with SNPs only this source observed.
        std::vector<int> unseen;
        for (int s : halves[source]) {
          if (!mine.count(s)) unseen.push_back(s);
        }
        rng.shuffle(unseen);
        const int n_eval = (spec.eval_pairs_per_trait + (source == 0 ? 1 : 0)) / 2;
        const int other_entity = source == 0 ? spec.n_traits + trait : trait;
        for (int i = 0; i < n_eval && i < static_cast<int>(unseen.size()); ++i) {
          const int s = unseen[static_cast<std::size_t>(i)];
          bundle.eval_positives.push_back(make_term_snp_pair(
              bundle.trait_texts[static_cast<std::size_t>(trait)], bundle.snp_vocab->at(s), 1.0,
              "cross-eval"));
          bundle.eval_triples.push_back(IdTriple{other_entity, 0, bundle.snp_entity(s)});
        }
      }
    }
  }
  return bundle;
}

}  // namespace unirep
