#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "unirep/corpus.hpp"
#include "unirep/rng.hpp"

using namespace unirep;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("normalize_text basic forms") {
  CHECK(normalize_text("Type 1  Diabetes ").normalized == "type 1 diabetes");
  CHECK(normalize_text("colorectal cancer").normalized == "colorectal cancer");
  CHECK_THROWS_AS(normalize_text("  "), DataError);
  CHECK_THROWS_AS(normalize_text(""), DataError);
}

TEST_CASE("normalize_text folds compatibility characters") {
  CHECK(normalize_text("naïve cells").normalized == "naïve cells");
  CHECK(normalize_text("ＡＢc").normalized == "abc");
  CHECK(normalize_text("x–y").normalized == "x-y");
  CHECK(normalize_text("ﬁbrosis").normalized == "fibrosis");
}

TEST_CASE("normalize_text is idempotent") {
  Rng rng(7);
  const std::string alphabet = "AZaz09 \t.,-'Ää";
  std::vector<std::string> samples = {"Type 1  Diabetes ", "ＡBC  def", "À propos",
                                      "a—b‘c’", "  x  "};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const auto len = 1 + rng.below(20);
    for (std::uint64_t j = 0; j < len; ++j) s.push_back(alphabet[rng.below(alphabet.size())]);
    samples.push_back(s);
  }
  for (const auto& s : samples) {
    try {
      auto once = normalize_text(s);
      auto twice = normalize_text(once.normalized);
      CHECK(once.normalized == twice.normalized);
    } catch (const DataError&) {
      // empty-after-normalization inputs have no fixed point to check
    }
  }
}

TEST_CASE("parse_association_table accepts and rejects rows") {
  auto path = write_temp("assoc_test.tsv",
                         "study_id\ttrait_text\tmapped_trait\trsid\tallele\teffect_size\teffect_type\n"
                         "S1\tcolorectal cancer\t\trs6983267\tG\t1.180\todds_ratio\n"
                         "S1\tsome trait\t\trs1\tAT\t1.0\todds_ratio\n"
                         "S2\tT2D\ttype 2 diabetes\trs7903146\tT\t1.37\todds_ratio\n"
                         "S3\tx\t\tnotanrsid\tA\t1.0\tbeta\n"
                         "S4\ty\t\trs2\tC\tabc\tbeta\n");
  auto result = parse_association_table(path, SourceKind::Gwas);
  CHECK(result.rows == 5);
  // Row 1 -> 1 record, row 3 -> 2 records (dual trait phrasing).
  REQUIRE(result.records.size() == 3);
  CHECK(result.records[0].trait == "colorectal cancer");
  CHECK(result.records[0].rsid == "rs6983267");
  CHECK(result.records[0].allele == 'G');
  CHECK(result.records[0].effect == doctest::Approx(1.180));
  CHECK(result.records[1].trait == "t2d");
  CHECK(result.records[2].trait == "type 2 diabetes");
  CHECK(result.errors.size() == 3);  // complex allele, bad rsid, bad effect
  // Accepted + rejected accounts for every row.
  CHECK(result.errors.size() + 2 == result.rows);
  for (const auto& e : result.errors) CHECK(e.line > 0);
}

TEST_CASE("parse_association_table rejects missing columns") {
  auto path = write_temp("assoc_missing.tsv", "study_id\ttrait_text\n");
  CHECK_THROWS_AS(parse_association_table(path, SourceKind::Gwas), DataError);
}

TEST_CASE("build_snp_vocab applies the min-traits rule and merges eQTL") {
  std::vector<AssociationRecord> gwas = {
      {"S1", "traitx", "rs1", 'A', 1.0, "beta", "gwas"},
      {"S1", "traity", "rs1", 'A', 1.0, "beta", "gwas"},
      {"S2", "traitx", "rs2", 'T', 1.0, "beta", "gwas"},
  };
  SUBCASE("gwas only") {
    auto vocab = build_snp_vocab(gwas, {}, 2);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.entries[0].rsid == "rs1");
    CHECK(vocab.entries[0].allele == 'A');
  }
  SUBCASE("eqtl sneaks rs2 back in") {
    std::vector<AssociationRecord> eqtl = {{"E1", "genez", "rs2", 'T', 0.5, "beta", "eqtl"}};
    auto vocab = build_snp_vocab(gwas, eqtl, 2);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.find("rs1", 'A') == 0);
    CHECK(vocab.find("rs2", 'T') == 1);
  }
  SUBCASE("empty vocabulary is a configuration error") {
    CHECK_THROWS_AS(build_snp_vocab({}, {}, 2), ConfigError);
  }
}

TEST_CASE("build_snp_vocab is order independent") {
  std::vector<AssociationRecord> gwas;
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    gwas.push_back({"S" + std::to_string(i % 3), "trait" + std::to_string(i % 7),
                    "rs" + std::to_string(100 + i % 5), "ATCG"[i % 4], 1.0, "beta", "gwas"});
  }
  auto sorted_vocab = build_snp_vocab(gwas, {}, 2);
  for (int round = 0; round < 5; ++round) {
    rng.shuffle(gwas);
    auto vocab = build_snp_vocab(gwas, {}, 2);
    REQUIRE(vocab.size() == sorted_vocab.size());
    for (int i = 0; i < vocab.size(); ++i) {
      CHECK(vocab.entries[i].rsid == sorted_vocab.entries[i].rsid);
      CHECK(vocab.entries[i].allele == sorted_vocab.entries[i].allele);
    }
  }
}

namespace {

SnpVocabulary tiny_vocab() {
  return SnpVocabulary::from_keys({{"rs1", 'A'}, {"rs2", 'T'}, {"rs3", 'G'}, {"rs5", 'A'}});
}

AssociationRecord rec(const std::string& study, const std::string& trait, const std::string& rsid,
                      char allele, double effect) {
  return {study, trait, rsid, allele, effect, "odds_ratio", "gwas"};
}

}  // namespace

TEST_CASE("normalize_weights divides by the group mean and caps") {
  auto vocab = tiny_vocab();
  SUBCASE("plain arithmetic") {
    std::vector<AssociationRecord> records = {rec("S1", "t", "rs1", 'A', 1.0),
                                              rec("S1", "t", "rs2", 'T', 2.0),
                                              rec("S1", "t", "rs3", 'G', 3.0)};
    auto pairs = normalize_weights(records, vocab, 2.0);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].weight == doctest::Approx(0.5));
    CHECK(pairs[1].weight == doctest::Approx(1.0));
    CHECK(pairs[2].weight == doctest::Approx(1.5));
  }
  SUBCASE("cap truncates") {
    std::vector<AssociationRecord> records = {rec("S1", "t", "rs1", 'A', 1.0),
                                              rec("S1", "t", "rs2", 'T', 1.0),
                                              rec("S1", "t", "rs3", 'G', 10.0)};
    auto pairs = normalize_weights(records, vocab, 2.0);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].weight == doctest::Approx(0.25));
    CHECK(pairs[1].weight == doctest::Approx(0.25));
    CHECK(pairs[2].weight == doctest::Approx(2.0));
  }
  SUBCASE("singleton group maps to exactly 1") {
    auto pairs = normalize_weights({rec("S9", "z", "rs1", 'A', 7.3)}, vocab, 2.0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].weight == doctest::Approx(1.0));
  }
  SUBCASE("zero-magnitude records are dropped, groups with zero mean too") {
    NormalizeStats stats;
    auto pairs = normalize_weights({rec("S1", "t", "rs1", 'A', 0.0)}, vocab, 2.0, &stats);
    CHECK(pairs.empty());
    CHECK(stats.dropped_records == 1);
  }
}

TEST_CASE("normalize_weights randomized invariants") {
  auto vocab = tiny_vocab();
  Rng rng(23);
  for (int round = 0; round < 20; ++round) {
    std::vector<AssociationRecord> records;
    const int n_groups = 1 + static_cast<int>(rng.below(5));
    for (int g = 0; g < n_groups; ++g) {
      const int n = 1 + static_cast<int>(rng.below(8));
      for (int i = 0; i < n; ++i) {
        records.push_back(rec("S" + std::to_string(g), "trait" + std::to_string(g),
                              vocab.entries[rng.below(4)].rsid,
                              vocab.entries[rng.below(4)].allele, 0.0));
      }
    }
    // Re-draw effects (allele may not match rsid's vocab entry; fix pairs).
    for (auto& r : records) {
      int idx = static_cast<int>(rng.below(4));
      r.rsid = vocab.entries[idx].rsid;
      r.allele = vocab.entries[idx].allele;
      r.effect = rng.uniform(0.05, 10.0);
    }
    // Pre-truncation weights (huge cap) have group mean exactly 1.
    auto uncapped = normalize_weights(records, vocab, 1e18);
    std::map<GroupKey, std::pair<double, int>> group_mean;
    for (const auto& p : uncapped) {
      auto& [sum, n] = group_mean[*p.group];
      sum += p.weight;
      n += 1;
    }
    for (const auto& [key, agg] : group_mean) {
      CHECK(agg.first / agg.second == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto capped = normalize_weights(records, vocab, 2.0);
    for (const auto& p : capped) {
      CHECK(p.weight > 0.0);
      CHECK(p.weight <= 2.0);
    }
  }
}

TEST_CASE("parse_correlations thresholds and validates") {
  auto vocab = tiny_vocab();
  auto path = write_temp("corr_test.tsv",
                         "phenotype_text\trsid\tallele\tcorrelation\n"
                         "hypertension\trs5\tA\t0.03\n"
                         "hypertension\trs5\tA\t-0.08\n"
                         "hypertension\trs1\tA\t1.7\n"
                         "asthma\trs2\tT\t0.5\n");
  auto result = parse_correlations(path, 0.05, vocab, 2.0);
  CHECK(result.rows == 4);
  REQUIRE(result.errors.size() == 1);  // correlation out of range
  CHECK(result.filtered == 1);
  REQUIRE(result.dataset.pairs.size() == 2);
  // Every row is accounted for.
  CHECK(result.dataset.pairs.size() + result.errors.size() + result.filtered == result.rows);
  // Retained |r| = {0.08, 0.5}; mean = 0.29.
  CHECK(result.dataset.pairs[0].weight == doctest::Approx(0.08 / 0.29));
  CHECK(result.dataset.pairs[1].weight == doctest::Approx(0.5 / 0.29));
  CHECK(result.dataset.task == TaskTag::TermSnp);
}

TEST_CASE("parse_triples keeps the relation, drops self-pairs and duplicates") {
  auto path = write_temp("triples_test.tsv",
                         "head\trelation\ttail\n"
                         "argatroban\tinteracts\tcyp3a4\n"
                         "aspirin\tinteracts\taspirin\n"
                         "argatroban\tinteracts\tcyp3a4\n"
                         "Warfarin \ttargets\tvkorc1\n");
  auto result = parse_triples(path);
  CHECK(result.rows == 4);
  CHECK(result.self_pairs == 1);
  CHECK(result.duplicates == 1);
  REQUIRE(result.dataset.pairs.size() == 2);
  CHECK(result.dataset.pairs.size() + result.errors.size() + result.self_pairs +
            result.duplicates ==
        result.rows);
  CHECK(result.dataset.pairs[0].head.normalized == "argatroban");
  CHECK(result.dataset.pairs[0].tail_text().normalized == "cyp3a4");
  CHECK(result.dataset.pairs[0].weight == 1.0);
  CHECK(result.dataset.pairs[0].relation == "interacts");
  CHECK(result.dataset.pairs[1].head.normalized == "warfarin");
}

TEST_CASE("parse_synonyms handles two-column rows and empty files") {
  auto path = write_temp("syn_test.tsv",
                         "term_a\tterm_b\n"
                         "arthritis arthritics\treiter's syndrome\n"
                         "asthma\tasthma\n");
  auto result = parse_synonyms(path);
  REQUIRE(result.dataset.pairs.size() == 1);
  CHECK(result.dataset.pairs[0].head.normalized == "arthritis arthritics");
  CHECK(result.dataset.pairs[0].tail_text().normalized == "reiter's syndrome");
  CHECK(result.dataset.task == TaskTag::Synonym);
  CHECK(result.self_pairs == 1);

  auto empty = write_temp("syn_empty.tsv", "term_a\tterm_b\n");
  auto empty_result = parse_synonyms(empty);
  CHECK(empty_result.dataset.pairs.empty());  // valid: a source can be ablated away
}

TEST_CASE("select_eqtl keeps top tissues and top PVE records") {
  std::vector<EqtlRecord> records;
  auto make = [](const std::string& tissue, double pve, const std::string& rsid) {
    EqtlRecord r;
    r.assoc = {"E1", "genex", rsid, 'A', 1.0, "beta", "eqtl"};
    r.tissue = tissue;
    r.pve = pve;
    return r;
  };
  records.push_back(make("liver", 0.9, "rs1"));
  records.push_back(make("liver", 0.5, "rs2"));
  records.push_back(make("liver", 0.1, "rs3"));
  records.push_back(make("brain", 0.8, "rs4"));
  records.push_back(make("kidney", 0.99, "rs5"));
  records.push_back(make("brain", 0.2, "rs6"));
  auto selected = select_eqtl(records, 2, 2);  // liver(3) and brain(2) survive
  REQUIRE(selected.size() == 4);
  std::set<std::string> rsids;
  for (const auto& r : selected) rsids.insert(r.rsid);
  CHECK(rsids == std::set<std::string>{"rs1", "rs2", "rs4", "rs6"});
}

TEST_CASE("canonical pair files round trip") {
  auto vocab = tiny_vocab();
  PairDataset dataset;
  dataset.task = TaskTag::TermSnp;
  dataset.snp_vocab = &vocab;
  WeightedPair p;
  p.head = ConceptText{"colorectal cancer", "colorectal cancer"};
  p.tail = vocab.at(2);
  p.weight = 1.1800000000000002;
  p.task = TaskTag::TermSnp;
  p.source = "gwas";
  dataset.add(p);
  auto path = std::filesystem::temp_directory_path() / "canonical_test.tsv";
  write_canonical_pairs(path, dataset);
  auto loaded = read_canonical_pairs(path, &vocab);
  REQUIRE(loaded.pairs.size() == 1);
  CHECK(loaded.pairs[0].head.normalized == "colorectal cancer");
  CHECK(loaded.pairs[0].tail_snp().index == 2);
  CHECK(loaded.pairs[0].weight == 1.1800000000000002);  // %.17g is lossless
  CHECK(loaded.task == TaskTag::TermSnp);
}

TEST_CASE("canonical files must be task-homogeneous") {
  auto path = write_temp("mixed_tasks.tsv",
                         "head\ttail_kind\ttail\tweight\ttask\tsource\n"
                         "a\tTERM\tb\t1\tTERM_TERM\tx\n"
                         "c\tTERM\td\t1\tSYNONYM\tx\n");
  CHECK_THROWS_AS(read_canonical_pairs(path, nullptr), DataError);
}

TEST_CASE("snp vocabulary file round trip") {
  auto vocab = tiny_vocab();
  auto path = std::filesystem::temp_directory_path() / "vocab_test.tsv";
  write_snp_vocab(path, vocab);
  auto loaded = read_snp_vocab(path);
  REQUIRE(loaded.size() == vocab.size());
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(loaded.entries[i].rsid == vocab.entries[i].rsid);
    CHECK(loaded.entries[i].allele == vocab.entries[i].allele);
    CHECK(loaded.find(vocab.entries[i].rsid, vocab.entries[i].allele) == i);
  }
}
