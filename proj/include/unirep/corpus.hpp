#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unirep/common.hpp"

namespace unirep {

enum class TaskTag { TermSnp, TermTerm, Synonym };

std::string_view to_string(TaskTag task);
TaskTag task_from_string(std::string_view s);

// A free-text biomedical concept. `normalized` is lowercased,
// compatibility-folded, whitespace-collapsed, and is the identity used
// everywhere downstream.
struct ConceptText {
  std::string raw;
  std::string normalized;

  bool operator==(const ConceptText& o) const { return normalized == o.normalized; }
};

// Throws DataError when nothing is left after normalization.
ConceptText normalize_text(std::string_view raw);
bool is_normalized(std::string_view text);

// A SNP plus risk allele, e.g. rs6983267_G. `index` is its row in the
// vocabulary it belongs to (-1 when unattached).
struct GenomicConcept {
  std::string rsid;
  char allele = 'A';
  int index = -1;

  std::string label() const { return rsid + "_" + allele; }
  bool operator==(const GenomicConcept& o) const { return rsid == o.rsid && allele == o.allele; }
};

bool valid_rsid(std::string_view s);
bool valid_allele(char c);

struct GroupKey {
  std::string study;
  std::string trait;

  auto operator<=>(const GroupKey&) const = default;
};

struct WeightedPair {
  ConceptText head;
  std::variant<ConceptText, GenomicConcept> tail;
  double weight = 1.0;
  TaskTag task = TaskTag::TermTerm;
  std::string source;
  std::optional<GroupKey> group;
  std::string relation;  // metadata from 3-column relatedness files
  // Concept identities for duplicate-positive masking, when the source
  // knows them (synonym tables group surfaces under one concept). Unset
  // means the normalized surface text is the identity.
  std::int64_t head_concept = -1;
  std::int64_t tail_concept = -1;

  bool tail_is_snp() const { return std::holds_alternative<GenomicConcept>(tail); }
  const GenomicConcept& tail_snp() const { return std::get<GenomicConcept>(tail); }
  const ConceptText& tail_text() const { return std::get<ConceptText>(tail); }
  std::string tail_label() const { return tail_is_snp() ? tail_snp().label() : tail_text().normalized; }
};

struct SnpVocabulary {
  std::vector<GenomicConcept> entries;                    // index i <-> entries[i]
  std::map<std::pair<std::string, char>, int> lookup;

  int size() const { return static_cast<int>(entries.size()); }
  int find(const std::string& rsid, char allele) const;
  const GenomicConcept& at(int index) const;

  // Builds a vocabulary with deterministic (rsid, allele) ordering.
  static SnpVocabulary from_keys(const std::set<std::pair<std::string, char>>& keys);
};

struct PairDataset {
  TaskTag task = TaskTag::TermTerm;
  std::vector<WeightedPair> pairs;
  std::set<std::string> concept_vocab;                    // normalized texts
  const SnpVocabulary* snp_vocab = nullptr;               // TermSnp only

  std::size_t size() const { return pairs.size(); }
  void add(WeightedPair pair);                            // enforces pair invariants
  void validate() const;                                  // throws DataError
};

// ---------------------------------------------------------------------------
// Parsing. Parsers never abort a file on a bad row; accepted + rejected
// always accounts for every data row.

struct RowError {
  std::string file;
  std::size_t line = 0;
  std::string message;

  std::string where() const { return file + ":" + std::to_string(line); }
};

enum class SourceKind { Gwas, Eqtl };

struct AssociationRecord {
  std::string study_id;
  std::string trait;       // normalized
  std::string rsid;
  char allele = 'A';
  double effect = 0.0;     // magnitude of beta / odds ratio
  std::string effect_type; // "beta" or "odds_ratio"
  std::string source;      // "gwas" or "eqtl"
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<RowError> errors;
  std::size_t rows = 0;  // data rows seen (comments and header excluded)
};

// Tab-separated, header row, '#' comments. Columns: study_id, trait_text,
// mapped_trait, rsid, allele, effect_size, effect_type. Emits one record per
// non-empty trait phrase, so a row with both phrases yields two records.
ParseResult<AssociationRecord> parse_association_table(const std::filesystem::path& path,
                                                       SourceKind kind);

// Raw eQTL rows carrying tissue and PVE, for upstream selection. Columns:
// study_id, trait_text, rsid, allele, tissue, pve, effect_size, effect_type.
struct EqtlRecord {
  AssociationRecord assoc;
  std::string tissue;
  double pve = 0.0;
};

ParseResult<EqtlRecord> parse_eqtl_raw(const std::filesystem::path& path);

// Keeps records from the `top_tissues` most frequent tissues, then the
// `top_per_tissue` largest-PVE records within each kept tissue.
std::vector<AssociationRecord> select_eqtl(const std::vector<EqtlRecord>& records,
                                           int top_tissues, int top_per_tissue);

// GWAS SNPs need >= min_traits distinct traits; eQTL-selected SNPs are kept
// as-is. Only simple A/T/C/G alleles survive. Throws ConfigError when the
// result is empty.
SnpVocabulary build_snp_vocab(const std::vector<AssociationRecord>& gwas_records,
                              const std::vector<AssociationRecord>& eqtl_records,
                              int min_traits = 2);

// Per-(study, trait) group: weight = min(|effect| / group mean |effect|, cap).
// Groups with zero mean are dropped and counted in `dropped_groups`.
struct NormalizeStats {
  std::size_t dropped_groups = 0;
  std::size_t dropped_records = 0;  // zero-magnitude effects
  std::size_t skipped_unknown_snp = 0;
};

std::vector<WeightedPair> normalize_weights(const std::vector<AssociationRecord>& records,
                                            const SnpVocabulary& vocab, double cap = 2.0,
                                            NormalizeStats* stats = nullptr);

// Biobank correlation rows: phenotype_text, rsid, allele, correlation.
// Rows pass when |correlation| >= threshold; weights are |correlation|
// rescaled by the retained-set mean and capped.
struct CorrelationParse {
  PairDataset dataset;
  std::vector<RowError> errors;
  std::size_t rows = 0;
  std::size_t filtered = 0;  // below-threshold rows; rows = pairs + errors + filtered
};

CorrelationParse parse_correlations(const std::filesystem::path& path, double threshold,
                                    const SnpVocabulary& vocab, double cap = 2.0);

// Knowledge-graph relatedness rows: (head, tail) or (head, relation, tail).
struct TripleParse {
  PairDataset dataset;
  std::vector<RowError> errors;
  std::size_t rows = 0;
  std::size_t self_pairs = 0;
  std::size_t duplicates = 0;
};

TripleParse parse_triples(const std::filesystem::path& path, const std::string& source = "kg");
TripleParse parse_synonyms(const std::filesystem::path& path, const std::string& source = "synonyms");

// ---------------------------------------------------------------------------
// Canonical pair file: head, tail_kind, tail, weight, task, source.

void write_canonical_pairs(const std::filesystem::path& path, const PairDataset& dataset);
PairDataset read_canonical_pairs(const std::filesystem::path& path, const SnpVocabulary* vocab);

void write_snp_vocab(const std::filesystem::path& path, const SnpVocabulary& vocab);
SnpVocabulary read_snp_vocab(const std::filesystem::path& path);

}  // namespace unirep
