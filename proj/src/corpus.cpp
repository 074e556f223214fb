#include "unirep/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace unirep {

std::string_view to_string(TaskTag task) {
  switch (task) {
    case TaskTag::TermSnp: return "TERM_SNP";
    case TaskTag::TermTerm: return "TERM_TERM";
    case TaskTag::Synonym: return "SYNONYM";
  }
  return "?";
}

TaskTag task_from_string(std::string_view s) {
  if (s == "TERM_SNP") return TaskTag::TermSnp;
  if (s == "TERM_TERM") return TaskTag::TermTerm;
  if (s == "SYNONYM") return TaskTag::Synonym;
  throw DataError("unknown task tag: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Text normalization.

namespace {

// Folds a handful of common compatibility characters into their plain
// equivalents. Full Unicode normalization is out of scope; every mapping
// below lands on characters that are fixed points of this function, which
// keeps normalization idempotent.
void append_folded(std::string& out, char32_t cp) {
  // Fullwidth ASCII block.
  if (cp >= 0xFF01 && cp <= 0xFF5E) {
    cp = cp - 0xFF01 + 0x21;
  }
  switch (cp) {
    case 0x00A0:  // no-break space
    case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004:
    case 0x2005: case 0x2006: case 0x2007: case 0x2008: case 0x2009:
    case 0x200A: case 0x202F: case 0x205F: case 0x3000:
      out.push_back(' ');
      return;
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
    case 0x2015: case 0x2212:
      out.push_back('-');
      return;
    case 0x2018: case 0x2019: out.push_back('\''); return;
    case 0x201C: case 0x201D: out.push_back('"'); return;
    case 0xFB00: out += "ff"; return;
    case 0xFB01: out += "fi"; return;
    case 0xFB02: out += "fl"; return;
    case 0xFB03: out += "ffi"; return;
    case 0xFB04: out += "ffl"; return;
    case 0x00B5: cp = 0x03BC; break;  // micro sign -> Greek mu
    default: break;
  }
  // Lowercase: ASCII plus the Latin-1 uppercase range (except multiplication
  // sign at 0xD7).
  if (cp >= 'A' && cp <= 'Z') {
    cp += 0x20;
  } else if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) {
    cp += 0x20;
  }
  // Re-encode as UTF-8.
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one UTF-8 code point; malformed bytes pass through as U+FFFD-free
// single bytes so normalization still terminates on arbitrary input.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char c = s[i];
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    extra = 3;
    cp = c & 0x07;
  } else {
    ++i;
    return c;
  }
  if (i + static_cast<std::size_t>(extra) >= s.size()) {
    ++i;
    return c;
  }
  for (int k = 1; k <= extra; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
      ++i;
      return c;
    }
    cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  }
  i += 1 + extra;
  return cp;
}

}  // namespace

ConceptText normalize_text(std::string_view raw) {
  std::string folded;
  folded.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    append_folded(folded, decode_utf8(raw, i));
  }
  // Collapse whitespace runs and trim.
  std::string normalized;
  normalized.reserve(folded.size());
  bool pending_space = false;
  for (char c : folded) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      pending_space = !normalized.empty();
      continue;
    }
    if (pending_space) {
      normalized.push_back(' ');
      pending_space = false;
    }
    normalized.push_back(c);
  }
  if (normalized.empty()) {
    throw DataError("rejected record: text is empty after normalization");
  }
  return ConceptText{std::string(raw), std::move(normalized)};
}

bool is_normalized(std::string_view text) {
  if (text.empty()) return false;
  try {
    return normalize_text(text).normalized == text;
  } catch (const DataError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------

bool valid_rsid(std::string_view s) {
  if (s.size() < 3 || s[0] != 'r' || s[1] != 's') return false;
  return std::all_of(s.begin() + 2, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool valid_allele(char c) { return c == 'A' || c == 'T' || c == 'C' || c == 'G'; }

int SnpVocabulary::find(const std::string& rsid, char allele) const {
  auto it = lookup.find({rsid, allele});
  return it == lookup.end() ? -1 : it->second;
}

const GenomicConcept& SnpVocabulary::at(int index) const {
  if (index < 0 || index >= size()) {
    throw DataError("SNP index " + std::to_string(index) + " out of range (vocabulary size " +
                    std::to_string(size()) + ")");
  }
  return entries[static_cast<std::size_t>(index)];
}

SnpVocabulary SnpVocabulary::from_keys(const std::set<std::pair<std::string, char>>& keys) {
  SnpVocabulary vocab;
  vocab.entries.reserve(keys.size());
  for (const auto& [rsid, allele] : keys) {  // std::set iterates in sorted order
    int index = static_cast<int>(vocab.entries.size());
    vocab.entries.push_back(GenomicConcept{rsid, allele, index});
    vocab.lookup.emplace(std::make_pair(rsid, allele), index);
  }
  return vocab;
}

void PairDataset::add(WeightedPair pair) {
  if (pair.task != task) {
    throw DataError("pair task does not match dataset task");
  }
  if (!(pair.weight > 0.0)) {
    throw DataError("pair weight must be positive");
  }
  if (task == TaskTag::TermSnp) {
    if (!pair.tail_is_snp()) throw DataError("TERM_SNP pair requires a genomic tail");
    if (snp_vocab == nullptr || pair.tail_snp().index < 0 || pair.tail_snp().index >= snp_vocab->size()) {
      throw DataError("TERM_SNP pair index outside the vocabulary");
    }
  } else if (pair.tail_is_snp()) {
    throw DataError(std::string(to_string(task)) + " pair requires a text tail");
  }
  concept_vocab.insert(pair.head.normalized);
  if (!pair.tail_is_snp()) concept_vocab.insert(pair.tail_text().normalized);
  pairs.push_back(std::move(pair));
}

void PairDataset::validate() const {
  for (const auto& p : pairs) {
    if (p.task != task) throw DataError("dataset is not task-homogeneous");
    if (!(p.weight > 0.0)) throw DataError("dataset contains a non-positive weight");
    if (task == TaskTag::TermSnp) {
      if (!p.tail_is_snp() || snp_vocab == nullptr) throw DataError("TERM_SNP dataset without SNP tails");
      if (p.tail_snp().index < 0 || p.tail_snp().index >= snp_vocab->size()) {
        throw DataError("SNP index outside the vocabulary");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// TSV scaffolding shared by all parsers.

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Streams data rows of a TSV file to `handle(line_number, fields)`. The
// header row is validated against `expected` when non-empty.
template <typename Handler>
std::size_t for_each_row(const std::filesystem::path& path,
                         const std::vector<std::string>& expected,
                         std::vector<RowError>& errors, Handler&& handle) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::string line;
  bool saw_header = false;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tsv(line);
    if (!saw_header) {
      saw_header = true;
      if (!expected.empty()) {
        if (fields.size() < expected.size()) {
          throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing column(s); expected " +
                          std::to_string(expected.size()) + " columns");
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
          if (fields[i] != expected[i]) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected column '" +
                            expected[i] + "', found '" + fields[i] + "'");
          }
        }
      }
      continue;
    }
    ++data_rows;
    if (!expected.empty() && fields.size() < expected.size()) {
      errors.push_back({path.string(), line_no, "missing column(s)"});
      continue;
    }
    handle(line_no, fields);
  }
  if (!saw_header && !expected.empty()) {
    throw DataError(path.string() + ": empty file, header row required");
  }
  return data_rows;
}

const std::vector<std::string> kAssociationHeader = {
    "study_id", "trait_text", "mapped_trait", "rsid", "allele", "effect_size", "effect_type"};
const std::vector<std::string> kEqtlRawHeader = {
    "study_id", "trait_text", "rsid", "allele", "tissue", "pve", "effect_size", "effect_type"};
const std::vector<std::string> kCorrelationHeader = {"phenotype_text", "rsid", "allele", "correlation"};

}  // namespace

ParseResult<AssociationRecord> parse_association_table(const std::filesystem::path& path,
                                                       SourceKind kind) {
  ParseResult<AssociationRecord> result;
  const std::string source = kind == SourceKind::Gwas ? "gwas" : "eqtl";
  result.rows = for_each_row(path, kAssociationHeader, result.errors,
                             [&](std::size_t line_no, const std::vector<std::string>& f) {
    const std::string& rsid = f[3];
    const std::string& allele = f[4];
    if (!valid_rsid(rsid)) {
      result.errors.push_back({path.string(), line_no, "malformed rsid '" + rsid + "'"});
      return;
    }
    if (allele.size() != 1 || !valid_allele(allele[0])) {
      result.errors.push_back({path.string(), line_no, "complex or invalid allele '" + allele + "'"});
      return;
    }
    double effect = 0.0;
    if (!parse_double(f[5], effect)) {
      result.errors.push_back({path.string(), line_no, "non-numeric effect_size '" + f[5] + "'"});
      return;
    }
    if (f[6] != "beta" && f[6] != "odds_ratio") {
      result.errors.push_back({path.string(), line_no, "unknown effect_type '" + f[6] + "'"});
      return;
    }
    // Both the study's own phrase and the mapped name produce records.
    std::size_t emitted = 0;
    for (const std::string* phrase : {&f[1], &f[2]}) {
      if (phrase->empty()) continue;
      try {
        AssociationRecord rec;
        rec.study_id = f[0];
        rec.trait = normalize_text(*phrase).normalized;
        rec.rsid = rsid;
        rec.allele = allele[0];
        rec.effect = std::abs(effect);
        rec.effect_type = f[6];
        rec.source = source;
        result.records.push_back(std::move(rec));
        ++emitted;
      } catch (const DataError&) {
        // whitespace-only phrase: fall through, maybe the other one is usable
      }
    }
    if (emitted == 0) {
      result.errors.push_back({path.string(), line_no, "no usable trait phrase"});
    }
  });
  return result;
}

ParseResult<EqtlRecord> parse_eqtl_raw(const std::filesystem::path& path) {
  ParseResult<EqtlRecord> result;
  result.rows = for_each_row(path, kEqtlRawHeader, result.errors,
                             [&](std::size_t line_no, const std::vector<std::string>& f) {
    if (!valid_rsid(f[2])) {
      result.errors.push_back({path.string(), line_no, "malformed rsid '" + f[2] + "'"});
      return;
    }
    if (f[3].size() != 1 || !valid_allele(f[3][0])) {
      result.errors.push_back({path.string(), line_no, "complex or invalid allele '" + f[3] + "'"});
      return;
    }
    double pve = 0.0, effect = 0.0;
    if (!parse_double(f[5], pve) || !parse_double(f[6], effect)) {
      result.errors.push_back({path.string(), line_no, "non-numeric pve or effect_size"});
      return;
    }
    try {
      EqtlRecord rec;
      rec.assoc.study_id = f[0];
      rec.assoc.trait = normalize_text(f[1]).normalized;
      rec.assoc.rsid = f[2];
      rec.assoc.allele = f[3][0];
      rec.assoc.effect = std::abs(effect);
      rec.assoc.effect_type = f[7];
      rec.assoc.source = "eqtl";
      rec.tissue = f[4];
      rec.pve = pve;
      result.records.push_back(std::move(rec));
    } catch (const DataError& e) {
      result.errors.push_back({path.string(), line_no, e.what()});
    }
  });
  return result;
}

std::vector<AssociationRecord> select_eqtl(const std::vector<EqtlRecord>& records,
                                           int top_tissues, int top_per_tissue) {
  if (top_tissues < 1 || top_per_tissue < 1) {
    throw ConfigError("eQTL selection requires positive top-k values");
  }
  std::map<std::string, std::size_t> tissue_counts;
  for (const auto& r : records) ++tissue_counts[r.tissue];
  // Most frequent tissues first; lexicographic tie-break keeps this stable.
  std::vector<std::pair<std::string, std::size_t>> ranked(tissue_counts.begin(), tissue_counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<std::string> kept_tissues;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(top_tissues); ++i) {
    kept_tissues.insert(ranked[i].first);
  }
  std::map<std::string, std::vector<const EqtlRecord*>> by_tissue;
  for (const auto& r : records) {
    if (kept_tissues.count(r.tissue)) by_tissue[r.tissue].push_back(&r);
  }
  std::vector<AssociationRecord> out;
  for (auto& [tissue, group] : by_tissue) {
    std::sort(group.begin(), group.end(), [](const EqtlRecord* a, const EqtlRecord* b) {
      if (a->pve != b->pve) return a->pve > b->pve;
      if (a->assoc.rsid != b->assoc.rsid) return a->assoc.rsid < b->assoc.rsid;
      return a->assoc.allele < b->assoc.allele;
    });
    for (std::size_t i = 0; i < group.size() && i < static_cast<std::size_t>(top_per_tissue); ++i) {
      out.push_back(group[i]->assoc);
    }
  }
  return out;
}

SnpVocabulary build_snp_vocab(const std::vector<AssociationRecord>& gwas_records,
                              const std::vector<AssociationRecord>& eqtl_records,
                              int min_traits) {
  if (min_traits < 1) throw ConfigError("min_traits must be >= 1");
  std::map<std::pair<std::string, char>, std::set<std::string>> gwas_traits;
  for (const auto& r : gwas_records) {
    if (!valid_allele(r.allele)) continue;
    gwas_traits[{r.rsid, r.allele}].insert(r.trait);
  }
  std::set<std::pair<std::string, char>> keys;
  for (const auto& [key, traits] : gwas_traits) {
    if (traits.size() >= static_cast<std::size_t>(min_traits)) keys.insert(key);
  }
  for (const auto& r : eqtl_records) {
    if (valid_allele(r.allele)) keys.insert({r.rsid, r.allele});
  }
  if (keys.empty()) {
    throw ConfigError("SNP vocabulary is empty after filtering");
  }
  return SnpVocabulary::from_keys(keys);
}

std::vector<WeightedPair> normalize_weights(const std::vector<AssociationRecord>& records,
                                            const SnpVocabulary& vocab, double cap,
                                            NormalizeStats* stats) {
  if (!(cap > 0.0)) throw ConfigError("weight cap must be positive");
  NormalizeStats local;
  NormalizeStats& st = stats ? *stats : local;

  struct GroupAgg {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<GroupKey, GroupAgg> groups;
  struct Usable {
    const AssociationRecord* rec;
    int snp_index;
  };
  std::vector<Usable> usable;
  usable.reserve(records.size());
  for (const auto& r : records) {
    if (!(std::abs(r.effect) > 0.0)) {
      ++st.dropped_records;
      continue;
    }
    int idx = vocab.find(r.rsid, r.allele);
    if (idx < 0) {
      ++st.skipped_unknown_snp;
      continue;
    }
    usable.push_back({&r, idx});
    auto& g = groups[{r.study_id, r.trait}];
    g.sum += std::abs(r.effect);
    g.n += 1;
  }
  std::set<GroupKey> dropped;
  for (const auto& [key, agg] : groups) {
    if (!(agg.sum > 0.0)) dropped.insert(key);
  }
  st.dropped_groups = dropped.size();

  std::vector<WeightedPair> out;
  out.reserve(usable.size());
  for (const auto& u : usable) {
    GroupKey key{u.rec->study_id, u.rec->trait};
    if (dropped.count(key)) continue;
    const auto& agg = groups.at(key);
    const double mean = agg.sum / static_cast<double>(agg.n);
    WeightedPair pair;
    pair.head = ConceptText{u.rec->trait, u.rec->trait};
    GenomicConcept snp = vocab.at(u.snp_index);
    pair.tail = snp;
    pair.weight = std::min(std::abs(u.rec->effect) / mean, cap);
    pair.task = TaskTag::TermSnp;
    pair.source = u.rec->source;
    pair.group = key;
    out.push_back(std::move(pair));
  }
  return out;
}

CorrelationParse parse_correlations(const std::filesystem::path& path, double threshold,
                                    const SnpVocabulary& vocab, double cap) {
  if (!(threshold > 0.0)) throw ConfigError("correlation threshold must be positive");
  if (!(cap > 0.0)) throw ConfigError("weight cap must be positive");
  CorrelationParse result;
  struct Row {
    std::string trait;
    int snp_index;
    double abs_corr;
  };
  std::vector<Row> retained;
  result.rows = for_each_row(path, kCorrelationHeader, result.errors,
                             [&](std::size_t line_no, const std::vector<std::string>& f) {
    if (!valid_rsid(f[1])) {
      result.errors.push_back({path.string(), line_no, "malformed rsid '" + f[1] + "'"});
      return;
    }
    if (f[2].size() != 1 || !valid_allele(f[2][0])) {
      result.errors.push_back({path.string(), line_no, "complex or invalid allele '" + f[2] + "'"});
      return;
    }
    double corr = 0.0;
    if (!parse_double(f[3], corr)) {
      result.errors.push_back({path.string(), line_no, "non-numeric correlation '" + f[3] + "'"});
      return;
    }
    if (corr < -1.0 || corr > 1.0) {
      result.errors.push_back({path.string(), line_no, "correlation outside [-1, 1]"});
      return;
    }
    if (std::abs(corr) < threshold) {
      ++result.filtered;  // filtered, not an error
      return;
    }
    int idx = vocab.find(f[1], f[2][0]);
    if (idx < 0) {
      result.errors.push_back({path.string(), line_no, "SNP not in vocabulary: " + f[1] + "_" + f[2]});
      return;
    }
    try {
      retained.push_back({normalize_text(f[0]).normalized, idx, std::abs(corr)});
    } catch (const DataError& e) {
      result.errors.push_back({path.string(), line_no, e.what()});
    }
  });

  result.dataset.task = TaskTag::TermSnp;
  result.dataset.snp_vocab = &vocab;
  if (retained.empty()) return result;
  double mean = 0.0;
  for (const auto& r : retained) mean += r.abs_corr;
  mean /= static_cast<double>(retained.size());
  for (const auto& r : retained) {
    WeightedPair pair;
    pair.head = ConceptText{r.trait, r.trait};
    pair.tail = vocab.at(r.snp_index);
    pair.weight = std::min(r.abs_corr / mean, cap);
    pair.task = TaskTag::TermSnp;
    pair.source = "biobank";
    result.dataset.add(std::move(pair));
  }
  return result;
}

namespace {

TripleParse parse_pair_rows(const std::filesystem::path& path, TaskTag task,
                            const std::string& source) {
  TripleParse result;
  result.dataset.task = task;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  result.rows = for_each_row(path, {}, result.errors,
                             [&](std::size_t line_no, const std::vector<std::string>& f) {
    if (f.size() < 2) {
      result.errors.push_back({path.string(), line_no, "expected at least 2 columns"});
      return;
    }
    const bool has_relation = f.size() >= 3;
    const std::string& head_raw = f[0];
    const std::string& tail_raw = has_relation ? f[2] : f[1];
    const std::string relation = has_relation ? f[1] : std::string{};
    try {
      ConceptText head = normalize_text(head_raw);
      ConceptText tail = normalize_text(tail_raw);
      if (head.normalized == tail.normalized) {
        ++result.self_pairs;
        return;
      }
      if (!seen.insert({head.normalized, relation, tail.normalized}).second) {
        ++result.duplicates;
        return;
      }
      WeightedPair pair;
      pair.head = std::move(head);
      pair.tail = std::move(tail);
      pair.weight = 1.0;
      pair.task = task;
      pair.source = source;
      pair.relation = relation;
      result.dataset.add(std::move(pair));
    } catch (const DataError& e) {
      result.errors.push_back({path.string(), line_no, e.what()});
    }
  });
  return result;
}

}  // namespace

TripleParse parse_triples(const std::filesystem::path& path, const std::string& source) {
  return parse_pair_rows(path, TaskTag::TermTerm, source);
}

TripleParse parse_synonyms(const std::filesystem::path& path, const std::string& source) {
  return parse_pair_rows(path, TaskTag::Synonym, source);
}

// ---------------------------------------------------------------------------
// Canonical pair file and vocabulary files.

namespace {

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

}  // namespace

void write_canonical_pairs(const std::filesystem::path& path, const PairDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "head\ttail_kind\ttail\tweight\ttask\tsource\n";
  for (const auto& p : dataset.pairs) {
    out << p.head.normalized << '\t' << (p.tail_is_snp() ? "SNP" : "TERM") << '\t'
        << p.tail_label() << '\t' << format_weight(p.weight) << '\t' << to_string(p.task)
        << '\t' << p.source << '\n';
  }
  if (!out) throw DataError("short write to " + path.string());
}

PairDataset read_canonical_pairs(const std::filesystem::path& path, const SnpVocabulary* vocab) {
  PairDataset dataset;
  std::vector<RowError> errors;
  bool first = true;
  for_each_row(path, {"head", "tail_kind", "tail", "weight", "task", "source"}, errors,
               [&](std::size_t line_no, const std::vector<std::string>& f) {
    double weight = 0.0;
    if (!parse_double(f[3], weight)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad weight '" + f[3] + "'");
    }
    WeightedPair pair;
    pair.head = ConceptText{f[0], f[0]};
    pair.weight = weight;
    pair.task = task_from_string(f[4]);
    pair.source = f[5];
    if (first) {
      dataset.task = pair.task;
      if (pair.task == TaskTag::TermSnp) {
        if (vocab == nullptr) throw DataError(path.string() + ": TERM_SNP pairs need a vocabulary");
        dataset.snp_vocab = vocab;
      }
      first = false;
    }
    if (f[1] == "SNP") {
      auto us = f[2].rfind('_');
      if (us == std::string::npos || us + 2 != f[2].size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad SNP label '" + f[2] + "'");
      }
      std::string rsid = f[2].substr(0, us);
      char allele = f[2][us + 1];
      int idx = vocab ? vocab->find(rsid, allele) : -1;
      if (idx < 0) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": SNP not in vocabulary: " + f[2]);
      }
      pair.tail = vocab->at(idx);
    } else {
      pair.tail = ConceptText{f[2], f[2]};
    }
    dataset.add(std::move(pair));
  });
  if (!errors.empty()) {
    throw DataError(errors.front().where() + ": " + errors.front().message);
  }
  return dataset;
}

void write_snp_vocab(const std::filesystem::path& path, const SnpVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "index\trsid\tallele\n";
  for (const auto& e : vocab.entries) {
    out << e.index << '\t' << e.rsid << '\t' << e.allele << '\n';
  }
  if (!out) throw DataError("short write to " + path.string());
}

SnpVocabulary read_snp_vocab(const std::filesystem::path& path) {
  std::vector<RowError> errors;
  SnpVocabulary vocab;
  for_each_row(path, {"index", "rsid", "allele"}, errors,
               [&](std::size_t line_no, const std::vector<std::string>& f) {
    int index = 0;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), index);
    if (ec != std::errc{} || ptr != f[0].data() + f[0].size() ||
        index != static_cast<int>(vocab.entries.size()) || !valid_rsid(f[1]) ||
        f[2].size() != 1 || !valid_allele(f[2][0])) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed vocabulary row");
    }
    vocab.entries.push_back(GenomicConcept{f[1], f[2][0], index});
    vocab.lookup.emplace(std::make_pair(f[1], f[2][0]), index);
  });
  if (!errors.empty()) {
    throw DataError(errors.front().where() + ": " + errors.front().message);
  }
  return vocab;
}

}  // namespace unirep
