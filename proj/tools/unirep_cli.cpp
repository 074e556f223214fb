#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "unirep/baselines.hpp"
#include "unirep/config.hpp"
#include "unirep/eval.hpp"
#include "unirep/rng.hpp"
#include "unirep/synthetic.hpp"
#include "unirep/trainer.hpp"

namespace fs = std::filesystem;
using namespace unirep;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return RunConfig::from_string("");
  return RunConfig::load(args.config_path);
}

std::uint64_t pick_seed(const CommonArgs& args, const RunConfig& cfg) {
  return args.seed_set ? args.seed : cfg.get_u64("seed", 1);
}

fs::path ensure_out(const CommonArgs& args) {
  fs::path out = args.out_dir.empty() ? fs::path(".") : fs::path(args.out_dir);
  fs::create_directories(out);
  return out;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash missing file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return hex;
}

// Reproducibility record: config snapshot, seed and input fingerprints.
// Deliberately free of timestamps so identical runs write identical bytes.
void write_manifest(const fs::path& out, const std::string& command, const RunConfig& cfg,
                    std::uint64_t seed, const std::vector<fs::path>& inputs) {
  std::ofstream m(out / "manifest.txt");
  if (!m) throw DataError("cannot write manifest in " + out.string());
  m << "command=" << command << "\n";
  m << "seed=" << seed << "\n";
  for (const auto& p : inputs) {
    m << "input=" << p.string() << "\t" << file_hash(p) << "\n";
  }
  for (const auto& [k, v] : cfg.values()) {
    m << "config." << k << "=" << v << "\n";
  }
}

void write_rejects(const fs::path& out, const std::vector<RowError>& errors) {
  std::ofstream f(out / "rejects.tsv");
  f << "file\tline\tmessage\n";
  for (const auto& e : errors) {
    f << e.file << '\t' << e.line << '\t' << e.message << '\n';
  }
}

void write_pairs_with_header(const fs::path& path, const PairDataset& ds) {
  write_canonical_pairs(path, ds);
}

struct LoadedDatasets {
  SnpVocabulary vocab;
  PairDataset term_snp, term_term, synonyms;
  std::vector<const PairDataset*> list;
};

// Canonical pair files named in the config; missing keys simply leave the
// dataset empty, which is how source ablations run from the command line.
LoadedDatasets load_datasets(const RunConfig& cfg) {
  LoadedDatasets out;
  if (cfg.has("snp_vocab")) out.vocab = read_snp_vocab(cfg.get_path("snp_vocab"));
  if (cfg.has("pairs_term_snp")) {
    out.term_snp = read_canonical_pairs(cfg.get_path("pairs_term_snp"), &out.vocab);
    out.list.push_back(&out.term_snp);
  }
  if (cfg.has("pairs_term_term")) {
    out.term_term = read_canonical_pairs(cfg.get_path("pairs_term_term"), nullptr);
    out.list.push_back(&out.term_term);
  }
  if (cfg.has("pairs_synonym")) {
    out.synonyms = read_canonical_pairs(cfg.get_path("pairs_synonym"), nullptr);
    out.list.push_back(&out.synonyms);
  }
  return out;
}

std::vector<EvalPair> load_eval_pairs(const fs::path& path, const SnpVocabulary* vocab) {
  PairDataset ds = read_canonical_pairs(path, vocab);
  std::vector<EvalPair> pairs;
  pairs.reserve(ds.pairs.size());
  for (const auto& p : ds.pairs) pairs.push_back(EvalPair::from_weighted(p));
  return pairs;
}

KnownPositives load_known(const RunConfig& cfg, const SnpVocabulary* vocab,
                          std::vector<fs::path>& inputs) {
  KnownPositives known;
  if (!cfg.has("exclude_pairs")) return known;
  const std::string list = cfg.get_string("exclude_pairs", "");
  std::size_t start = 0;
  while (start < list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    fs::path path = list.substr(start, comma - start);
    if (!fs::exists(path)) throw ConfigError("exclude_pairs references missing file " + path.string());
    inputs.push_back(path);
    for (const auto& p : load_eval_pairs(path, vocab)) {
      known.emplace(p.head, p.tail_key());
    }
    start = comma + 1;
  }
  return known;
}

// Negative-candidate pool: full SNP vocabulary for head-anchored SNP tasks,
// otherwise the distinct concepts seen on the sampled side.
std::vector<PoolItem> build_pool(const std::vector<EvalPair>& positives, AnchorSide anchor,
                                 const SnpVocabulary* vocab, const KnownPositives& known) {
  std::vector<PoolItem> pool;
  if (anchor == AnchorSide::Head) {
    const bool snp_tails = !positives.empty() && positives.front().tail_is_snp;
    if (snp_tails) {
      if (vocab == nullptr) throw ConfigError("SNP-tailed evaluation needs a vocabulary");
      for (int i = 0; i < vocab->size(); ++i) pool.push_back(PoolItem::snp(i));
    } else {
      std::set<std::string> tails;
      for (const auto& p : positives) tails.insert(p.tail_text);
      for (const auto& [head, tail] : known) {
        if (tail.rfind("t:", 0) == 0) tails.insert(tail.substr(2));
      }
      for (const auto& t : tails) pool.push_back(PoolItem::term(t));
    }
  } else {
    std::set<std::string> heads;
    for (const auto& p : positives) heads.insert(p.head);
    for (const auto& [head, tail] : known) heads.insert(head);
    for (const auto& h : heads) pool.push_back(PoolItem::term(h));
  }
  return pool;
}

RelatedEvalConfig related_config(const RunConfig& cfg) {
  RelatedEvalConfig ecfg;
  ecfg.anchor = cfg.get_string("eval_anchor", "head") == "tail" ? AnchorSide::Tail
                                                                : AnchorSide::Head;
  ecfg.k_neg = cfg.get_int("k_neg", 1);
  ecfg.seeds = cfg.get_seeds("eval_seeds", {1, 2, 3, 4, 5});
  return ecfg;
}

void print_report(const std::string& name, const EvalReport& report) {
  std::printf("%s: %.4f +- %.4f  (%s)\n", name.c_str(), report.mean, report.stddev,
              report.config.c_str());
}

std::map<std::string, std::string> load_synonym_map(const fs::path& path) {
  std::map<std::string, std::string> map;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synonym map " + path.string());
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("synonym map line is not two columns: " + line);
    map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return map;
}

std::vector<IdTriple> load_id_triples(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triples file " + path.string());
  std::vector<IdTriple> triples;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    IdTriple t;
    if (std::sscanf(line.c_str(), "%d\t%d\t%d", &t.head, &t.relation, &t.tail) != 3) {
      throw DataError("malformed id triple: " + line);
    }
    triples.push_back(t);
  }
  return triples;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  const std::uint64_t seed = pick_seed(args, cfg);
  std::vector<fs::path> inputs;
  std::vector<RowError> all_errors;

  std::vector<AssociationRecord> gwas_records, eqtl_records;
  if (cfg.get_bool("use_gwas", true) && cfg.has("gwas")) {
    auto path = cfg.get_path("gwas");
    inputs.push_back(path);
    auto parsed = parse_association_table(path, SourceKind::Gwas);
    std::printf("gwas: %zu rows, %zu records, %zu rejected\n", parsed.rows,
                parsed.records.size(), parsed.errors.size());
    gwas_records = std::move(parsed.records);
    all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
  }
  if (cfg.get_bool("use_eqtl", true)) {
    if (cfg.has("eqtl_raw")) {
      auto path = cfg.get_path("eqtl_raw");
      inputs.push_back(path);
      auto parsed = parse_eqtl_raw(path);
      eqtl_records = select_eqtl(parsed.records, cfg.get_int("eqtl_top_tissues", 3),
                                 cfg.get_int("eqtl_top_per_tissue", 1000));
      std::printf("eqtl_raw: %zu rows, %zu selected, %zu rejected\n", parsed.rows,
                  eqtl_records.size(), parsed.errors.size());
      all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
    } else if (cfg.has("eqtl")) {
      auto path = cfg.get_path("eqtl");
      inputs.push_back(path);
      auto parsed = parse_association_table(path, SourceKind::Eqtl);
      std::printf("eqtl: %zu rows, %zu records, %zu rejected\n", parsed.rows,
                  parsed.records.size(), parsed.errors.size());
      eqtl_records = std::move(parsed.records);
      all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
    }
  }
  if (gwas_records.empty() && eqtl_records.empty() && !cfg.has("biobank")) {
    throw ConfigError("ingest needs at least one of: gwas, eqtl, eqtl_raw, biobank");
  }

  SnpVocabulary vocab;
  PairDataset term_snp;
  term_snp.task = TaskTag::TermSnp;
  if (!gwas_records.empty() || !eqtl_records.empty()) {
    vocab = build_snp_vocab(gwas_records, eqtl_records, cfg.get_int("min_traits", 2));
    std::printf("snp vocabulary: %d concepts\n", vocab.size());
    term_snp.snp_vocab = &vocab;
    std::vector<AssociationRecord> merged = gwas_records;
    merged.insert(merged.end(), eqtl_records.begin(), eqtl_records.end());
    NormalizeStats stats;
    auto pairs = normalize_weights(merged, vocab, cfg.get_double("weight_cap", 2.0), &stats);
    for (auto& p : pairs) term_snp.add(std::move(p));
    std::printf("association pairs: %zu (dropped groups=%zu, zero-effect=%zu, off-vocab=%zu)\n",
                term_snp.size(), stats.dropped_groups, stats.dropped_records,
                stats.skipped_unknown_snp);
  }
  if (cfg.get_bool("use_biobank", true) && cfg.has("biobank")) {
    auto path = cfg.get_path("biobank");
    inputs.push_back(path);
    if (vocab.size() == 0) throw ConfigError("biobank correlations need a SNP vocabulary from gwas/eqtl");
    auto parsed = parse_correlations(path, cfg.get_double("correlation_threshold", 0.05), vocab,
                                     cfg.get_double("weight_cap", 2.0));
    std::printf("biobank: %zu rows, %zu pairs kept, %zu below threshold, %zu rejected\n",
                parsed.rows, parsed.dataset.size(), parsed.filtered, parsed.errors.size());
    for (const auto& p : parsed.dataset.pairs) term_snp.add(p);
    all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
  }

  PairDataset term_term;
  term_term.task = TaskTag::TermTerm;
  if (cfg.get_bool("use_kg", true) && cfg.has("triples")) {
    auto path = cfg.get_path("triples");
    inputs.push_back(path);
    auto parsed = parse_triples(path);
    std::printf("triples: %zu rows, %zu pairs, %zu self-pairs, %zu duplicates, %zu rejected\n",
                parsed.rows, parsed.dataset.size(), parsed.self_pairs, parsed.duplicates,
                parsed.errors.size());
    term_term = std::move(parsed.dataset);
    all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
  }
  PairDataset synonyms;
  synonyms.task = TaskTag::Synonym;
  if (cfg.get_bool("use_synonyms", true) && cfg.has("synonyms")) {
    auto path = cfg.get_path("synonyms");
    inputs.push_back(path);
    auto parsed = parse_synonyms(path);
    std::printf("synonyms: %zu rows, %zu pairs, %zu self-pairs, %zu rejected\n", parsed.rows,
                parsed.dataset.size(), parsed.self_pairs, parsed.errors.size());
    synonyms = std::move(parsed.dataset);
    all_errors.insert(all_errors.end(), parsed.errors.begin(), parsed.errors.end());
  }

  if (vocab.size() > 0) write_snp_vocab(out / "snp_vocab.tsv", vocab);
  if (!term_snp.pairs.empty()) write_pairs_with_header(out / "pairs_term_snp.tsv", term_snp);
  if (!term_term.pairs.empty()) write_pairs_with_header(out / "pairs_term_term.tsv", term_term);
  if (!synonyms.pairs.empty()) write_pairs_with_header(out / "pairs_synonym.tsv", synonyms);
  write_rejects(out, all_errors);
  write_manifest(out, "ingest", cfg, seed, inputs);
  return 0;
}

int cmd_synth(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  const std::uint64_t seed = pick_seed(args, cfg);
  auto bundle = generate_synthetic(cfg.synthetic_spec(), seed);

  write_snp_vocab(out / "snp_vocab.tsv", *bundle.snp_vocab);
  write_pairs_with_header(out / "pairs_term_snp.tsv", bundle.term_snp);
  write_pairs_with_header(out / "pairs_term_term.tsv", bundle.term_term);
  write_pairs_with_header(out / "pairs_synonym.tsv", bundle.synonyms);
  PairDataset eval_ds;
  eval_ds.task = TaskTag::TermSnp;
  eval_ds.snp_vocab = bundle.snp_vocab.get();
  for (const auto& p : bundle.eval_positives) eval_ds.add(p);
  write_pairs_with_header(out / "eval_pairs.tsv", eval_ds);
  {
    std::ofstream f(out / "synonym_map.tsv");
    f << "term\tsynonym\n";
    for (const auto& [k, v] : bundle.synonym_map) f << k << '\t' << v << '\n';
  }
  {
    std::ofstream f(out / "clusters.tsv");
    f << "kind\tlabel\tcluster\n";
    for (std::size_t t = 0; t < bundle.trait_texts.size(); ++t) {
      f << "trait\t" << bundle.trait_texts[t] << '\t' << bundle.trait_cluster[t] << '\n';
    }
    for (const auto& e : bundle.snp_vocab->entries) {
      f << "snp\t" << e.label() << '\t'
        << bundle.snp_cluster[static_cast<std::size_t>(e.index)] << '\n';
    }
  }
  write_manifest(out, "synth", cfg, seed, {});
  std::printf("synth: %zu TERM_SNP, %zu TERM_TERM, %zu SYNONYM, %zu eval positives, %d SNPs\n",
              bundle.term_snp.size(), bundle.term_term.size(), bundle.synonyms.size(),
              bundle.eval_positives.size(), bundle.snp_vocab->size());
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  TrainConfig tcfg = cfg.train_config();
  if (args.seed_set) tcfg.seed = args.seed;
  LoadedDatasets data = load_datasets(cfg);
  std::vector<fs::path> inputs;
  for (const char* key : {"snp_vocab", "pairs_term_snp", "pairs_term_term", "pairs_synonym"}) {
    if (cfg.has(key)) inputs.push_back(cfg.get_path(key));
  }
  auto result = train(tcfg, data.list, out / "checkpoint.bin", out / "train_log.tsv");
  write_manifest(out, "train", cfg, tcfg.seed, inputs);
  auto counts = result.log.task_step_counts();
  std::printf("train: %zu steps over %d epochs; final epoch mean loss %.4f; 1/tau %.2f\n",
              result.log.steps.size(), tcfg.epochs, result.log.epoch_mean_loss.back(),
              result.model.params.temp.inv_tau());
  for (const auto& [task, n] : counts) {
    std::printf("  %s steps: %ld\n", std::string(to_string(task)).c_str(), n);
  }
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  std::vector<fs::path> inputs = {cfg.get_path("checkpoint"), cfg.get_path("eval_pairs")};
  auto positives = load_eval_pairs(cfg.get_path("eval_pairs"), &ck.model.params.snp.vocab);
  KnownPositives known = load_known(cfg, &ck.model.params.snp.vocab, inputs);
  for (const auto& p : positives) known.emplace(p.head, p.tail_key());
  RelatedEvalConfig ecfg = related_config(cfg);
  auto pool = build_pool(positives, ecfg.anchor, &ck.model.params.snp.vocab, known);
  Embedder embedder(ck.model);
  auto report = eval_related(embedder, positives, pool, known, ecfg);
  report.write_tsv(out / "eval_report.tsv");
  write_manifest(out, "eval", cfg, pick_seed(args, cfg), inputs);
  print_report("auc", report);
  return 0;
}

int cmd_gapeval(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  auto pairs_path = cfg.has("gap_pairs") ? cfg.get_path("gap_pairs") : cfg.get_path("pairs_term_snp");
  PairDataset ds = read_canonical_pairs(pairs_path, &ck.model.params.snp.vocab);
  auto triples = make_gap_triples(ds.pairs);
  Embedder embedder(ck.model);
  auto edges = default_gap_edges();
  auto bins = gap_ranking(embedder, triples, edges);
  std::ofstream f(out / "gap_report.tsv");
  f << "lo\thi\tcount\taccuracy\n";
  for (const auto& bin : bins) {
    f << bin.lo << '\t' << bin.hi << '\t' << bin.count << '\t';
    if (bin.accuracy) {
      f << *bin.accuracy;
    } else {
      f << "NA";
    }
    f << '\n';
    if (bin.accuracy) {
      std::printf("gap [%.2f, %.2f): n=%zu accuracy=%.3f\n", bin.lo, bin.hi, bin.count,
                  *bin.accuracy);
    }
  }
  write_manifest(out, "gapeval", cfg, pick_seed(args, cfg),
                 {cfg.get_path("checkpoint"), pairs_path});
  return 0;
}

int cmd_synoneval(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  std::vector<fs::path> inputs = {cfg.get_path("checkpoint"), cfg.get_path("eval_pairs"),
                                  cfg.get_path("synonym_map")};
  auto positives = load_eval_pairs(cfg.get_path("eval_pairs"), &ck.model.params.snp.vocab);
  KnownPositives known = load_known(cfg, &ck.model.params.snp.vocab, inputs);
  for (const auto& p : positives) known.emplace(p.head, p.tail_key());
  RelatedEvalConfig ecfg = related_config(cfg);
  auto pool = build_pool(positives, ecfg.anchor, &ck.model.params.snp.vocab, known);
  auto synonym_map = load_synonym_map(cfg.get_path("synonym_map"));
  Embedder embedder(ck.model);
  auto reports = synonym_swap_eval(embedder, positives, pool, known, ecfg, synonym_map);
  reports.original.write_tsv(out / "eval_original.tsv");
  reports.swapped.write_tsv(out / "eval_swapped.tsv");
  write_manifest(out, "synoneval", cfg, pick_seed(args, cfg), inputs);
  print_report("original", reports.original);
  print_report("swapped", reports.swapped);
  std::printf("drop: %.4f\n", reports.original.mean - reports.swapped.mean);
  return 0;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

// Concept lines are free text; a line that matches a vocabulary SNP label
// (rs..._X) embeds through the table instead of the text encoder.
Vector embed_line(const ModelState& model, Embedder& embedder, const std::string& line) {
  auto us = line.rfind('_');
  if (us != std::string::npos && us + 2 == line.size() && valid_rsid(line.substr(0, us)) &&
      valid_allele(line[us + 1])) {
    int idx = model.params.snp.vocab.find(line.substr(0, us), line[us + 1]);
    if (idx >= 0) return embedder.snp(idx);
  }
  return embedder.text(normalize_text(line).normalized);
}

fs::path concepts_path(const RunConfig& cfg) {
  return cfg.has("concepts") ? cfg.get_path("concepts") : cfg.get_path("eval_pairs");
}

int cmd_embed(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  auto lines = read_lines(concepts_path(cfg));  // one concept per line
  Embedder embedder(ck.model);
  std::ofstream f(out / "embeddings.tsv");
  char buf[64];
  for (const auto& line : lines) {
    Vector v = embed_line(ck.model, embedder, line);
    f << line;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "\t%.8g", v(i));
      f << buf;
    }
    f << '\n';
  }
  write_manifest(out, "embed", cfg, pick_seed(args, cfg),
                 {cfg.get_path("checkpoint"), concepts_path(cfg)});
  std::printf("embedded %zu concepts (d=%d)\n", lines.size(), ck.model.cfg.d);
  return 0;
}

int cmd_nn(const CommonArgs& args, const std::string& query, int k) {
  const RunConfig cfg = load_config(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  auto lines = read_lines(concepts_path(cfg));  // pool, one concept per line
  Embedder embedder(ck.model);
  std::vector<PoolItem> pool;
  for (const auto& line : lines) {
    auto us = line.rfind('_');
    if (us != std::string::npos && us + 2 == line.size() && valid_rsid(line.substr(0, us))) {
      int idx = ck.model.params.snp.vocab.find(line.substr(0, us), line[us + 1]);
      if (idx >= 0) {
        pool.push_back(PoolItem::snp(idx));
        continue;
      }
    }
    pool.push_back(PoolItem::term(normalize_text(line).normalized));
  }
  Vector q = embed_line(ck.model, embedder, query);
  for (const auto& n : nearest(embedder, q, k, pool)) {
    std::printf("%.4f\t%s\n", n.cosine, n.label.c_str());
  }
  return 0;
}

int cmd_project(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  auto ck = load_checkpoint(cfg.get_path("checkpoint"));
  auto lines = read_lines(concepts_path(cfg));
  Embedder embedder(ck.model);
  Matrix embeddings(static_cast<Eigen::Index>(lines.size()), ck.model.cfg.d);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    embeddings.row(static_cast<Eigen::Index>(i)) =
        embed_line(ck.model, embedder, lines[i]).transpose();
  }
  Matrix coords = project_2d(embeddings);
  write_projection(out / "projection.tsv", lines, coords);
  write_manifest(out, "project", cfg, pick_seed(args, cfg),
                 {cfg.get_path("checkpoint"), concepts_path(cfg)});
  std::printf("projected %zu concepts to 2D\n", lines.size());
  return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
  ModelConfig mcfg;
  mcfg.d = 8;
  mcfg.d_model = 8;
  mcfg.n_layers = 1;
  mcfg.n_heads = 2;
  mcfg.ff_dim = 16;
  TokenizerConfig tok;
  tok.hash_vocab_size = 64;
  tok.max_len = 16;
  const std::uint64_t seed = args.seed_set ? args.seed : 7;
  auto model = init_model(mcfg, tok,
                          SnpVocabulary::from_keys({{"rs1", 'A'}, {"rs2", 'T'}, {"rs3", 'G'},
                                                    {"rs4", 'C'}, {"rs5", 'A'}}),
                          seed);
  const std::vector<std::string> heads = {"glioma", "renal cysts", "asthma"};
  const std::vector<std::string> tails = {"ptenvar", "pkd one", "ilfour"};
  double worst = 0.0;
  for (TaskTag task : {TaskTag::TermSnp, TaskTag::TermTerm, TaskTag::Synonym}) {
    TrainingBatch batch;
    batch.task = task;
    batch.weights = Vector{{1.0, 0.4, 1.7}};
    for (int i = 0; i < 3; ++i) {
      batch.head_tokens.push_back(model.tokenize(normalize_text(heads[static_cast<std::size_t>(i)])));
      batch.head_keys.push_back(i);
      if (task == TaskTag::TermSnp) {
        batch.tail_snp_indices.push_back(i + 1);
        batch.tail_keys.push_back(i + 1);
      } else {
        batch.tail_tokens.push_back(model.tokenize(normalize_text(tails[static_cast<std::size_t>(i)])));
        batch.tail_keys.push_back(10 + i);
      }
    }
    const double err = finite_diff_check(model, batch, 1e-4);
    std::printf("%s max relative error: %.3e\n", std::string(to_string(task)).c_str(), err);
    worst = std::max(worst, err);
  }
  std::printf("overall max relative error: %.3e\n", worst);
  if (!(worst < 1e-6)) {
    throw NumericError("gradient check exceeded 1e-6");
  }
  return 0;
}

int cmd_baseline(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out(args);
  BaselineConfig bcfg;
  bcfg.kind = baseline_kind_from_string(cfg.get_string("baseline_kind", "distmult"));
  bcfg.d = cfg.get_int("baseline_d", bcfg.d);
  bcfg.epochs = cfg.get_int("baseline_epochs", bcfg.epochs);
  bcfg.batch_size = cfg.get_int("baseline_batch", bcfg.batch_size);
  bcfg.lr = cfg.get_double("baseline_lr", bcfg.lr);
  bcfg.margin = cfg.get_double("baseline_margin", bcfg.margin);
  bcfg.seed = args.seed_set ? args.seed : cfg.get_u64("seed", 1);

  auto triples = load_id_triples(cfg.get_path("baseline_triples"));
  int n_entities = 0, n_relations = 0;
  for (const auto& t : triples) {
    n_entities = std::max({n_entities, t.head + 1, t.tail + 1});
    n_relations = std::max(n_relations, t.relation + 1);
  }
  std::vector<IdTriple> eval_triples;
  std::vector<fs::path> inputs = {cfg.get_path("baseline_triples")};
  if (cfg.has("baseline_eval")) {
    eval_triples = load_id_triples(cfg.get_path("baseline_eval"));
    inputs.push_back(cfg.get_path("baseline_eval"));
    for (const auto& t : eval_triples) {
      n_entities = std::max({n_entities, t.head + 1, t.tail + 1});
      n_relations = std::max(n_relations, t.relation + 1);
    }
  }
  auto params = train_baseline(bcfg, triples, n_entities, n_relations);
  std::printf("trained %s on %zu triples (%d entities, %d relations)\n",
              std::string(to_string(bcfg.kind)).c_str(), triples.size(), n_entities, n_relations);

  if (!eval_triples.empty()) {
    std::set<std::pair<int, int>> known;
    for (const auto& t : triples) known.insert({t.head, t.tail});
    for (const auto& t : eval_triples) known.insert({t.head, t.tail});
    Rng rng(derive_seed(bcfg.seed, fnv1a64("baseline-eval")));
    std::vector<double> pos, neg;
    for (const auto& t : eval_triples) {
      pos.push_back(baseline_score(params, t.head, t.relation, t.tail));
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const int cand = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_entities)));
        if (!known.count({t.head, cand})) {
          neg.push_back(baseline_score(params, t.head, t.relation, cand));
          break;
        }
      }
    }
    const double result = auc(pos, neg);
    std::printf("held-out AUC (head-anchored random negatives): %.4f\n", result);
    std::ofstream f(out / "baseline_report.tsv");
    f << "kind\ttriples\teval\tauc\n"
      << to_string(bcfg.kind) << '\t' << triples.size() << '\t' << eval_triples.size() << '\t'
      << result << '\n';
  }
  write_manifest(out, "baseline", cfg, bcfg.seed, inputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unirep: unified text/SNP concept embeddings"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "key=value run configuration file");
    sub->add_option("--out", args.out_dir, "output directory (default: current)");
    sub->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
      args.seed_set = true;
    });
  };

  auto* ingest = app.add_subcommand("ingest", "parse raw sources into canonical pair files");
  auto* synth = app.add_subcommand("synth", "generate a synthetic planted-cluster dataset bundle");
  auto* train_cmd = app.add_subcommand("train", "train the dual encoder on canonical pair files");
  auto* eval_cmd = app.add_subcommand("eval", "anchored-negative AUC on held-out pairs");
  auto* gapeval = app.add_subcommand("gapeval", "weight-gap ranking accuracy by bins");
  auto* synoneval = app.add_subcommand("synoneval", "AUC before/after synonym substitution");
  auto* embed = app.add_subcommand("embed", "write embeddings for a list of concepts");
  auto* nn = app.add_subcommand("nn", "nearest neighbors of a query concept");
  auto* project = app.add_subcommand("project", "2D principal-component projection");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of all gradients");
  auto* baseline = app.add_subcommand("baseline", "train/evaluate a TransE or DistMult baseline");
  for (auto* sub : {ingest, synth, train_cmd, eval_cmd, gapeval, synoneval, embed, nn, project,
                    gradcheck, baseline}) {
    add_common(sub);
  }
  std::string nn_query;
  int nn_k = 10;
  nn->add_option("--query", nn_query, "query concept text or SNP label")->required();
  nn->add_option("-k", nn_k, "neighbors to return");

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) return cmd_ingest(args);
    if (synth->parsed()) return cmd_synth(args);
    if (train_cmd->parsed()) return cmd_train(args);
    if (eval_cmd->parsed()) return cmd_eval(args);
    if (gapeval->parsed()) return cmd_gapeval(args);
    if (synoneval->parsed()) return cmd_synoneval(args);
    if (embed->parsed()) return cmd_embed(args);
    if (nn->parsed()) return cmd_nn(args, nn_query, nn_k);
    if (project->parsed()) return cmd_project(args);
    if (gradcheck->parsed()) return cmd_gradcheck(args);
    if (baseline->parsed()) return cmd_baseline(args);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // --help is not an error
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
