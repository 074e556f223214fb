#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "unirep/synthetic.hpp"
#include "unirep/trainer.hpp"

using namespace unirep;

namespace {

PairDataset text_dataset(TaskTag task, int n, const std::string& prefix) {
  PairDataset ds;
  ds.task = task;
  for (int i = 0; i < n; ++i) {
    WeightedPair p;
    const std::string head = prefix + " head " + std::to_string(i);
    const std::string tail = prefix + " tail " + std::to_string(i);
    p.head = ConceptText{head, head};
    p.tail = ConceptText{tail, tail};
    p.weight = 1.0;
    p.task = task;
    p.source = "test";
    ds.add(p);
  }
  return ds;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.model.d = 16;
  cfg.model.d_model = 16;
  cfg.model.n_layers = 1;
  cfg.model.n_heads = 2;
  cfg.model.ff_dim = 32;
  cfg.tokenizer.hash_vocab_size = 256;
  cfg.tokenizer.max_len = 16;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 77;
  return cfg;
}

SyntheticBundle tiny_bundle() {
  SyntheticSpec spec;
  spec.n_traits = 6;
  spec.n_snps = 12;
  spec.n_clusters = 2;
  spec.snp_pairs_per_trait = 3;
  spec.term_term_pairs = 12;
  spec.eval_pairs_per_trait = 1;
  return generate_synthetic(spec, 11);
}

}  // namespace

TEST_CASE("schedule_batches counts batches per task") {
  auto a = text_dataset(TaskTag::TermTerm, 4, "alpha");
  auto b = text_dataset(TaskTag::Synonym, 2, "beta");
  std::vector<const PairDataset*> datasets = {&a, &b};
  auto plans = schedule_batches(datasets, 2, 5, 1);
  REQUIRE(plans.size() == 3);
  int n_a = 0, n_b = 0;
  std::set<std::size_t> seen_a;
  for (const auto& plan : plans) {
    if (plan.task == TaskTag::TermTerm) {
      ++n_a;
      for (auto i : plan.indices) seen_a.insert(i);
    } else {
      ++n_b;
    }
    CHECK(plan.indices.size() == 2);
  }
  CHECK(n_a == 2);
  CHECK(n_b == 1);
  CHECK(seen_a.size() == 4);  // every pair exactly once
}

TEST_CASE("short final batches are dropped") {
  auto a = text_dataset(TaskTag::TermTerm, 5, "alpha");
  std::vector<const PairDataset*> datasets = {&a};
  auto plans = schedule_batches(datasets, 2, 5, 1);
  REQUIRE(plans.size() == 2);  // 2+2, the trailing single pair is dropped
  std::size_t consumed = 0;
  for (const auto& plan : plans) consumed += plan.indices.size();
  CHECK(consumed == 4);
}

TEST_CASE("scheduling is deterministic per (seed, epoch)") {
  auto a = text_dataset(TaskTag::TermTerm, 9, "alpha");
  auto b = text_dataset(TaskTag::Synonym, 7, "beta");
  std::vector<const PairDataset*> datasets = {&a, &b};
  auto p1 = schedule_batches(datasets, 3, 5, 2);
  auto p2 = schedule_batches(datasets, 3, 5, 2);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].task == p2[i].task);
    CHECK(p1[i].indices == p2[i].indices);
  }
  auto p3 = schedule_batches(datasets, 3, 5, 3);
  bool any_difference = p3.size() != p1.size();
  for (std::size_t i = 0; !any_difference && i < p1.size(); ++i) {
    any_difference = p1[i].indices != p3[i].indices || p1[i].task != p3[i].task;
  }
  CHECK(any_difference);  // epochs reshuffle
}

TEST_CASE("empty scheduling is a configuration error") {
  std::vector<const PairDataset*> datasets;
  CHECK_THROWS_AS(schedule_batches(datasets, 2, 1, 1), ConfigError);
  auto a = text_dataset(TaskTag::TermTerm, 1, "alpha");  // single pair -> dropped
  datasets = {&a};
  CHECK_THROWS_AS(schedule_batches(datasets, 2, 1, 1), ConfigError);
}

TEST_CASE("train rejects empty task sets and empty datasets") {
  TrainConfig cfg = quick_config();
  cfg.enabled_tasks.clear();
  std::vector<const PairDataset*> datasets;
  CHECK_THROWS_AS(train(cfg, datasets), ConfigError);
  cfg = quick_config();
  CHECK_THROWS_AS(train(cfg, datasets), ConfigError);
}

TEST_CASE("loss trends down on planted data") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  cfg.epochs = 5;
  cfg.batch_size = 6;
  std::vector<const PairDataset*> datasets = {&bundle.term_snp, &bundle.term_term,
                                              &bundle.synonyms};
  auto result = train(cfg, datasets);
  REQUIRE(result.log.epoch_mean_loss.size() == 5);
  CHECK(result.log.epoch_mean_loss[4] < result.log.epoch_mean_loss[0]);
}

TEST_CASE("identical runs produce bit-identical checkpoints") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  std::vector<const PairDataset*> datasets = {&bundle.term_snp, &bundle.term_term,
                                              &bundle.synonyms};
  auto dir = std::filesystem::temp_directory_path();
  auto run = [&](const std::string& name) {
    auto result = train(cfg, datasets);
    save_checkpoint(result.model, cfg.enabled_tasks, dir / name);
    std::ifstream in(dir / name, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const std::string bytes1 = run("ck_a.bin");
  const std::string bytes2 = run("ck_b.bin");
  CHECK(bytes1 == bytes2);
  CHECK(!bytes1.empty());
}

TEST_CASE("checkpoint round trip is exact") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  std::vector<const PairDataset*> datasets = {&bundle.term_snp, &bundle.term_term,
                                              &bundle.synonyms};
  auto result = train(cfg, datasets);
  auto path = std::filesystem::temp_directory_path() / "ck_roundtrip.bin";
  save_checkpoint(result.model, cfg.enabled_tasks, path);
  auto loaded = load_checkpoint(path);
  CHECK(loaded.enabled_tasks == cfg.enabled_tasks);
  CHECK(loaded.model.cfg.d == cfg.model.d);
  CHECK(loaded.model.params.snp.vocab.size() == bundle.snp_vocab->size());
  auto v1 = param_views(result.model.params);
  auto v2 = param_views(loaded.model.params);
  REQUIRE(v1.size() == v2.size());
  for (std::size_t k = 0; k < v1.size(); ++k) {
    REQUIRE(v1[k].size == v2[k].size);
    for (Eigen::Index i = 0; i < v1[k].size; ++i) {
      CHECK(v1[k].data[i] == v2[k].data[i]);  // bit-identical
    }
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  cfg.epochs = 1;
  std::vector<const PairDataset*> datasets = {&bundle.term_snp};
  auto result = train(cfg, datasets);
  auto dir = std::filesystem::temp_directory_path();

  SUBCASE("bad magic") {
    auto path = dir / "ck_badmagic.bin";
    save_checkpoint(result.model, cfg.enabled_tasks, path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
    f.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("truncated file") {
    auto path = dir / "ck_trunc.bin";
    save_checkpoint(result.model, cfg.enabled_tasks, path);
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("dimension mismatch between header and arrays") {
    auto path = dir / "ck_dim.bin";
    save_checkpoint(result.model, cfg.enabled_tasks, path);
    // Rewrite the header's d_model; array sizes no longer match.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    auto pos = bytes.find("d_model=16");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, 10, "d_model=32");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
}

TEST_CASE("ablations only remove the disabled task's batches") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  std::vector<const PairDataset*> datasets = {&bundle.term_snp, &bundle.term_term,
                                              &bundle.synonyms};
  auto full = train(cfg, datasets);
  TrainConfig ablated_cfg = cfg;
  ablated_cfg.enabled_tasks = {TaskTag::TermSnp, TaskTag::TermTerm};
  auto ablated = train(ablated_cfg, datasets);

  auto full_counts = full.log.task_step_counts();
  auto ablated_counts = ablated.log.task_step_counts();
  CHECK(full_counts[TaskTag::Synonym] > 0);
  CHECK(ablated_counts.count(TaskTag::Synonym) == 0);
  CHECK(ablated_counts[TaskTag::TermSnp] == full_counts[TaskTag::TermSnp]);
  CHECK(ablated_counts[TaskTag::TermTerm] == full_counts[TaskTag::TermTerm]);
  // The ablated model has no gradient signal into the SNP table beyond
  // TERM_SNP batches either way; just confirm both trained.
  CHECK(!ablated.log.steps.empty());
}

TEST_CASE("source toggles drop only the matching pairs") {
  auto bundle = tiny_bundle();
  // Relabel part of the TERM_SNP pairs as a second source.
  PairDataset mixed;
  mixed.task = TaskTag::TermSnp;
  mixed.snp_vocab = bundle.term_snp.snp_vocab;
  for (std::size_t i = 0; i < bundle.term_snp.pairs.size(); ++i) {
    WeightedPair p = bundle.term_snp.pairs[i];
    p.source = i % 3 == 0 ? "biobank" : "gwas";
    mixed.add(p);
  }
  TrainConfig cfg = quick_config();
  cfg.epochs = 1;
  cfg.disabled_sources = {"biobank"};
  std::vector<const PairDataset*> datasets = {&mixed};
  auto result = train(cfg, datasets);
  std::size_t kept = 0;
  for (const auto& p : mixed.pairs) {
    if (p.source == "gwas") ++kept;
  }
  CHECK(kept == 12);  // 18 pairs, every third relabeled
  auto counts = result.log.task_step_counts();
  CHECK(counts[TaskTag::TermSnp] == 3);  // 12 kept pairs / batch 4

  // Disabling every source of the only dataset is a configuration error.
  TrainConfig all_off = cfg;
  all_off.disabled_sources = {"gwas", "biobank"};
  CHECK_THROWS_AS(train(all_off, datasets), ConfigError);
}

TEST_CASE("explicit concept ids override surface-derived identity keys") {
  PairDataset ds;
  ds.task = TaskTag::Synonym;
  auto add = [&ds](const std::string& a, const std::string& b, std::int64_t concept_id) {
    WeightedPair p;
    p.head = ConceptText{a, a};
    p.tail = ConceptText{b, b};
    p.weight = 1.0;
    p.task = TaskTag::Synonym;
    p.head_concept = concept_id;
    p.tail_concept = concept_id;
    ds.add(p);
  };
  add("arthritis", "arthritic", 7);
  add("arthritis", "joint inflammation", 7);  // same concept, different surface
  add("asthma", "wheeze", 8);
  BatchPlan plan{TaskTag::Synonym, &ds, {0, 1, 2}};
  ConceptKeyMap keys;
  TokenizerConfig tok;
  tok.hash_vocab_size = 128;
  tok.max_len = 16;
  auto batch = assemble_batch(plan, tok, keys);
  CHECK(batch.head_keys[0] == batch.head_keys[1]);
  CHECK(batch.tail_keys[0] == batch.tail_keys[1]);  // masked as duplicate positives
  CHECK(batch.head_keys[0] != batch.head_keys[2]);
  // Concept keys must not collide with surface keys of unrelated pairs.
  PairDataset plain;
  plain.task = TaskTag::Synonym;
  WeightedPair p;
  p.head = ConceptText{"seven", "seven"};
  p.tail = ConceptText{"eight", "eight"};
  p.weight = 1.0;
  p.task = TaskTag::Synonym;
  plain.add(p);
  BatchPlan plan2{TaskTag::Synonym, &plain, {0}};
  auto batch2 = assemble_batch(plan2, tok, keys);
  CHECK(batch2.head_keys[0] != batch.head_keys[0]);
}

TEST_CASE("non-finite parameters raise a numeric error with a diagnostic") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  cfg.epochs = 1;
  std::vector<const PairDataset*> datasets = {&bundle.term_snp};
  auto result = train(cfg, datasets);
  result.model.params.encoder.token_embeddings(0, 0) =
      std::numeric_limits<double>::quiet_NaN();
  ConceptKeyMap keys;
  BatchPlan plan{TaskTag::TermSnp, &bundle.term_snp, {0, 1, 2}};
  auto batch = assemble_batch(plan, cfg.tokenizer, keys);
  try {
    batch_loss(result.model, batch);
    FAIL("expected a NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("block") != std::string::npos);
  }
}

TEST_CASE("training log file round trips through TSV") {
  auto bundle = tiny_bundle();
  TrainConfig cfg = quick_config();
  cfg.epochs = 1;
  std::vector<const PairDataset*> datasets = {&bundle.term_snp};
  auto log_path = std::filesystem::temp_directory_path() / "train_log.tsv";
  auto result = train(cfg, datasets, std::nullopt, log_path);
  std::ifstream in(log_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "step\tepoch\ttask\tloss\tinv_tau");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == result.log.steps.size());
}
