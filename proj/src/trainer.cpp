#include "unirep/trainer.hpp"

#include <cstring>
#include <deque>
#include <memory>
#include <fstream>

#include "unirep/rng.hpp"

namespace unirep {

void TrainConfig::validate() const {
  model.validate();
  tokenizer.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("contrastive training needs batch_size >= 2");
  if (!(lr_lm > 0.0) || !(lr_snp > 0.0)) throw ConfigError("learning rates must be positive");
  if (enabled_tasks.empty()) throw ConfigError("at least one task must be enabled");
  if (!(weight_cap > 0.0)) throw ConfigError("weight cap must be positive");
}

namespace {

int task_index(TaskTag t) { return static_cast<int>(t); }

}  // namespace

std::vector<BatchPlan> schedule_batches(std::span<const PairDataset* const> datasets,
                                        int batch_size, std::uint64_t seed, int epoch) {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  struct TaskQueue {
    std::deque<BatchPlan> batches;
    std::size_t remaining = 0;
  };
  std::vector<TaskQueue> queues;
  std::size_t total_remaining = 0;
  for (const PairDataset* ds : datasets) {
    if (ds == nullptr || ds->pairs.empty()) continue;
    std::vector<std::size_t> order(ds->pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(seed, static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(task_index(ds->task))));
    shuffle_rng.shuffle(order);
    TaskQueue q;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      if (end - start < 2) break;  // final short batch dropped
      BatchPlan plan;
      plan.task = ds->task;
      plan.dataset = ds;
      plan.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
      q.remaining += plan.indices.size();
      q.batches.push_back(std::move(plan));
    }
    total_remaining += q.remaining;
    if (!q.batches.empty()) queues.push_back(std::move(q));
  }
  if (total_remaining == 0) {
    throw ConfigError("no trainable pairs: all enabled datasets are empty or too small");
  }

  Rng mix_rng(derive_seed(seed, static_cast<std::uint64_t>(epoch), fnv1a64("mix")));
  std::vector<BatchPlan> plans;
  while (total_remaining > 0) {
    const double u = mix_rng.uniform() * static_cast<double>(total_remaining);
    double acc = 0.0;
    std::size_t pick = queues.size() - 1;
    for (std::size_t qi = 0; qi < queues.size(); ++qi) {
      acc += static_cast<double>(queues[qi].remaining);
      if (u < acc && !queues[qi].batches.empty()) {
        pick = qi;
        break;
      }
    }
    // Fall back to the first non-empty queue if rounding walked past the end.
    if (queues[pick].batches.empty()) {
      for (std::size_t qi = 0; qi < queues.size(); ++qi) {
        if (!queues[qi].batches.empty()) {
          pick = qi;
          break;
        }
      }
    }
    auto& q = queues[pick];
    BatchPlan plan = std::move(q.batches.front());
    q.batches.pop_front();
    q.remaining -= plan.indices.size();
    total_remaining -= plan.indices.size();
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::int64_t ConceptKeyMap::key_for(const std::string& normalized) {
  auto [it, inserted] = ids_.emplace(normalized, static_cast<std::int64_t>(ids_.size()));
  return it->second;
}

TrainingBatch assemble_batch(const BatchPlan& plan, const TokenizerConfig& tok,
                             ConceptKeyMap& keys) {
  // Explicit concept ids live in a separate key space so they can never
  // collide with surface-derived ids.
  constexpr std::int64_t kConceptKeyBase = std::int64_t(1) << 32;
  TrainingBatch batch;
  batch.task = plan.task;
  const auto b = static_cast<Eigen::Index>(plan.indices.size());
  batch.weights.resize(b);
  batch.head_tokens.reserve(plan.indices.size());
  for (std::size_t i = 0; i < plan.indices.size(); ++i) {
    const WeightedPair& pair = plan.dataset->pairs[plan.indices[i]];
    batch.head_tokens.push_back(tokenize(tok, pair.head));
    batch.head_keys.push_back(pair.head_concept >= 0 ? kConceptKeyBase + pair.head_concept
                                                     : keys.key_for(pair.head.normalized));
    batch.weights(static_cast<Eigen::Index>(i)) = pair.weight;
    if (plan.task == TaskTag::TermSnp) {
      batch.tail_snp_indices.push_back(pair.tail_snp().index);
      batch.tail_keys.push_back(pair.tail_snp().index);
    } else {
      batch.tail_tokens.push_back(tokenize(tok, pair.tail_text()));
      batch.tail_keys.push_back(pair.tail_concept >= 0 ? kConceptKeyBase + pair.tail_concept
                                                       : keys.key_for(pair.tail_text().normalized));
    }
  }
  return batch;
}

std::map<TaskTag, long> TrainLog::task_step_counts() const {
  std::map<TaskTag, long> counts;
  for (const auto& s : steps) ++counts[s.task];
  return counts;
}

void TrainLog::write_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "step\tepoch\ttask\tloss\tinv_tau\n";
  char buf[128];
  for (const auto& s : steps) {
    std::snprintf(buf, sizeof(buf), "%ld\t%d\t%s\t%.17g\t%.17g\n", s.step, s.epoch,
                  std::string(to_string(s.task)).c_str(), s.loss, s.inv_tau);
    out << buf;
  }
}

TrainResult train(const TrainConfig& config, std::span<const PairDataset* const> datasets,
                  const std::optional<std::filesystem::path>& checkpoint_path,
                  const std::optional<std::filesystem::path>& log_path) {
  config.validate();

  std::vector<const PairDataset*> enabled;
  std::vector<std::unique_ptr<PairDataset>> filtered_storage;
  const SnpVocabulary* vocab = nullptr;
  for (const PairDataset* ds : datasets) {
    if (ds == nullptr || !config.enabled_tasks.count(ds->task)) continue;
    ds->validate();
    if (!config.disabled_sources.empty()) {
      auto filtered = std::make_unique<PairDataset>();
      filtered->task = ds->task;
      filtered->snp_vocab = ds->snp_vocab;
      for (const auto& pair : ds->pairs) {
        if (!config.disabled_sources.count(pair.source)) filtered->add(pair);
      }
      if (filtered->pairs.empty()) continue;
      ds = filtered.get();
      filtered_storage.push_back(std::move(filtered));
    }
    enabled.push_back(ds);
    if (ds->task == TaskTag::TermSnp) vocab = ds->snp_vocab;
  }
  std::size_t total_pairs = 0;
  for (const auto* ds : enabled) total_pairs += ds->pairs.size();
  if (total_pairs == 0) throw ConfigError("no training pairs in the enabled datasets");

  SnpVocabulary empty_vocab;
  TrainResult result{
      init_model(config.model, config.tokenizer, vocab ? *vocab : empty_vocab, config.seed), {}};
  ModelState& model = result.model;

  AdamConfig adam_cfg;
  adam_cfg.lr_lm = config.lr_lm;
  adam_cfg.lr_snp = config.lr_snp;
  adam_cfg.weight_decay = config.weight_decay;
  AdamState adam_state = AdamState::init(model.params);
  GradientSet grads = zero_gradients(model);
  ConceptKeyMap keys;

  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto plans = schedule_batches(enabled, config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    for (const auto& plan : plans) {
      TrainingBatch batch = assemble_batch(plan, config.tokenizer, keys);
      set_zero(grads);
      const double loss = backward(model, batch, grads, config.direction);
      adam_step(model.params, grads, adam_state, adam_cfg);
      ++step;
      loss_sum += loss;
      result.log.steps.push_back(
          StepRecord{step, epoch, plan.task, loss, model.params.temp.inv_tau()});
    }
    result.log.epoch_mean_loss.push_back(loss_sum / static_cast<double>(plans.size()));
    if (checkpoint_path) {
      save_checkpoint(model, config.enabled_tasks, *checkpoint_path);
    }
  }
  if (log_path) result.log.write_tsv(*log_path);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format.

namespace {

constexpr char kMagic[8] = {'U', 'N', 'I', 'R', 'E', 'P', '\0', '\x01'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw DataError("checkpoint truncated while reading a length field");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f32(std::ostream& out, double v) {
  float f = static_cast<float>(v);
  static_assert(sizeof(float) == 4);
  unsigned char bytes[4];
  std::memcpy(bytes, &f, 4);
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

double read_f32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw DataError("checkpoint truncated while reading parameters");
  float f = 0.0f;
  std::memcpy(&f, bytes, 4);
  return static_cast<double>(f);
}

std::string tasks_to_string(const std::set<TaskTag>& tasks) {
  std::string out;
  for (TaskTag t : tasks) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(t));
  }
  return out;
}

std::set<TaskTag> tasks_from_string(const std::string& s) {
  std::set<TaskTag> tasks;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    tasks.insert(task_from_string(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return tasks;
}

int header_int(const std::map<std::string, std::string>& header, const std::string& key) {
  auto it = header.find(key);
  if (it == header.end()) throw DataError("checkpoint header missing key " + key);
  return std::stoi(it->second);
}

}  // namespace

void save_checkpoint(const ModelState& model, const std::set<TaskTag>& enabled_tasks,
                     const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    out << "d=" << model.cfg.d << "\n"
        << "d_model=" << model.cfg.d_model << "\n"
        << "n_layers=" << model.cfg.n_layers << "\n"
        << "n_heads=" << model.cfg.n_heads << "\n"
        << "ff_dim=" << model.cfg.ff_dim << "\n"
        << "hash_vocab=" << model.tok.hash_vocab_size << "\n"
        << "ngram_min=" << model.tok.ngram_min << "\n"
        << "ngram_max=" << model.tok.ngram_max << "\n"
        << "max_len=" << model.tok.max_len << "\n"
        << "snp_vocab_size=" << model.params.snp.vocab.size() << "\n"
        << "tasks=" << tasks_to_string(enabled_tasks) << "\n";
    for (const auto& e : model.params.snp.vocab.entries) {
      out << "snp." << e.index << "=" << e.label() << "\n";
    }
    out << "\n";
    // Arrays follow in the documented views order.
    ModelParams& params = const_cast<ModelParams&>(model.params);
    for (const auto& view : param_views(params)) {
      write_u64(out, static_cast<std::uint64_t>(view.size));
      for (Eigen::Index r = 0; r < view.rows; ++r) {
        for (Eigen::Index c = 0; c < view.cols; ++c) {
          write_f32(out, view.at(r, c));
        }
      }
    }
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("bad checkpoint magic or version in " + path.string());
  }
  std::map<std::string, std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed checkpoint header line: " + line);
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!in) throw DataError("checkpoint truncated in header");

  ModelConfig cfg;
  cfg.d = header_int(header, "d");
  cfg.d_model = header_int(header, "d_model");
  cfg.n_layers = header_int(header, "n_layers");
  cfg.n_heads = header_int(header, "n_heads");
  cfg.ff_dim = header_int(header, "ff_dim");
  TokenizerConfig tok;
  tok.hash_vocab_size = header_int(header, "hash_vocab");
  tok.ngram_min = header_int(header, "ngram_min");
  tok.ngram_max = header_int(header, "ngram_max");
  tok.max_len = header_int(header, "max_len");
  const int vocab_size = header_int(header, "snp_vocab_size");

  SnpVocabulary vocab;
  for (int i = 0; i < vocab_size; ++i) {
    auto it = header.find("snp." + std::to_string(i));
    if (it == header.end()) throw DataError("checkpoint missing vocabulary entry " + std::to_string(i));
    const std::string& label = it->second;
    auto us = label.rfind('_');
    if (us == std::string::npos || us + 2 != label.size()) {
      throw DataError("malformed vocabulary entry in checkpoint: " + label);
    }
    GenomicConcept snp{label.substr(0, us), label[us + 1], i};
    vocab.lookup.emplace(std::make_pair(snp.rsid, snp.allele), i);
    vocab.entries.push_back(std::move(snp));
  }

  Checkpoint ck{init_model(cfg, tok, vocab, 0), {}};
  auto tasks_it = header.find("tasks");
  if (tasks_it != header.end() && !tasks_it->second.empty()) {
    ck.enabled_tasks = tasks_from_string(tasks_it->second);
  }
  for (const auto& view : param_views(ck.model.params)) {
    const std::uint64_t count = read_u64(in);
    if (count != static_cast<std::uint64_t>(view.size)) {
      throw DataError("checkpoint array " + view.name + " has " + std::to_string(count) +
                      " elements, expected " + std::to_string(view.size) +
                      " (dimension mismatch between header and arrays)");
    }
    for (Eigen::Index r = 0; r < view.rows; ++r) {
      for (Eigen::Index c = 0; c < view.cols; ++c) {
        view.at(r, c) = read_f32(in);
      }
    }
  }
  return ck;
}

}  // namespace unirep
