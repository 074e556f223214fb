#include "unirep/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace unirep {

namespace {

const std::set<std::string> kKnownKeys = {
    // model
    "d", "d_model", "n_layers", "n_heads", "ff_dim",
    "hash_vocab", "ngram_min", "ngram_max", "max_len",
    // training
    "epochs", "batch_size", "lr_lm", "lr_snp", "weight_decay", "seed", "tasks",
    "loss_direction", "weight_cap", "correlation_threshold", "min_traits",
    "disable_sources",
    // raw sources and toggles
    "gwas", "eqtl", "eqtl_raw", "biobank", "triples", "synonyms",
    "use_gwas", "use_eqtl", "use_biobank", "use_kg", "use_synonyms",
    "eqtl_top_tissues", "eqtl_top_per_tissue",
    // canonical datasets / artifacts
    "pairs_term_snp", "pairs_term_term", "pairs_synonym", "snp_vocab", "checkpoint",
    // evaluation
    "eval_pairs", "eval_anchor", "k_neg", "eval_seeds", "exclude_pairs", "synonym_map",
    "gap_pairs", "concepts",
    // synthetic generator
    "synth_traits", "synth_snps", "synth_clusters", "synth_snp_pairs_per_trait",
    "synth_term_term_pairs", "synth_eval_pairs_per_trait", "synth_weight_min",
    "synth_weight_max", "synth_weight_noise", "synth_synonym_copies",
    // baselines
    "baseline_kind", "baseline_d", "baseline_epochs", "baseline_batch", "baseline_lr",
    "baseline_margin", "baseline_triples", "baseline_eval",
    // output
    "out",
};

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: " + line);
    }
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (cfg.values_.count(key)) {
      throw ConfigError("duplicate config key: " + key);
    }
    cfg.values_[key] = value;
  }
  cfg.validate_keys();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void RunConfig::validate_keys() const {
  for (const auto& [key, value] : values_) {
    if (!kKnownKeys.count(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size()) {
    throw ConfigError("config key " + key + " is not an integer: " + it->second);
  }
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size()) {
    throw ConfigError("config key " + key + " is not an unsigned integer: " + it->second);
  }
  return v;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size()) {
    throw ConfigError("config key " + key + " is not a number: " + it->second);
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::vector<std::uint64_t> RunConfig::get_seeds(const std::string& key,
                                                std::vector<std::uint64_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> seeds;
  const std::string& s = it->second;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + comma, v);
    if (ec != std::errc{} || ptr != s.data() + comma) {
      throw ConfigError("config key " + key + " has a malformed seed list: " + s);
    }
    seeds.push_back(v);
    start = comma + 1;
    if (comma == s.size()) break;
  }
  if (seeds.empty()) throw ConfigError("config key " + key + " lists no seeds");
  return seeds;
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("required path key missing from config: " + key);
  std::filesystem::path p = it->second;
  if (!std::filesystem::exists(p)) {
    throw ConfigError("config key " + key + " references a missing path: " + it->second);
  }
  return p;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.model.d = get_int("d", cfg.model.d);
  cfg.model.d_model = get_int("d_model", cfg.model.d_model);
  cfg.model.n_layers = get_int("n_layers", cfg.model.n_layers);
  cfg.model.n_heads = get_int("n_heads", cfg.model.n_heads);
  cfg.model.ff_dim = get_int("ff_dim", cfg.model.ff_dim);
  cfg.tokenizer.hash_vocab_size = get_int("hash_vocab", cfg.tokenizer.hash_vocab_size);
  cfg.tokenizer.ngram_min = get_int("ngram_min", cfg.tokenizer.ngram_min);
  cfg.tokenizer.ngram_max = get_int("ngram_max", cfg.tokenizer.ngram_max);
  cfg.tokenizer.max_len = get_int("max_len", cfg.tokenizer.max_len);
  cfg.epochs = get_int("epochs", cfg.epochs);
  cfg.batch_size = get_int("batch_size", cfg.batch_size);
  cfg.lr_lm = get_double("lr_lm", cfg.lr_lm);
  cfg.lr_snp = get_double("lr_snp", cfg.lr_snp);
  cfg.weight_decay = get_double("weight_decay", cfg.weight_decay);
  cfg.seed = get_u64("seed", cfg.seed);
  cfg.direction = loss_direction_from_string(get_string("loss_direction", "symmetric"));
  cfg.weight_cap = get_double("weight_cap", cfg.weight_cap);
  cfg.correlation_threshold = get_double("correlation_threshold", cfg.correlation_threshold);
  if (has("disable_sources")) {
    const std::string sources = get_string("disable_sources", "");
    std::size_t start = 0;
    while (start < sources.size()) {
      std::size_t comma = sources.find(',', start);
      if (comma == std::string::npos) comma = sources.size();
      cfg.disabled_sources.insert(sources.substr(start, comma - start));
      start = comma + 1;
    }
  }
  if (has("tasks")) {
    cfg.enabled_tasks.clear();
    const std::string tasks = get_string("tasks", "");
    std::size_t start = 0;
    while (start < tasks.size()) {
      std::size_t comma = tasks.find(',', start);
      if (comma == std::string::npos) comma = tasks.size();
      cfg.enabled_tasks.insert(task_from_string(tasks.substr(start, comma - start)));
      start = comma + 1;
    }
  }
  cfg.validate();
  return cfg;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.n_traits = get_int("synth_traits", spec.n_traits);
  spec.n_snps = get_int("synth_snps", spec.n_snps);
  spec.n_clusters = get_int("synth_clusters", spec.n_clusters);
  spec.snp_pairs_per_trait = get_int("synth_snp_pairs_per_trait", spec.snp_pairs_per_trait);
  spec.term_term_pairs = get_int("synth_term_term_pairs", spec.term_term_pairs);
  spec.eval_pairs_per_trait = get_int("synth_eval_pairs_per_trait", spec.eval_pairs_per_trait);
  spec.weight_min = get_double("synth_weight_min", spec.weight_min);
  spec.weight_max = get_double("synth_weight_max", spec.weight_max);
  spec.weight_noise = get_double("synth_weight_noise", spec.weight_noise);
  spec.synonym_copies = get_int("synth_synonym_copies", spec.synonym_copies);
  spec.validate();
  return spec;
}

}  // namespace unirep
