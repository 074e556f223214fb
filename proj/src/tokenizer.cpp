#include "unirep/tokenizer.hpp"

namespace unirep {

void TokenizerConfig::validate() const {
  if (hash_vocab_size <= kReserved) throw ConfigError("hash_vocab_size must exceed the reserved ids");
  if (ngram_min < 1 || ngram_max < ngram_min) throw ConfigError("bad n-gram range");
  if (max_len < 2) throw ConfigError("max_len must allow CLS plus at least one token");
}

namespace {

std::int32_t hashed_id(const TokenizerConfig& cfg, std::string_view piece) {
  const auto span = static_cast<std::uint64_t>(cfg.hash_vocab_size - TokenizerConfig::kReserved);
  return static_cast<std::int32_t>(TokenizerConfig::kReserved + fnv1a64(piece) % span);
}

}  // namespace

TokenSeq tokenize(const TokenizerConfig& cfg, const ConceptText& text) {
  cfg.validate();
  TokenSeq seq;
  seq.ids.assign(static_cast<std::size_t>(cfg.max_len), TokenizerConfig::kPad);
  seq.ids[0] = TokenizerConfig::kCls;
  seq.length = 1;

  const std::string& s = text.normalized;
  std::size_t pos = 0;
  while (pos < s.size() && seq.length < cfg.max_len) {
    std::size_t space = s.find(' ', pos);
    std::string_view word = space == std::string::npos
                                ? std::string_view(s).substr(pos)
                                : std::string_view(s).substr(pos, space - pos);
    pos = space == std::string::npos ? s.size() : space + 1;
    if (word.empty()) continue;
    if (word.size() < static_cast<std::size_t>(cfg.ngram_min)) {
      if (seq.length < cfg.max_len) seq.ids[seq.length++] = hashed_id(cfg, word);
      continue;
    }
    for (int n = cfg.ngram_min; n <= cfg.ngram_max && seq.length < cfg.max_len; ++n) {
      if (word.size() < static_cast<std::size_t>(n)) break;
      for (std::size_t i = 0; i + n <= word.size() && seq.length < cfg.max_len; ++i) {
        seq.ids[seq.length++] = hashed_id(cfg, word.substr(i, static_cast<std::size_t>(n)));
      }
    }
  }
  return seq;
}

}  // namespace unirep
