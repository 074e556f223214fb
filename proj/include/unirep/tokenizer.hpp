#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "unirep/common.hpp"
#include "unirep/corpus.hpp"

namespace unirep {

struct TokenizerConfig {
  int hash_vocab_size = 4096;
  int ngram_min = 3;
  int ngram_max = 5;
  int max_len = 32;

  static constexpr int kCls = 0;
  static constexpr int kPad = 1;
  static constexpr int kUnk = 2;
  static constexpr int kReserved = 3;

  void validate() const;
};

// Fixed-length id sequence: ids[0..length) are real tokens (CLS first),
// the rest is PAD up to max_len.
struct TokenSeq {
  std::vector<std::int32_t> ids;
  int length = 0;

  bool operator==(const TokenSeq& o) const { return ids == o.ids && length == o.length; }
};

// [CLS] followed by hashed character n-grams of each whitespace word.
// Words shorter than ngram_min hash as a single whole-word token.
TokenSeq tokenize(const TokenizerConfig& cfg, const ConceptText& text);

}  // namespace unirep
