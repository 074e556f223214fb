#pragma once

#include "unirep/common.hpp"
#include "unirep/corpus.hpp"

namespace unirep {

// Dense rows for every (rsid, allele) concept; row j is the embedding of
// vocabulary entry j, equivalent to one-hot(j) times the matrix.
struct SnpEmbeddingTable {
  Matrix rows;  // [M x d]
  SnpVocabulary vocab;

  int size() const { return static_cast<int>(rows.rows()); }
};

Vector encode_snp(const SnpEmbeddingTable& table, const GenomicConcept& g);
Vector encode_snp(const SnpEmbeddingTable& table, int index);

}  // namespace unirep
