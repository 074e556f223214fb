#include "unirep/genomic.hpp"

namespace unirep {

Vector encode_snp(const SnpEmbeddingTable& table, int index) {
  if (index < 0 || index >= table.size()) {
    throw DataError("SNP index " + std::to_string(index) + " does not match the vocabulary (size " +
                    std::to_string(table.size()) + ")");
  }
  return table.rows.row(index).transpose();
}

Vector encode_snp(const SnpEmbeddingTable& table, const GenomicConcept& g) {
  return encode_snp(table, g.index);
}

}  // namespace unirep
