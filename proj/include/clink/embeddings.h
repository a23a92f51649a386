// Copyright 2026 The clink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLINK_EMBEDDINGS_H_
#define CLINK_EMBEDDINGS_H_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clink/common.h"

namespace clink {

enum class Word2VecFormat { kText, kBinary };

// Frozen word vectors. Two extra rows follow the vocabulary: the shared
// out-of-vocabulary row and the padding row, both all zeros. Lookups are
// total: exact token, then lowercased token, then the OOV row.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Builds a table from parallel token/row lists. Duplicate tokens keep
  // their first occurrence.
  EmbeddingTable(const std::vector<std::string> &tokens,
                 const RowMatrixXd &vectors);

  int dim() const { return dim_; }
  size_t vocab_size() const { return vocab_.size(); }

  // Row index for `token`, falling back to oov_row().
  Eigen::Index RowOf(std::string_view token) const;
  bool Contains(std::string_view token) const {
    return RowOf(token) != oov_row();
  }

  Eigen::Index oov_row() const { return vectors_.rows() - 2; }
  Eigen::Index pad_row() const { return vectors_.rows() - 1; }

  auto Lookup(std::string_view token) const { return vectors_.row(RowOf(token)); }
  auto oov_vector() const { return vectors_.row(oov_row()); }
  auto pad_vector() const { return vectors_.row(pad_row()); }

  // Tokens in row order, for writing the table back out.
  const std::vector<std::string> &tokens() const { return tokens_; }
  const RowMatrixXd &vectors() const { return vectors_; }

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Eigen::Index> vocab_;
  RowMatrixXd vectors_;
};

EmbeddingTable LoadWord2Vec(const std::string &path, Word2VecFormat format);
EmbeddingTable ReadWord2VecText(std::istream &in);
EmbeddingTable ReadWord2VecBinary(std::istream &in);

void WriteWord2VecText(const EmbeddingTable &table, std::ostream &out);
void WriteWord2VecBinary(const EmbeddingTable &table, std::ostream &out);

// n x d matrix whose row i is the vector of tokens[i].
RowMatrixXd LookupSequence(const EmbeddingTable &table,
                           std::span<const std::string> tokens);

// Fraction of tokens that resolve to the OOV row; 0 for an empty list.
double OovRate(const EmbeddingTable &table,
               std::span<const std::string> tokens);

}  // namespace clink

#endif  // CLINK_EMBEDDINGS_H_
