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

#include "clink/embeddings.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace clink {

EmbeddingTable::EmbeddingTable(const std::vector<std::string> &tokens,
                               const RowMatrixXd &vectors) {
  if (static_cast<Eigen::Index>(tokens.size()) != vectors.rows()) {
    throw DimensionError("token count does not match vector rows");
  }
  if (vectors.cols() <= 0) throw DimensionError("invalid dimension 0");
  dim_ = static_cast<int>(vectors.cols());

  std::vector<Eigen::Index> keep;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(tokens_.size());
    if (vocab_.emplace(tokens[i], row).second) {
      tokens_.push_back(tokens[i]);
      keep.push_back(static_cast<Eigen::Index>(i));
    }
  }
  vectors_ = RowMatrixXd::Zero(static_cast<Eigen::Index>(keep.size()) + 2, dim_);
  for (size_t r = 0; r < keep.size(); ++r) {
    vectors_.row(static_cast<Eigen::Index>(r)) = vectors.row(keep[r]);
  }
}

Eigen::Index EmbeddingTable::RowOf(std::string_view token) const {
  // Heterogeneous lookup on unordered_map needs a transparent hash; the
  // temporary string is cheap next to the convolution cost.
  auto it = vocab_.find(std::string(token));
  if (it != vocab_.end()) return it->second;
  it = vocab_.find(ToLower(token));
  if (it != vocab_.end()) return it->second;
  return oov_row();
}

namespace {

void ParseHeader(const std::string &line, long *count, long *dim) {
  std::istringstream header(line);
  std::string extra;
  if (!(header >> *count >> *dim) || (header >> extra) || *count < 0) {
    throw FormatError("line 1: malformed word2vec header '" + line + "'");
  }
  if (*dim <= 0) {
    throw DimensionError("line 1: invalid dimension " + std::to_string(*dim));
  }
}

}  // namespace

EmbeddingTable ReadWord2VecText(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("line 1: missing header");
  long count, dim;
  ParseHeader(line, &count, &dim);

  std::vector<std::string> tokens;
  RowMatrixXd vectors(count, dim);
  long line_no = 1;
  long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row == count) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": more rows than declared count " +
                        std::to_string(count));
    }
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    long arity = 0;
    std::string value;
    while (fields >> value) {
      if (arity < dim) {
        try {
          size_t used = 0;
          vectors(row, arity) = std::stod(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception &) {
          throw FormatError("line " + std::to_string(line_no) +
                            ": bad number '" + value + "'");
        }
      }
      ++arity;
    }
    if (arity != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, found " +
                        std::to_string(arity));
    }
    tokens.push_back(std::move(token));
    ++row;
  }
  if (row != count) {
    throw FormatError("line " + std::to_string(line_no) + ": declared " +
                      std::to_string(count) + " rows, found " +
                      std::to_string(row));
  }
  return EmbeddingTable(tokens, vectors);
}

// Binary layout of the word2vec tool: a text header, then for every word the
// token, one space and `dim` little-endian float32 values, optionally
// followed by a newline.
EmbeddingTable ReadWord2VecBinary(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("line 1: missing header");
  long count, dim;
  ParseHeader(line, &count, &dim);

  std::vector<std::string> tokens;
  RowMatrixXd vectors(count, dim);
  std::vector<float> buf(static_cast<size_t>(dim));
  for (long row = 0; row < count; ++row) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF && (c == '\n' || c == '\r')) {
    }
    while (c != EOF && c != ' ') {
      token.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == EOF || token.empty()) {
      throw FormatError("record " + std::to_string(row + 1) +
                        ": unexpected end of binary data");
    }
    in.read(reinterpret_cast<char *>(buf.data()),
            static_cast<std::streamsize>(sizeof(float) * buf.size()));
    if (!in) {
      throw FormatError("record " + std::to_string(row + 1) +
                        ": truncated vector");
    }
    for (long j = 0; j < dim; ++j) vectors(row, j) = buf[static_cast<size_t>(j)];
    tokens.push_back(std::move(token));
  }
  return EmbeddingTable(tokens, vectors);
}

EmbeddingTable LoadWord2Vec(const std::string &path, Word2VecFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embeddings file " + path);
  try {
    return format == Word2VecFormat::kText ? ReadWord2VecText(in)
                                           : ReadWord2VecBinary(in);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteWord2VecText(const EmbeddingTable &table, std::ostream &out) {
  out << table.tokens().size() << ' ' << table.dim() << '\n';
  char num[64];
  for (size_t i = 0; i < table.tokens().size(); ++i) {
    out << table.tokens()[i];
    for (int j = 0; j < table.dim(); ++j) {
      std::snprintf(num, sizeof(num), " %.6f",
                    table.vectors()(static_cast<Eigen::Index>(i), j));
      out << num;
    }
    out << '\n';
  }
}

void WriteWord2VecBinary(const EmbeddingTable &table, std::ostream &out) {
  out << table.tokens().size() << ' ' << table.dim() << '\n';
  for (size_t i = 0; i < table.tokens().size(); ++i) {
    out << table.tokens()[i] << ' ';
    for (int j = 0; j < table.dim(); ++j) {
      const float v =
          static_cast<float>(table.vectors()(static_cast<Eigen::Index>(i), j));
      out.write(reinterpret_cast<const char *>(&v), sizeof(v));
    }
    out << '\n';
  }
}

RowMatrixXd LookupSequence(const EmbeddingTable &table,
                           std::span<const std::string> tokens) {
  RowMatrixXd out(static_cast<Eigen::Index>(tokens.size()), table.dim());
  for (size_t i = 0; i < tokens.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = table.Lookup(tokens[i]);
  }
  return out;
}

double OovRate(const EmbeddingTable &table,
               std::span<const std::string> tokens) {
  if (tokens.empty()) return 0.0;
  size_t oov = 0;
  for (const auto &t : tokens) {
    if (!table.Contains(t)) ++oov;
  }
  return static_cast<double>(oov) / static_cast<double>(tokens.size());
}

}  // namespace clink
