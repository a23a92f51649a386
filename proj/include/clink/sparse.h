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

#ifndef CLINK_SPARSE_H_
#define CLINK_SPARSE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clink/kb.h"
#include "clink/textproc.h"

namespace clink {

// (index, value) pairs with unique indices, sorted by index.
class SparseVector {
 public:
  using Entry = std::pair<uint32_t, double>;

  SparseVector() = default;
  // Sorts and merges duplicate indices by summing their values.
  explicit SparseVector(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double Dot(std::span<const double> weights) const {
    double s = 0.0;
    for (const auto &[i, v] : entries_) s += weights[i] * v;
    return s;
  }

  friend bool operator==(const SparseVector &, const SparseVector &) = default;

 private:
  std::vector<Entry> entries_;
};

// Maps feature names to weight indices. Hashed mode reduces a 64-bit
// FNV-1a of the name modulo the capacity and accepts collisions. Interned
// mode assigns dense indices on first sight while growth is allowed.
class FeatureVocabulary {
 public:
  enum class Mode : uint8_t { kHashed = 0, kInterned = 1 };

  static constexpr uint32_t kDefaultCapacity = 1u << 20;

  static FeatureVocabulary Hashed(uint32_t capacity = kDefaultCapacity);
  static FeatureVocabulary Interned(uint32_t capacity = kDefaultCapacity);

  Mode mode() const { return mode_; }
  uint32_t capacity() const { return capacity_; }

  // Index of `name`; for interned mode, nullopt if unseen.
  std::optional<uint32_t> Find(std::string_view name) const;
  // As Find, but interned mode adds unseen names while below capacity.
  std::optional<uint32_t> Intern(std::string_view name);

  const std::unordered_map<std::string, uint32_t> &interned() const {
    return names_;
  }
  void set_interned(std::unordered_map<std::string, uint32_t> names) {
    names_ = std::move(names);
  }

 private:
  Mode mode_ = Mode::kHashed;
  uint32_t capacity_ = kDefaultCapacity;
  std::unordered_map<std::string, uint32_t> names_;
};

// Collects feature names and maps them through a vocabulary.
class FeatureBuilder {
 public:
  // Read-only lookups; unseen interned names are dropped.
  explicit FeatureBuilder(const FeatureVocabulary &vocab) : vocab_(&vocab) {}
  // `grow` allows interned vocabularies to add new names.
  FeatureBuilder(FeatureVocabulary *vocab, bool grow)
      : vocab_(vocab), growable_(grow ? vocab : nullptr) {}

  void Add(std::string_view name, double value = 1.0);
  SparseVector Build() { return SparseVector(std::move(entries_)); }

 private:
  const FeatureVocabulary *vocab_;
  FeatureVocabulary *growable_ = nullptr;
  std::vector<SparseVector::Entry> entries_;
};

// Bag-of-words tf-idf weights over the KB article bodies, with
// idf(t) = ln(N / (1 + df(t))). Tokens are lowercased.
class TfIdfModel {
 public:
  TfIdfModel() = default;
  explicit TfIdfModel(const std::vector<std::vector<std::string>> &documents);
  static TfIdfModel FromKnowledgeBase(const KnowledgeBase &kb, int doc_cap);

  double Idf(std::string_view token) const;
  int64_t DocumentFrequency(std::string_view token) const;
  int64_t corpus_size() const { return corpus_size_; }

 private:
  std::unordered_map<std::string, int64_t> df_;
  int64_t corpus_size_ = 0;
};

// Cosine of raw-count tf x max(0, idf) vectors, clamped to [0, 1]; 0 when
// either side is empty or has zero norm.
double TfIdfCosine(const TfIdfModel &tfidf, std::span<const std::string> a,
                   std::span<const std::string> b);

// Mention length bucket: 1, 2, 3, 4+.
std::string_view MentionLengthBucket(size_t length);
// 0 for no links, otherwise floor(log2(count)) + 1.
int CountBucket(int64_t count);
// Rank bucket of a 1-based rank: "1", "2", "3-5", "6+"; "none" for 0.
std::string_view RankBucket(int rank);
// Width-0.05 bucket over [0, 1]; 1.0 lands in the last bucket.
int CosineBucket(double cosine);

// Query-shape indicators. Independent of any candidate entity.
SparseVector FeaturesQ(std::span<const Token> mention, const Query &query,
                       FeatureBuilder builder);

// Inputs of FeaturesE that depend on the entity.
struct EntityContext {
  EntityIndex entity = kNullEntity;
  const std::vector<std::string> *body_tokens = nullptr;
  // Source/body tf-idf cosine, when the caller has already computed it.
  std::optional<double> tfidf_cosine;
};

// Query-entity compatibility indicators: anchor count bucket, rank under
// the query, title match and the discretized tf-idf cosine between the
// source document and the entity body. NULL has a single indicator.
SparseVector FeaturesE(const KnowledgeBase &kb, const Query &query,
                       const EntityContext &entity, const TfIdfModel &tfidf,
                       std::span<const std::string> source_doc,
                       FeatureBuilder builder);

// The lone feature of the NULL entity.
constexpr std::string_view kNullFeature = "E:null";

}  // namespace clink

#endif  // CLINK_SPARSE_H_
