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

#include "clink/sparse.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "clink/common.h"

namespace clink {

SparseVector::SparseVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry &a, const Entry &b) { return a.first < b.first; });
  for (const auto &e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(e);
    }
  }
}

FeatureVocabulary FeatureVocabulary::Hashed(uint32_t capacity) {
  FeatureVocabulary v;
  v.mode_ = Mode::kHashed;
  v.capacity_ = std::max<uint32_t>(1, capacity);
  return v;
}

FeatureVocabulary FeatureVocabulary::Interned(uint32_t capacity) {
  FeatureVocabulary v;
  v.mode_ = Mode::kInterned;
  v.capacity_ = std::max<uint32_t>(1, capacity);
  return v;
}

std::optional<uint32_t> FeatureVocabulary::Find(std::string_view name) const {
  if (mode_ == Mode::kHashed) {
    return static_cast<uint32_t>(Fnv1a64(name) % capacity_);
  }
  auto it = names_.find(std::string(name));
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

std::optional<uint32_t> FeatureVocabulary::Intern(std::string_view name) {
  if (mode_ == Mode::kHashed) return Find(name);
  auto it = names_.find(std::string(name));
  if (it != names_.end()) return it->second;
  if (names_.size() >= capacity_) return std::nullopt;
  const auto index = static_cast<uint32_t>(names_.size());
  names_.emplace(std::string(name), index);
  return index;
}

void FeatureBuilder::Add(std::string_view name, double value) {
  const auto index = growable_ ? growable_->Intern(name) : vocab_->Find(name);
  if (index) entries_.emplace_back(*index, value);
}

TfIdfModel::TfIdfModel(const std::vector<std::vector<std::string>> &documents) {
  corpus_size_ = static_cast<int64_t>(documents.size());
  for (const auto &doc : documents) {
    std::vector<std::string> unique;
    for (const auto &t : doc) unique.push_back(ToLower(t));
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto &t : unique) ++df_[std::move(t)];
  }
}

TfIdfModel TfIdfModel::FromKnowledgeBase(const KnowledgeBase &kb, int doc_cap) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(kb.num_entities());
  for (size_t e = 0; e < kb.num_entities(); ++e) {
    const auto &article = kb.entity(static_cast<EntityIndex>(e));
    auto body = Tokenize(article.body);
    if (static_cast<int>(body.size()) > doc_cap) body.resize(static_cast<size_t>(doc_cap));
    docs.push_back(Surfaces(body));
  }
  return TfIdfModel(docs);
}

int64_t TfIdfModel::DocumentFrequency(std::string_view token) const {
  auto it = df_.find(ToLower(token));
  return it == df_.end() ? 0 : it->second;
}

double TfIdfModel::Idf(std::string_view token) const {
  if (corpus_size_ == 0) return 0.0;
  return std::log(static_cast<double>(corpus_size_) /
                  static_cast<double>(1 + DocumentFrequency(token)));
}

namespace {

std::map<std::string, double> TfIdfVector(const TfIdfModel &tfidf,
                                          std::span<const std::string> tokens) {
  std::map<std::string, double> tf;
  for (const auto &t : tokens) tf[ToLower(t)] += 1.0;
  // Terms in every document have negative idf; they carry no weight.
  for (auto &[token, weight] : tf) weight *= std::max(0.0, tfidf.Idf(token));
  return tf;
}

}  // namespace

double TfIdfCosine(const TfIdfModel &tfidf, std::span<const std::string> a,
                   std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0.0;
  const auto va = TfIdfVector(tfidf, a);
  const auto vb = TfIdfVector(tfidf, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto &[t, w] : va) {
    na += w * w;
    auto it = vb.find(t);
    if (it != vb.end()) dot += w * it->second;
  }
  for (const auto &[t, w] : vb) nb += w * w;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::string_view MentionLengthBucket(size_t length) {
  switch (length) {
    case 0:
    case 1:
      return "1";
    case 2:
      return "2";
    case 3:
      return "3";
    default:
      return "4+";
  }
}

int CountBucket(int64_t count) {
  if (count <= 0) return 0;
  int bucket = 1;
  while (count >= 2) {
    count >>= 1;
    ++bucket;
  }
  return bucket;
}

std::string_view RankBucket(int rank) {
  if (rank <= 0) return "none";
  if (rank == 1) return "1";
  if (rank == 2) return "2";
  if (rank <= 5) return "3-5";
  return "6+";
}

int CosineBucket(double cosine) {
  // The small offset keeps exact multiples of 0.05 (e.g. 0.70) in the
  // bucket they start despite binary rounding.
  const int bucket = static_cast<int>(std::floor(cosine * 20.0 + 1e-9));
  return std::clamp(bucket, 0, 19);
}

SparseVector FeaturesQ(std::span<const Token> mention, const Query &query,
                       FeatureBuilder builder) {
  const std::string len(MentionLengthBucket(mention.size()));
  for (const auto &[flag, name] : QueryFlagNames()) {
    if (!query.has(flag)) continue;
    builder.Add("Q:flag=" + std::string(name));
    builder.Add("Q:flag=" + std::string(name) + "&mlen=" + len);
  }
  if (!query.tokens.empty()) {
    builder.Add("Q:first=" + ToLower(query.tokens.front()));
    builder.Add("Q:last=" + ToLower(query.tokens.back()));
  }

  // Tag signature of the query span, located by its first and last token.
  bool tagged = false;
  for (const auto &t : mention) tagged |= t.pos_tag || t.ner_tag;
  if (tagged) {
    std::string pos, ner;
    for (const auto &qt : query.tokens) {
      for (const auto &t : mention) {
        const bool same = t.surface == qt || (t.surface.size() == qt.size() + 1 &&
                                               t.surface.starts_with(qt));
        if (!same) continue;
        if (!pos.empty()) pos += '_';
        if (!ner.empty()) ner += '_';
        pos += t.pos_tag.value_or("?");
        ner += t.ner_tag.value_or("?");
        break;
      }
    }
    if (!pos.empty()) builder.Add("Q:pos=" + pos);
    if (!ner.empty()) builder.Add("Q:ner=" + ner);
  }
  return builder.Build();
}

SparseVector FeaturesE(const KnowledgeBase &kb, const Query &query,
                       const EntityContext &entity, const TfIdfModel &tfidf,
                       std::span<const std::string> source_doc,
                       FeatureBuilder builder) {
  if (entity.entity == kNullEntity) {
    builder.Add(kNullFeature);
    return builder.Build();
  }
  const auto links = kb.Links(query.text);
  int64_t count = 0;
  int rank = 0;
  for (size_t i = 0; i < links.size(); ++i) {
    if (links[i].entity == entity.entity) {
      count = links[i].count;
      rank = static_cast<int>(i) + 1;
      break;
    }
  }
  const std::string count_bucket = std::to_string(CountBucket(count));
  builder.Add("E:count=" + count_bucket);
  builder.Add("E:rank=" + std::string(RankBucket(rank)));
  builder.Add("E:count=" + count_bucket + "&rank=" + std::string(RankBucket(rank)));

  std::string title = kb.entity(entity.entity).title;
  std::replace(title.begin(), title.end(), '_', ' ');
  title = NormalizeAnchor(title);
  std::string_view match = "none";
  if (title == query.text) {
    match = "exact";
  } else if (title.starts_with(query.text)) {
    match = "prefix";
  } else if (title.find(query.text) != std::string::npos) {
    match = "substring";
  }
  builder.Add("E:title=" + std::string(match));

  if (entity.tfidf_cosine || entity.body_tokens) {
    const double cosine =
        entity.tfidf_cosine ? *entity.tfidf_cosine
                            : TfIdfCosine(tfidf, source_doc, *entity.body_tokens);
    builder.Add("E:tfidf=" + std::to_string(CosineBucket(cosine)));
  }
  return builder.Build();
}

}  // namespace clink
