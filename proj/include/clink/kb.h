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

#ifndef CLINK_KB_H_
#define CLINK_KB_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clink/corpus.h"
#include "clink/textproc.h"

namespace clink {

// Dense entity index into the knowledge base. kNullEntity is the
// distinguished "no link" target.
using EntityIndex = int32_t;
constexpr EntityIndex kNullEntity = -1;

struct AnchorLink {
  EntityIndex entity;
  int64_t count;
};

struct IngestStats {
  size_t articles = 0;
  size_t anchors = 0;          // anchors ingested
  size_t skipped_anchors = 0;  // anchors naming an unknown entity
};

// Entity articles plus the anchor-text link-count index. Immutable after
// construction.
class KnowledgeBase {
 public:
  static constexpr std::string_view kMagic = "CLKB1";

  KnowledgeBase() = default;

  // Raises IngestError on a duplicate entity id. Anchors for unknown
  // entities are skipped and counted in `stats`.
  static KnowledgeBase Ingest(std::span<const ArticleRecord> articles,
                              std::span<const AnchorRecord> anchors,
                              IngestStats *stats = nullptr);

  void Save(const std::string &path) const;
  static KnowledgeBase Load(const std::string &path);

  size_t num_entities() const { return entities_.size(); }
  const ArticleRecord &entity(EntityIndex e) const {
    return entities_[static_cast<size_t>(e)];
  }
  // kNullEntity when the id is unknown.
  EntityIndex Find(std::string_view id) const;
  // Entity id string; "NIL" for kNullEntity.
  std::string_view IdOf(EntityIndex e) const;

  // Links for a normalized anchor string, sorted by count descending and
  // then by entity id. Empty when the anchor is unknown.
  std::span<const AnchorLink> Links(std::string_view normalized_anchor) const;
  int64_t Count(std::string_view normalized_anchor, EntityIndex e) const;
  int64_t TotalLinks(EntityIndex e) const {
    return total_links_[static_cast<size_t>(e)];
  }
  size_t num_anchors() const { return anchor_index_.size(); }

 private:
  void Finalize();

  std::vector<ArticleRecord> entities_;
  std::unordered_map<std::string, EntityIndex> id_index_;
  std::unordered_map<std::string, std::vector<AnchorLink>> anchor_index_;
  std::vector<int64_t> total_links_;
};

// Lowercase, trim and collapse inner whitespace.
std::string NormalizeAnchor(std::string_view text);

enum QueryFlag : uint32_t {
  kRemovedStopword = 1u << 0,
  kRemovedPluralSuffix = 1u << 1,
  kRemovedPunctuation = 1u << 2,
  kDroppedLeading = 1u << 3,
  kDroppedTrailing = 1u << 4,
  kIsCapitalizedSubsequence = 1u << 5,
  kIsOriginal = 1u << 6,
};

constexpr uint32_t kRemovalFlags = kRemovedStopword | kRemovedPluralSuffix |
                                   kRemovedPunctuation | kDroppedLeading |
                                   kDroppedTrailing;

std::vector<std::pair<QueryFlag, std::string_view>> QueryFlagNames();

// A latent query: a sub-phrase or normalization of the mention used to
// look up candidates.
struct Query {
  std::string text;                 // normalized lookup key
  std::vector<std::string> tokens;  // original casing
  uint32_t flags = 0;

  bool has(QueryFlag f) const { return (flags & f) != 0; }
};

struct QueryOptions {
  int max_depth = 3;  // composed edits per query
};

// Closure of single-step edits on the mention tokens (stopword, plural
// suffix and punctuation removal, dropping the first or last token), each
// edit type used at most once per derivation and at most `max_depth` edits
// deep. Queries are deduplicated by normalized text, keeping the flags of
// the first derivation in breadth-first order. The maximal capitalized run
// is always included when one exists. The original query comes first.
std::vector<Query> GenerateQueries(std::span<const Token> mention_tokens,
                                   const QueryOptions &options = {});

bool IsStopword(std::string_view lowercase_word);
std::span<const std::string_view> Stopwords();

struct CandidateProvenance {
  int query;  // index into the query list
  int64_t count;
};

// Deduplicated candidate entities; NULL is always the last entry.
struct CandidateSet {
  std::vector<EntityIndex> candidates;
  std::vector<std::vector<CandidateProvenance>> provenance;

  size_t size() const { return candidates.size(); }
  // Position of `e` in `candidates`, or -1.
  int IndexOf(EntityIndex e) const;
};

// Union over queries of the top_k entities by anchor count, plus NULL.
CandidateSet CandidatesFor(const KnowledgeBase &kb,
                           std::span<const Query> queries, int top_k);

}  // namespace clink

#endif  // CLINK_KB_H_
