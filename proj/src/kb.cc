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

#include "clink/kb.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <map>
#include <unordered_set>

#include "clink/binary_io.h"

namespace clink {

namespace {

// Function words removed at mention edges during query generation.
constexpr std::array<std::string_view, 52> kStopwords = {
    "a",     "an",    "the",   "and",   "or",    "but",   "of",    "in",
    "on",    "at",    "to",    "for",   "from",  "by",    "with",  "about",
    "as",    "into",  "over",  "after", "before", "than", "this",  "that",
    "these", "those", "is",    "are",   "was",   "were",  "be",    "been",
    "it",    "its",   "his",   "her",   "their", "our",   "my",    "your",
    "he",    "she",   "they",  "we",    "you",   "i",     "not",   "no",
    "so",    "if",    "de",    "la"};

std::string JoinNormalized(const std::vector<std::string> &tokens) {
  std::string joined;
  for (const auto &t : tokens) {
    if (!joined.empty()) joined.push_back(' ');
    joined += t;
  }
  return NormalizeAnchor(joined);
}

bool Capitalized(const std::string &s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

enum Edit {
  kEditLeadingStopword,
  kEditTrailingStopword,
  kEditPluralSuffix,
  kEditPunctuation,
  kEditDropFirst,
  kEditDropLast,
  kNumEdits
};

// Applies `edit` to `tokens`. Returns false when the edit does not apply or
// would leave nothing.
bool ApplyEdit(Edit edit, std::vector<std::string> *tokens, uint32_t *flags) {
  auto &t = *tokens;
  switch (edit) {
    case kEditLeadingStopword:
      if (t.size() < 2 || !IsStopword(ToLower(t.front()))) return false;
      t.erase(t.begin());
      *flags |= kRemovedStopword;
      return true;
    case kEditTrailingStopword:
      if (t.size() < 2 || !IsStopword(ToLower(t.back()))) return false;
      t.pop_back();
      *flags |= kRemovedStopword;
      return true;
    case kEditPluralSuffix:
      if (t.empty() || t.back().size() <= 3 || t.back().back() != 's') {
        return false;
      }
      t.back().pop_back();
      *flags |= kRemovedPluralSuffix;
      return true;
    case kEditPunctuation: {
      const auto kept = std::count_if(t.begin(), t.end(), [](const auto &s) {
        return !IsPunctuation(s);
      });
      if (kept == 0 || kept == static_cast<long>(t.size())) return false;
      std::erase_if(t, [](const auto &s) { return IsPunctuation(s); });
      *flags |= kRemovedPunctuation;
      return true;
    }
    case kEditDropFirst:
      if (t.size() < 2) return false;
      t.erase(t.begin());
      *flags |= kDroppedLeading;
      return true;
    case kEditDropLast:
      if (t.size() < 2) return false;
      t.pop_back();
      *flags |= kDroppedTrailing;
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string NormalizeAnchor(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool IsStopword(std::string_view lowercase_word) {
  return std::find(kStopwords.begin(), kStopwords.end(), lowercase_word) !=
         kStopwords.end();
}

std::span<const std::string_view> Stopwords() { return kStopwords; }

std::vector<std::pair<QueryFlag, std::string_view>> QueryFlagNames() {
  return {{kRemovedStopword, "removed_stopword"},
          {kRemovedPluralSuffix, "removed_plural_suffix"},
          {kRemovedPunctuation, "removed_punctuation"},
          {kDroppedLeading, "dropped_leading"},
          {kDroppedTrailing, "dropped_trailing"},
          {kIsCapitalizedSubsequence, "is_capitalized_subsequence"},
          {kIsOriginal, "is_original"}};
}

std::vector<Query> GenerateQueries(std::span<const Token> mention_tokens,
                                   const QueryOptions &options) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;

  struct Node {
    std::vector<std::string> tokens;
    uint32_t flags;
    uint32_t used_edits;
    int depth;
  };
  std::deque<Node> frontier;
  frontier.push_back({Surfaces(mention_tokens), kIsOriginal, 0, 0});
  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    std::string text = JoinNormalized(node.tokens);
    if (text.empty() || !seen.insert(text).second) continue;
    queries.push_back({std::move(text), node.tokens, node.flags});
    if (node.depth >= options.max_depth) continue;
    for (int e = 0; e < kNumEdits; ++e) {
      if (node.used_edits & (1u << e)) continue;
      Node next{node.tokens, node.flags & ~kIsOriginal,
                node.used_edits | (1u << e), node.depth + 1};
      if (ApplyEdit(static_cast<Edit>(e), &next.tokens, &next.flags)) {
        frontier.push_back(std::move(next));
      }
    }
  }

  // Maximal run of capitalized tokens; the first longest run wins.
  size_t best_start = 0, best_len = 0;
  for (size_t i = 0; i < mention_tokens.size();) {
    size_t j = i;
    while (j < mention_tokens.size() && mention_tokens[j].is_capitalized) ++j;
    if (j - i > best_len) {
      best_start = i;
      best_len = j - i;
    }
    i = std::max(j, i + 1);
  }
  if (best_len > 0) {
    std::vector<std::string> run;
    for (size_t i = best_start; i < best_start + best_len; ++i) {
      run.push_back(mention_tokens[i].surface);
    }
    std::string text = JoinNormalized(run);
    if (seen.insert(text).second) {
      uint32_t flags = 0;
      if (best_start > 0) flags |= kDroppedLeading;
      if (best_start + best_len < mention_tokens.size()) flags |= kDroppedTrailing;
      queries.push_back({std::move(text), std::move(run), flags});
    }
  }

  for (auto &q : queries) {
    if (std::all_of(q.tokens.begin(), q.tokens.end(), Capitalized)) {
      q.flags |= kIsCapitalizedSubsequence;
    }
  }
  return queries;
}

KnowledgeBase KnowledgeBase::Ingest(std::span<const ArticleRecord> articles,
                                    std::span<const AnchorRecord> anchors,
                                    IngestStats *stats) {
  KnowledgeBase kb;
  IngestStats local;
  for (const auto &a : articles) {
    const auto idx = static_cast<EntityIndex>(kb.entities_.size());
    if (!kb.id_index_.emplace(a.id, idx).second) {
      throw IngestError("duplicate entity id '" + a.id + "'");
    }
    kb.entities_.push_back(a);
    ++local.articles;
  }
  std::unordered_map<std::string, std::map<EntityIndex, int64_t>> counts;
  for (const auto &a : anchors) {
    const EntityIndex e = kb.Find(a.entity_id);
    if (e == kNullEntity) {
      ++local.skipped_anchors;
      continue;
    }
    std::string key = NormalizeAnchor(a.anchor_text);
    if (key.empty()) {
      ++local.skipped_anchors;
      continue;
    }
    counts[std::move(key)][e] += a.count;
    ++local.anchors;
  }
  for (auto &[anchor, links] : counts) {
    auto &list = kb.anchor_index_[anchor];
    for (const auto &[e, c] : links) list.push_back({e, c});
  }
  kb.Finalize();
  if (stats) *stats = local;
  return kb;
}

void KnowledgeBase::Finalize() {
  total_links_.assign(entities_.size(), 0);
  for (auto &[anchor, links] : anchor_index_) {
    std::sort(links.begin(), links.end(),
              [this](const AnchorLink &a, const AnchorLink &b) {
                if (a.count != b.count) return a.count > b.count;
                return entities_[static_cast<size_t>(a.entity)].id <
                       entities_[static_cast<size_t>(b.entity)].id;
              });
    for (const auto &l : links) total_links_[static_cast<size_t>(l.entity)] += l.count;
  }
}

EntityIndex KnowledgeBase::Find(std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  return it == id_index_.end() ? kNullEntity : it->second;
}

std::string_view KnowledgeBase::IdOf(EntityIndex e) const {
  if (e == kNullEntity) return "NIL";
  return entities_[static_cast<size_t>(e)].id;
}

std::span<const AnchorLink> KnowledgeBase::Links(
    std::string_view normalized_anchor) const {
  auto it = anchor_index_.find(std::string(normalized_anchor));
  if (it == anchor_index_.end()) return {};
  return it->second;
}

int64_t KnowledgeBase::Count(std::string_view normalized_anchor,
                             EntityIndex e) const {
  for (const auto &l : Links(normalized_anchor)) {
    if (l.entity == e) return l.count;
  }
  return 0;
}

void KnowledgeBase::Save(const std::string &path) const {
  BinaryWriter w;
  w.WriteBytes(kMagic);
  w.Write<uint32_t>(static_cast<uint32_t>(entities_.size()));
  for (const auto &e : entities_) {
    w.WriteString(e.id);
    w.WriteString(e.title);
    w.WriteString(e.body);
  }
  std::vector<const std::string *> keys;
  for (const auto &[anchor, links] : anchor_index_) keys.push_back(&anchor);
  std::sort(keys.begin(), keys.end(),
            [](const auto *a, const auto *b) { return *a < *b; });
  w.Write<uint32_t>(static_cast<uint32_t>(keys.size()));
  for (const auto *key : keys) {
    const auto &links = anchor_index_.at(*key);
    w.WriteString(*key);
    w.Write<uint32_t>(static_cast<uint32_t>(links.size()));
    for (const auto &l : links) {
      w.Write<int32_t>(l.entity);
      w.Write<int64_t>(l.count);
    }
  }
  w.Commit(path);
}

KnowledgeBase KnowledgeBase::Load(const std::string &path) {
  const std::string payload = ReadChecksummedFile(path, kMagic);
  BinaryReader r(payload);
  KnowledgeBase kb;
  const uint32_t n = r.Read<uint32_t>();
  for (uint32_t i = 0; i < n; ++i) {
    ArticleRecord a;
    a.id = r.ReadString();
    a.title = r.ReadString();
    a.body = r.ReadString();
    kb.id_index_.emplace(a.id, static_cast<EntityIndex>(i));
    kb.entities_.push_back(std::move(a));
  }
  const uint32_t anchors = r.Read<uint32_t>();
  for (uint32_t i = 0; i < anchors; ++i) {
    std::string key = r.ReadString();
    const uint32_t m = r.Read<uint32_t>();
    std::vector<AnchorLink> links;
    for (uint32_t j = 0; j < m; ++j) {
      const auto e = r.Read<int32_t>();
      const auto c = r.Read<int64_t>();
      if (e < 0 || static_cast<uint32_t>(e) >= n || c < 1) {
        throw FormatError(path + ": corrupt anchor entry");
      }
      links.push_back({e, c});
    }
    kb.anchor_index_.emplace(std::move(key), std::move(links));
  }
  if (!r.done()) throw FormatError(path + ": trailing data");
  kb.Finalize();
  return kb;
}

int CandidateSet::IndexOf(EntityIndex e) const {
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == e) return static_cast<int>(i);
  }
  return -1;
}

CandidateSet CandidatesFor(const KnowledgeBase &kb,
                           std::span<const Query> queries, int top_k) {
  CandidateSet set;
  std::unordered_map<EntityIndex, size_t> position;
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const auto links = kb.Links(queries[qi].text);
    const size_t limit = std::min(links.size(), static_cast<size_t>(std::max(1, top_k)));
    for (size_t i = 0; i < limit; ++i) {
      auto [it, inserted] = position.emplace(links[i].entity, set.candidates.size());
      if (inserted) {
        set.candidates.push_back(links[i].entity);
        set.provenance.emplace_back();
      }
      set.provenance[it->second].push_back({static_cast<int>(qi), links[i].count});
    }
  }
  set.candidates.push_back(kNullEntity);
  set.provenance.emplace_back();
  return set;
}

}  // namespace clink
