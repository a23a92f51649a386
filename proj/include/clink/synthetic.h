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

#ifndef CLINK_SYNTHETIC_H_
#define CLINK_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "clink/corpus.h"
#include "clink/embeddings.h"

namespace clink {

// Controls the synthetic stand-in for a licensed entity linking corpus.
//
// Every topic owns two disjoint word lists: a "source" register used in
// documents and an "article" register used in entity articles and titles.
// Both registers embed near the same topic centroid, so topic similarity
// is visible to the encoders but not to exact-match tf-idf. Entities are
// grouped by a shared surname (`mention_ambiguity` entities per group, each
// from a different topic) and one member of each group gets most of the
// surname's anchor links.
//
// Mentions come in three kinds, in exact proportions:
//   - context-free: the mention's segment is all noise, and so is the rest
//     of its document; gold is the most-linked member (only the link prior
//     can resolve it);
//   - misleading: topical context, gold is a less-linked member;
//   - agreeing: topical context, gold is the most-linked member.
//
// With `test_group_fraction` > 0 the test split only mentions surname groups
// that never occur in training, so per-entity memorization does not carry
// over and only the link prior and topical similarity transfer.
struct SyntheticSpec {
  int n_topics = 4;
  int vocab_per_topic = 60;  // split evenly across the two registers
  int noise_vocab = 60;
  int n_entities = 40;
  int mention_ambiguity = 2;
  int train_mentions = 2000;
  int test_mentions = 400;
  int mentions_per_doc = 3;
  int segment_length = 28;
  int article_length = 60;
  double noise_rate = 0.3;
  double misleading_prior_fraction = 0.5;
  double context_free_fraction = 0.2;
  double test_group_fraction = 0.5;
  int dominant_count = 50;  // anchor-count skew: surname links of the
  int minor_count = 10;     // most-linked member vs the others
  int dim = 20;
  double embedding_noise = 0.5;
  uint64_t seed = 7;
};

// Raises SpecError if the spec cannot be realized.
void ValidateSyntheticSpec(const SyntheticSpec &spec);

struct SyntheticData {
  std::vector<ArticleRecord> articles;
  std::vector<AnchorRecord> anchors;
  std::vector<Document> train;
  std::vector<Document> test;
  EmbeddingTable embeddings;
  // Topic of every topical word (either register); -1 is never stored.
  std::unordered_map<std::string, int> word_topic;
  // Embedded words in file order for topics.tsv: word, topic, register.
  struct VocabEntry {
    std::string word;
    int topic;
    std::string kind;
  };
  std::vector<VocabEntry> vocabulary;
};

SyntheticData GenerateSynthetic(const SyntheticSpec &spec);

// Writes articles.jsonl, anchors.jsonl, train.jsonl, test.jsonl,
// embeddings.txt and topics.tsv into `dir` (created if missing).
void WriteSynthetic(const SyntheticData &data, const std::string &dir);

// Reads topics.tsv back into a word -> topic map (topical words only).
std::unordered_map<std::string, int> ReadTopicMap(const std::string &path);

}  // namespace clink

#endif  // CLINK_SYNTHETIC_H_
