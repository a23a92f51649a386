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

#ifndef CLINK_CORPUS_H_
#define CLINK_CORPUS_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "clink/textproc.h"

namespace clink {

// Line-delimited JSON readers and writers for the on-disk formats.
//
// Corpus record:
//   {"doc_id": "d1",
//    "tokens": ["Pink", "Floyd", ...] | [{"text": "Pink", "pos": "NNP",
//                                         "ner": "ORG"}, ...],
//    "mentions": [{"start": 0, "end": 2, "gold_entity": "Pink_Floyd"}]}
// A record may carry "text" instead of "tokens"; it is then tokenized.
// "gold_entity" may be absent or null.
//
// Article record: {"id": "E1", "title": "Pink_Floyd", "body": "..."}
// Anchor record:  {"anchor_text": "floyd", "entity_id": "E1", "count": 3}
// where "count" is optional and defaults to 1.
//
// Prediction record (written by `link`, read by `evaluate`):
//   {"doc_id": "d1", "span": [0, 2], "entity": "E1" | null, "prob": 0.93}

struct ArticleRecord {
  std::string id;
  std::string title;
  std::string body;
};

struct AnchorRecord {
  std::string anchor_text;
  std::string entity_id;
  int64_t count = 1;
};

struct Prediction {
  std::string doc_id;
  int start = 0;
  int end = 0;
  std::optional<std::string> entity;
  double prob = 0.0;
};

std::vector<Document> ReadCorpus(std::istream &in);
std::vector<Document> ReadCorpusFile(const std::string &path);
void WriteDocument(const Document &doc, std::ostream &out);

std::vector<ArticleRecord> ReadArticles(std::istream &in);
std::vector<AnchorRecord> ReadAnchors(std::istream &in);
void WriteArticle(const ArticleRecord &article, std::ostream &out);
void WriteAnchor(const AnchorRecord &anchor, std::ostream &out);

std::vector<Prediction> ReadPredictions(std::istream &in);
void WritePrediction(const Prediction &prediction, std::ostream &out);

}  // namespace clink

#endif  // CLINK_CORPUS_H_
