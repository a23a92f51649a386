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

#include "clink/corpus.h"

#include <fstream>

#include "json.hpp"

namespace clink {

using nlohmann::json;

namespace {

// Calls `fn(record, line_no)` for every non-blank line, converting JSON
// errors into FormatError with the line number.
template <typename Fn>
void ForEachRecord(std::istream &in, Fn fn) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line), line_no);
    } catch (const json::exception &e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<std::string> OptionalString(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::vector<Document> ReadCorpus(std::istream &in) {
  std::vector<Document> docs;
  ForEachRecord(in, [&](const json &j, long line_no) {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("tokens")) {
      for (const auto &t : j.at("tokens")) {
        if (t.is_string()) {
          doc.tokens.push_back(MakeToken(t.get<std::string>()));
          continue;
        }
        Token token = MakeToken(t.at("text").get<std::string>());
        token.pos_tag = OptionalString(t, "pos");
        token.ner_tag = OptionalString(t, "ner");
        doc.tokens.push_back(std::move(token));
      }
    } else {
      doc.tokens = Tokenize(j.at("text").get<std::string>());
    }
    for (const auto &t : doc.tokens) {
      if (t.surface.empty()) {
        throw FormatError("line " + std::to_string(line_no) + ": empty token");
      }
    }
    if (j.contains("mentions")) {
      for (const auto &m : j.at("mentions")) {
        Mention mention;
        mention.doc_id = doc.doc_id;
        mention.start = m.at("start").get<int>();
        mention.end = m.at("end").get<int>();
        mention.gold_entity = OptionalString(m, "gold_entity");
        try {
          ValidateSpan(mention, doc.tokens.size());
        } catch (const SpanError &e) {
          throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
        doc.mentions.push_back(std::move(mention));
      }
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<Document> ReadCorpusFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path);
  try {
    return ReadCorpus(in);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteDocument(const Document &doc, std::ostream &out) {
  json j;
  j["doc_id"] = doc.doc_id;
  bool tagged = false;
  for (const auto &t : doc.tokens) tagged |= t.pos_tag || t.ner_tag;
  json tokens = json::array();
  for (const auto &t : doc.tokens) {
    if (!tagged) {
      tokens.push_back(t.surface);
      continue;
    }
    json tj = {{"text", t.surface}};
    if (t.pos_tag) tj["pos"] = *t.pos_tag;
    if (t.ner_tag) tj["ner"] = *t.ner_tag;
    tokens.push_back(std::move(tj));
  }
  j["tokens"] = std::move(tokens);
  json mentions = json::array();
  for (const auto &m : doc.mentions) {
    json mj = {{"start", m.start}, {"end", m.end}};
    mj["gold_entity"] = m.gold_entity ? json(*m.gold_entity) : json(nullptr);
    mentions.push_back(std::move(mj));
  }
  j["mentions"] = std::move(mentions);
  out << j.dump() << '\n';
}

std::vector<ArticleRecord> ReadArticles(std::istream &in) {
  std::vector<ArticleRecord> out;
  ForEachRecord(in, [&](const json &j, long) {
    out.push_back({j.at("id").get<std::string>(),
                   j.at("title").get<std::string>(),
                   j.value("body", std::string())});
  });
  return out;
}

std::vector<AnchorRecord> ReadAnchors(std::istream &in) {
  std::vector<AnchorRecord> out;
  ForEachRecord(in, [&](const json &j, long line_no) {
    AnchorRecord a{j.at("anchor_text").get<std::string>(),
                   j.at("entity_id").get<std::string>(),
                   j.value("count", int64_t{1})};
    if (a.count < 1) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": anchor count must be >= 1");
    }
    out.push_back(std::move(a));
  });
  return out;
}

void WriteArticle(const ArticleRecord &article, std::ostream &out) {
  json j = {{"id", article.id}, {"title", article.title}, {"body", article.body}};
  out << j.dump() << '\n';
}

void WriteAnchor(const AnchorRecord &anchor, std::ostream &out) {
  json j = {{"anchor_text", anchor.anchor_text},
            {"entity_id", anchor.entity_id},
            {"count", anchor.count}};
  out << j.dump() << '\n';
}

std::vector<Prediction> ReadPredictions(std::istream &in) {
  std::vector<Prediction> out;
  ForEachRecord(in, [&](const json &j, long) {
    Prediction p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.start = j.at("span").at(0).get<int>();
    p.end = j.at("span").at(1).get<int>();
    p.entity = OptionalString(j, "entity");
    p.prob = j.value("prob", 0.0);
    out.push_back(std::move(p));
  });
  return out;
}

void WritePrediction(const Prediction &prediction, std::ostream &out) {
  json j;
  j["doc_id"] = prediction.doc_id;
  j["span"] = {prediction.start, prediction.end};
  j["entity"] = prediction.entity ? json(*prediction.entity) : json(nullptr);
  j["prob"] = prediction.prob;
  out << j.dump() << '\n';
}

}  // namespace clink
