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

#ifndef CLINK_TEXTPROC_H_
#define CLINK_TEXTPROC_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clink/common.h"

namespace clink {

struct Token {
  std::string surface;
  bool is_capitalized = false;
  std::optional<std::string> pos_tag;
  std::optional<std::string> ner_tag;
};

Token MakeToken(std::string surface);

// Half-open token range [start, end) within a document.
struct Mention {
  std::string doc_id;
  int start = 0;
  int end = 0;
  std::optional<std::string> gold_entity;

  int length() const { return end - start; }
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<Mention> mentions;
};

struct ViewConfig {
  int context_window = 10;
  int doc_cap = 2000;
};

// The three source-side views of a mention. All spans point into the
// document's token list; the document must outlive the views.
struct GranularityViews {
  std::span<const Token> mention;
  std::span<const Token> context;
  std::span<const Token> document;
};

// The two target-side views of an entity article.
struct TargetViews {
  std::vector<Token> title;
  std::vector<Token> body;
};

// Whitespace tokenizer that splits punctuation off token edges. Tokens made
// of alternating letters and periods ("U.N.") are kept whole.
std::vector<Token> Tokenize(std::string_view text);

// Raises SpanError unless 0 <= start < end <= tokens.size().
void ValidateSpan(const Mention &mention, size_t doc_length);

// Extracts the mention, its context window and the (capped) document. When
// the document exceeds doc_cap the kept window is re-centered on the
// mention so the mention is always inside it.
GranularityViews ExtractViews(std::span<const Token> doc, const Mention &mention,
                              const ViewConfig &config);

// Title underscores are read as spaces; the body is capped at doc_cap.
TargetViews ExtractTargetViews(std::string_view title, std::string_view body,
                               int doc_cap);

std::vector<std::string> Surfaces(std::span<const Token> tokens);

bool IsPunctuation(std::string_view token);

}  // namespace clink

#endif  // CLINK_TEXTPROC_H_
