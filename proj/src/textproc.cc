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

#include "clink/textproc.h"

#include <algorithm>
#include <cctype>

namespace clink {

namespace {

bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }
bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)); }

// "U.N.", "e.g.", "J." -- letter, period, letter, period, ...
bool IsDottedAbbreviation(std::string_view s) {
  if (s.size() < 2 || s.size() % 2 != 0) return false;
  for (size_t i = 0; i < s.size(); i += 2) {
    if (!IsAlpha(s[i]) || s[i + 1] != '.') return false;
  }
  return true;
}

void SplitChunk(std::string_view chunk, std::vector<Token> *out) {
  if (IsDottedAbbreviation(chunk)) {
    out->push_back(MakeToken(std::string(chunk)));
    return;
  }
  size_t begin = 0;
  size_t end = chunk.size();
  while (begin < end && IsPunct(chunk[begin])) ++begin;
  while (end > begin && IsPunct(chunk[end - 1])) --end;
  for (size_t i = 0; i < begin; ++i) {
    out->push_back(MakeToken(std::string(1, chunk[i])));
  }
  if (begin < end) {
    out->push_back(MakeToken(std::string(chunk.substr(begin, end - begin))));
  }
  for (size_t i = std::max(end, begin); i < chunk.size(); ++i) {
    out->push_back(MakeToken(std::string(1, chunk[i])));
  }
}

}  // namespace

Token MakeToken(std::string surface) {
  Token t;
  t.is_capitalized =
      !surface.empty() && std::isupper(static_cast<unsigned char>(surface[0]));
  t.surface = std::move(surface);
  return t;
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) SplitChunk(text.substr(i, j - i), &out);
    i = j;
  }
  return out;
}

void ValidateSpan(const Mention &mention, size_t doc_length) {
  if (mention.start < 0 || mention.start >= mention.end ||
      static_cast<size_t>(mention.end) > doc_length) {
    throw SpanError("invalid mention span [" + std::to_string(mention.start) +
                    ", " + std::to_string(mention.end) + ") in document '" +
                    mention.doc_id + "' of length " +
                    std::to_string(doc_length));
  }
}

GranularityViews ExtractViews(std::span<const Token> doc, const Mention &mention,
                              const ViewConfig &config) {
  ValidateSpan(mention, doc.size());
  const int n = static_cast<int>(doc.size());
  const int window = std::max(0, config.context_window);
  const int cap = std::max(1, config.doc_cap);

  GranularityViews views;
  views.mention = doc.subspan(static_cast<size_t>(mention.start),
                              static_cast<size_t>(mention.length()));
  const int ctx_start = std::max(0, mention.start - window);
  const int ctx_end = std::min(n, mention.end + window);
  views.context = doc.subspan(static_cast<size_t>(ctx_start),
                              static_cast<size_t>(ctx_end - ctx_start));

  int doc_start = 0;
  if (n > cap && mention.end > cap) {
    const int center = (mention.start + mention.end) / 2;
    doc_start = std::clamp(center - cap / 2, 0, n - cap);
    // A mention longer than the cap keeps its leading tokens.
    if (mention.start < doc_start) doc_start = mention.start;
  }
  views.document = doc.subspan(static_cast<size_t>(doc_start),
                               static_cast<size_t>(std::min(cap, n - doc_start)));
  return views;
}

TargetViews ExtractTargetViews(std::string_view title, std::string_view body,
                               int doc_cap) {
  std::string spaced(title);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  TargetViews views;
  views.title = Tokenize(spaced);
  if (views.title.empty()) throw InvalidEntityError("entity title is empty");
  views.body = Tokenize(body);
  if (static_cast<int>(views.body.size()) > doc_cap) {
    views.body.resize(static_cast<size_t>(std::max(0, doc_cap)));
  }
  return views;
}

std::vector<std::string> Surfaces(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) out.push_back(t.surface);
  return out;
}

bool IsPunctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), IsPunct);
}

}  // namespace clink
