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


#include <string>
#include <vector>

#include "clink/textproc.h"
#include "doctest.h"
#include "test_util.h"

namespace clink {
namespace {

std::vector<std::string> TokenizeSurfaces(std::string_view text) {
  return Surfaces(Tokenize(text));
}

std::vector<Token> Numbered(int n) {
  std::vector<Token> doc;
  for (int i = 0; i < n; ++i) doc.push_back(MakeToken("t" + std::to_string(i)));
  return doc;
}

Mention Span(int start, int end) {
  Mention m;
  m.start = start;
  m.end = end;
  return m;
}

// Offset of `view` within `doc`.
long Offset(std::span<const Token> view, const std::vector<Token> &doc) {
  return view.data() - doc.data();
}

TEST_CASE("tokenize splits punctuation off token edges") {
  CHECK(TokenizeSurfaces("Pink Floyd, yes.") ==
        std::vector<std::string>{"Pink", "Floyd", ",", "yes", "."});
  CHECK(TokenizeSurfaces("").empty());
  CHECK(TokenizeSurfaces("   \t\n").empty());
  CHECK(TokenizeSurfaces("(Obama's)") ==
        std::vector<std::string>{"(", "Obama's", ")"});
  CHECK(TokenizeSurfaces("well-known") == std::vector<std::string>{"well-known"});
}

TEST_CASE("dotted abbreviations stay whole") {
  CHECK(TokenizeSurfaces("U.N. weapons") == std::vector<std::string>{"U.N.", "weapons"});
  CHECK(TokenizeSurfaces("the U.S.") == std::vector<std::string>{"the", "U.S."});
  CHECK(TokenizeSurfaces("end.") == std::vector<std::string>{"end", "."});
}

TEST_CASE("tokens record capitalization") {
  const auto tokens = Tokenize("Pink floyd");
  CHECK(tokens[0].is_capitalized);
  CHECK_FALSE(tokens[1].is_capitalized);
  CHECK_FALSE(tokens[0].pos_tag.has_value());
}

TEST_CASE("context window arithmetic") {
  const auto doc = Numbered(100);
  const ViewConfig config{10, 2000};
  const auto v = ExtractViews(doc, Span(50, 52), config);
  CHECK(Offset(v.mention, doc) == 50);
  CHECK(v.mention.size() == 2);
  CHECK(Offset(v.context, doc) == 40);
  CHECK(v.context.size() == 22);
  CHECK(v.document.size() == 100);

  const auto edge = ExtractViews(doc, Span(0, 2), config);
  CHECK(Offset(edge.context, doc) == 0);
  CHECK(edge.context.size() == 12);

  const auto tail = ExtractViews(doc, Span(98, 100), config);
  CHECK(Offset(tail.context, doc) == 88);
  CHECK(tail.context.size() == 12);
}

TEST_CASE("document view is capped") {
  const auto doc = Numbered(5000);
  const auto v = ExtractViews(doc, Span(10, 12), {10, 2000});
  CHECK(v.document.size() == 2000);
  CHECK(Offset(v.document, doc) == 0);
}

TEST_CASE("document view re-centers on a mention past the cap") {
  const auto doc = Numbered(5000);
  const auto v = ExtractViews(doc, Span(4000, 4003), {10, 2000});
  CHECK(v.document.size() == 2000);
  CHECK(Offset(v.document, doc) <= 4000);
  CHECK(Offset(v.document, doc) + 2000 >= 4003);
}

TEST_CASE("invalid spans") {
  const auto doc = Numbered(10);
  const ViewConfig config;
  CHECK_THROWS_AS(ExtractViews(doc, Span(5, 5), config), SpanError);
  CHECK_THROWS_AS(ExtractViews(doc, Span(6, 5), config), SpanError);
  CHECK_THROWS_AS(ExtractViews(doc, Span(-1, 2), config), SpanError);
  CHECK_THROWS_AS(ExtractViews(doc, Span(8, 11), config), SpanError);
  CHECK_NOTHROW(ExtractViews(doc, Span(9, 10), config));
}

TEST_CASE("views nest and stay pure over random spans") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(UniformIndex(rng, 300));
    const auto doc = Numbered(n);
    const int start = static_cast<int>(UniformIndex(rng, static_cast<uint64_t>(n)));
    const int len = 1 + static_cast<int>(UniformIndex(rng, static_cast<uint64_t>(std::min(6, n - start))));
    const Mention m = Span(start, start + len);
    const ViewConfig config{static_cast<int>(UniformIndex(rng, 15)),
                            std::max(len, 1 + static_cast<int>(UniformIndex(rng, 120)))};
    const auto v = ExtractViews(doc, m, config);
    const long ms = Offset(v.mention, doc), cs = Offset(v.context, doc),
               ds = Offset(v.document, doc);
    const long me = ms + static_cast<long>(v.mention.size());
    const long ce = cs + static_cast<long>(v.context.size());
    const long de = ds + static_cast<long>(v.document.size());
    REQUIRE(ms == start);
    REQUIRE(me == start + len);
    // mention within context within [0, n); mention within document.
    REQUIRE(cs <= ms);
    REQUIRE(me <= ce);
    REQUIRE(cs >= 0);
    REQUIRE(ce <= n);
    REQUIRE(ds <= ms);
    REQUIRE(me <= de);
    REQUIRE(de <= n);
    REQUIRE(static_cast<int>(v.document.size()) == std::min(n, config.doc_cap));
    REQUIRE(cs == std::max(0, start - config.context_window));
    REQUIRE(ce == std::min(n, start + len + config.context_window));

    const auto again = ExtractViews(doc, m, config);
    REQUIRE(again.context.data() == v.context.data());
    REQUIRE(again.document.data() == v.document.data());
    REQUIRE(again.document.size() == v.document.size());
  }
}

TEST_CASE("target views") {
  const auto gavin = ExtractTargetViews("Gavin_Floyd", "Gavin Floyd is a pitcher.", 2000);
  CHECK(Surfaces(gavin.title) == std::vector<std::string>{"Gavin", "Floyd"});
  CHECK(gavin.body.size() == 6);

  std::string big;
  for (int i = 0; i < 10000; ++i) big += "w ";
  CHECK(ExtractTargetViews("Pink_Floyd", big, 2000).body.size() == 2000);

  const auto a = ExtractTargetViews("A", "", 2000);
  CHECK(Surfaces(a.title) == std::vector<std::string>{"A"});
  CHECK(a.body.empty());

  CHECK_THROWS_AS(ExtractTargetViews("", "body", 2000), InvalidEntityError);
  CHECK_THROWS_AS(ExtractTargetViews("__", "body", 2000), InvalidEntityError);
}

TEST_CASE("punctuation predicate") {
  CHECK(IsPunctuation(","));
  CHECK(IsPunctuation("..."));
  CHECK_FALSE(IsPunctuation("U.N."));
  CHECK_FALSE(IsPunctuation(""));
}

}  // namespace
}  // namespace clink
