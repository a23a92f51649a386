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

#include "clink/synthetic.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "clink/kb.h"

namespace clink {

namespace {

constexpr std::array<std::string_view, 5> kTitles = {"President", "Coach", "Doctor",
                                                     "Professor", "Captain"};

class WordMaker {
 public:
  explicit WordMaker(Rng *rng) : rng_(rng) {
    for (auto w : Stopwords()) used_.insert(std::string(w));
    for (auto w : kTitles) used_.insert(ToLower(w));
    used_.insert("jr");
  }

  std::string Next() {
    static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    for (;;) {
      const int syllables = 2 + static_cast<int>(UniformIndex(*rng_, 2));
      std::string w;
      for (int s = 0; s < syllables; ++s) {
        w.push_back(kOnsets[UniformIndex(*rng_, kOnsets.size())]);
        w.push_back(kVowels[UniformIndex(*rng_, kVowels.size())]);
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> Many(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(Next());
    return out;
  }

 private:
  Rng *rng_;
  std::set<std::string> used_;
};

std::string Capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

template <typename T>
const T &Pick(const std::vector<T> &items, Rng &rng) {
  return items[UniformIndex(rng, items.size())];
}

enum class MentionKind { kContextFree, kMisleading, kAgreeing };

struct Entity {
  std::string id;
  int group;
  int topic;
};

}  // namespace

void ValidateSyntheticSpec(const SyntheticSpec &s) {
  auto require = [](bool ok, const std::string &what) {
    if (!ok) throw SpecError("infeasible synthetic spec: " + what);
  };
  require(s.n_topics > 0 && s.vocab_per_topic >= 2 && s.noise_vocab > 0 &&
              s.n_entities > 0 && s.mention_ambiguity > 0 &&
              s.train_mentions >= 0 && s.test_mentions >= 0 &&
              s.mentions_per_doc > 0 && s.segment_length > 0 &&
              s.article_length > 0 && s.dim > 0 && s.dominant_count > 0 &&
              s.minor_count > 0,
          "sizes must be positive");
  require(s.mention_ambiguity <= s.n_entities, "ambiguity exceeds entity count");
  require(s.mention_ambiguity <= s.n_topics,
          "ambiguity exceeds topic count (group members need distinct topics)");
  require(s.noise_rate >= 0.0 && s.noise_rate < 1.0, "noise_rate outside [0, 1)");
  require(s.context_free_fraction >= 0.0 && s.context_free_fraction <= 1.0,
          "context_free_fraction outside [0, 1]");
  require(s.misleading_prior_fraction >= 0.0 &&
              s.misleading_prior_fraction + s.context_free_fraction <= 1.0,
          "misleading + context-free fractions exceed 1");
  require(s.test_group_fraction >= 0.0 && s.test_group_fraction < 1.0,
          "test_group_fraction outside [0, 1)");
  require(s.mention_ambiguity > 1 || s.misleading_prior_fraction == 0.0 ||
              s.n_entities == 0,
          "a misleading prior needs ambiguity > 1");
  require(s.mention_ambiguity == 1 || s.dominant_count > s.minor_count,
          "dominant_count must exceed minor_count");
}

SyntheticData GenerateSynthetic(const SyntheticSpec &spec) {
  ValidateSyntheticSpec(spec);
  Rng rng(spec.seed);
  WordMaker words(&rng);
  SyntheticData data;

  const int src_per_topic = spec.vocab_per_topic / 2;
  const int art_per_topic = spec.vocab_per_topic - src_per_topic;
  std::vector<std::vector<std::string>> source_words, article_words;
  for (int t = 0; t < spec.n_topics; ++t) {
    source_words.push_back(words.Many(src_per_topic));
    article_words.push_back(words.Many(art_per_topic));
  }
  const std::vector<std::string> noise = words.Many(spec.noise_vocab);
  const int n_groups =
      (spec.n_entities + spec.mention_ambiguity - 1) / spec.mention_ambiguity;
  const std::vector<std::string> surnames = words.Many(n_groups);

  // Embeddings: topical words scatter around a unit-norm topic centroid.
  // Nothing else gets a vector, so noise words, surnames, honorifics and
  // function words all share the OOV row and a segment without topical
  // words encodes to zero.
  const int d = spec.dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  auto gaussian = [&] {
    Eigen::RowVectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = StandardNormal(rng) * scale;
    return v;
  };
  std::vector<Eigen::RowVectorXd> centroids;
  for (int t = 0; t < spec.n_topics; ++t) {
    Eigen::RowVectorXd c = gaussian();
    centroids.push_back(c / c.norm());
  }
  std::vector<std::string> vocab_tokens;
  std::vector<Eigen::RowVectorXd> vocab_rows;
  auto add_word = [&](const std::string &w, int topic, const std::string &kind) {
    vocab_tokens.push_back(w);
    vocab_rows.push_back(centroids[static_cast<size_t>(topic)] +
                         spec.embedding_noise * gaussian());
    data.vocabulary.push_back({w, topic, kind});
    data.word_topic[w] = topic;
  };
  for (int t = 0; t < spec.n_topics; ++t) {
    for (const auto &w : source_words[static_cast<size_t>(t)]) add_word(w, t, "source");
    for (const auto &w : article_words[static_cast<size_t>(t)]) add_word(w, t, "article");
  }

  RowMatrixXd matrix(static_cast<Eigen::Index>(vocab_rows.size()), d);
  for (size_t i = 0; i < vocab_rows.size(); ++i) {
    matrix.row(static_cast<Eigen::Index>(i)) = vocab_rows[i];
  }
  data.embeddings = EmbeddingTable(vocab_tokens, matrix);

  // Entities, grouped by surname; members of a group get distinct topics.
  std::vector<Entity> entities;
  std::vector<std::vector<int>> groups(static_cast<size_t>(n_groups));
  std::vector<int> dominant(static_cast<size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    std::vector<int> topics(static_cast<size_t>(spec.n_topics));
    for (int t = 0; t < spec.n_topics; ++t) topics[static_cast<size_t>(t)] = t;
    Shuffle(topics, rng);
    const int size = std::min(spec.mention_ambiguity,
                              spec.n_entities - g * spec.mention_ambiguity);
    for (int m = 0; m < size; ++m) {
      const int index = static_cast<int>(entities.size());
      char id[32];
      std::snprintf(id, sizeof(id), "E%04d", index);
      entities.push_back({id, g, topics[static_cast<size_t>(m)]});
      groups[static_cast<size_t>(g)].push_back(index);
    }
    dominant[static_cast<size_t>(g)] =
        groups[static_cast<size_t>(g)][UniformIndex(rng, static_cast<uint64_t>(size))];
  }

  for (const auto &e : entities) {
    const auto &art = article_words[static_cast<size_t>(e.topic)];
    const std::string first = Capitalize(Pick(art, rng));
    const std::string surname = Capitalize(surnames[static_cast<size_t>(e.group)]);
    std::ostringstream body;
    body << first << ' ' << surname;
    for (int i = 0; i < spec.article_length; ++i) {
      body << ' ' << (UniformUnit(rng) < spec.noise_rate ? Pick(noise, rng) : Pick(art, rng));
    }
    data.articles.push_back({e.id, first + "_" + surname, body.str()});
  }

  for (int g = 0; g < n_groups; ++g) {
    for (int member : groups[static_cast<size_t>(g)]) {
      const int64_t count = member == dominant[static_cast<size_t>(g)]
                                ? spec.dominant_count
                                : spec.minor_count;
      data.anchors.push_back({surnames[static_cast<size_t>(g)],
                              entities[static_cast<size_t>(member)].id, count});
    }
  }
  for (const auto &a : data.articles) {
    std::string name = a.title;
    std::replace(name.begin(), name.end(), '_', ' ');
    data.anchors.push_back({NormalizeAnchor(name), a.id, spec.minor_count});
  }

  // Held-out groups for the test split.
  std::vector<int> order(static_cast<size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) order[static_cast<size_t>(g)] = g;
  Shuffle(order, rng);
  const int n_test_groups =
      static_cast<int>(std::lround(spec.test_group_fraction * n_groups));
  if (spec.test_group_fraction > 0.0 && (n_test_groups == 0 || n_test_groups == n_groups)) {
    throw SpecError("infeasible synthetic spec: too few groups to hold some out");
  }
  std::vector<int> train_groups, test_groups;
  for (int i = 0; i < n_groups; ++i) {
    (i < n_test_groups ? test_groups : train_groups).push_back(order[static_cast<size_t>(i)]);
  }
  if (n_test_groups == 0) test_groups = train_groups;
  std::sort(train_groups.begin(), train_groups.end());
  std::sort(test_groups.begin(), test_groups.end());

  auto make_split = [&](int n_mentions, const std::string &prefix,
                        const std::vector<int> &all_groups) {
    std::vector<int> ambiguous_groups;
    for (int g : all_groups) {
      if (groups[static_cast<size_t>(g)].size() > 1) ambiguous_groups.push_back(g);
    }
    const auto n = static_cast<double>(n_mentions);
    const int n_free = static_cast<int>(std::lround(spec.context_free_fraction * n));
    const int n_mis = ambiguous_groups.empty()
                          ? 0
                          : static_cast<int>(std::lround(spec.misleading_prior_fraction * n));
    if (ambiguous_groups.empty() && spec.misleading_prior_fraction > 0.0 && n_mentions > 0) {
      throw SpecError("infeasible synthetic spec: no ambiguous group in the " + prefix +
                      " split");
    }
    std::vector<MentionKind> kinds;
    for (int i = 0; i < n_mentions; ++i) {
      kinds.push_back(i < n_free             ? MentionKind::kContextFree
                      : i < n_free + n_mis ? MentionKind::kMisleading
                                           : MentionKind::kAgreeing);
    }
    Shuffle(kinds, rng);
    // Context-free mentions share documents so that no document-level view
    // leaks topical words into them.
    std::stable_partition(kinds.begin(), kinds.end(),
                          [](MentionKind k) { return k == MentionKind::kContextFree; });

    std::vector<Document> docs;
    for (int i = 0; i < n_mentions; ++i) {
      if (i % spec.mentions_per_doc == 0) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%05d", prefix.c_str(),
                      i / spec.mentions_per_doc);
        docs.push_back({id, {}, {}});
      }
      Document &doc = docs.back();
      const MentionKind kind = kinds[static_cast<size_t>(i)];
      const int g = kind == MentionKind::kMisleading ? Pick(ambiguous_groups, rng)
                                                     : Pick(all_groups, rng);
      const auto &members = groups[static_cast<size_t>(g)];
      int gold = dominant[static_cast<size_t>(g)];
      if (kind == MentionKind::kMisleading) {
        std::vector<int> others;
        for (int m : members) {
          if (m != gold) others.push_back(m);
        }
        gold = Pick(others, rng);
      }

      const std::string surname = Capitalize(surnames[static_cast<size_t>(g)]);
      const std::string title(kTitles[UniformIndex(rng, kTitles.size())]);
      std::vector<std::string> surface;
      switch (UniformIndex(rng, 5)) {
        case 0: surface = {surname}; break;
        case 1: surface = {title, surname}; break;
        case 2: surface = {"the", title, surname}; break;
        case 3: surface = {"the", surname + "s"}; break;
        default: surface = {surname, ",", "Jr"}; break;
      }

      const int mlen = static_cast<int>(surface.size());
      const int length = std::max(spec.segment_length, mlen + 2);
      const int jitter = static_cast<int>(UniformIndex(rng, 5)) - 2;
      const int pos = std::clamp((length - mlen) / 2 + jitter, 0, length - mlen);
      const int topic = entities[static_cast<size_t>(gold)].topic;
      Mention mention;
      mention.doc_id = doc.doc_id;
      mention.start = static_cast<int>(doc.tokens.size()) + pos;
      mention.end = mention.start + mlen;
      mention.gold_entity = entities[static_cast<size_t>(gold)].id;
      for (int p = 0; p < length; ++p) {
        if (p >= pos && p < pos + mlen) {
          doc.tokens.push_back(MakeToken(surface[static_cast<size_t>(p - pos)]));
          continue;
        }
        const bool topical = kind != MentionKind::kContextFree &&
                             UniformUnit(rng) >= spec.noise_rate;
        doc.tokens.push_back(MakeToken(
            topical ? Pick(source_words[static_cast<size_t>(topic)], rng)
                    : Pick(noise, rng)));
      }
      doc.mentions.push_back(std::move(mention));
    }
    return docs;
  };
  data.train = make_split(spec.train_mentions, "train", train_groups);
  data.test = make_split(spec.test_mentions, "test", test_groups);
  return data;
}

void WriteSynthetic(const SyntheticData &data, const std::string &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char *name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("articles.jsonl");
    for (const auto &a : data.articles) WriteArticle(a, out);
  }
  {
    auto out = open("anchors.jsonl");
    for (const auto &a : data.anchors) WriteAnchor(a, out);
  }
  {
    auto out = open("train.jsonl");
    for (const auto &d : data.train) WriteDocument(d, out);
  }
  {
    auto out = open("test.jsonl");
    for (const auto &d : data.test) WriteDocument(d, out);
  }
  {
    auto out = open("embeddings.txt");
    WriteWord2VecText(data.embeddings, out);
  }
  {
    auto out = open("topics.tsv");
    for (const auto &v : data.vocabulary) {
      out << v.word << '\t' << v.topic << '\t' << v.kind << '\n';
    }
  }
}

std::unordered_map<std::string, int> ReadTopicMap(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::unordered_map<std::string, int> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word, kind;
    int topic;
    if (!(fields >> word >> topic >> kind)) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": malformed");
    }
    if (topic >= 0) out[word] = topic;
  }
  return out;
}

}  // namespace clink
