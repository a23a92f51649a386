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


#include <cmath>
#include <set>
#include <vector>

#include "clink/model.h"
#include "clink/synthetic.h"
#include "doctest.h"
#include "oracle.h"
#include "test_util.h"

namespace clink {
namespace {

using oracle::TinyWorld;

// Instance for a mention of `surface` inside the tiny world's document.
MentionInstance Retarget(TinyWorld &w, const std::string &surface,
                         std::optional<std::string> gold) {
  Document doc = w.doc;
  Mention &m = doc.mentions[0];
  doc.tokens[static_cast<size_t>(m.start)] = MakeToken(surface);
  m.gold_entity = std::move(gold);
  return PrepareMention(w.model.config, &w.model.vocab, true, *w.context, doc, m);
}

void ZeroWeights(Model *m) {
  std::fill(m->w_sparse.begin(), m->w_sparse.end(), 0.0);
  m->w_dense.setZero();
}

bool SameParameters(const Model &a, const Model &b) {
  if (a.w_sparse != b.w_sparse || a.w_dense != b.w_dense) return false;
  for (int i = 0; i < kNumBanks; ++i) {
    if (a.cnn.banks[i].filters != b.cnn.banks[i].filters) return false;
  }
  return true;
}

TEST_CASE("tiny world shape") {
  TinyWorld w(1);
  CHECK(w.instance.num_queries() == 2);
  CHECK(w.instance.num_candidates() == 3);
  CHECK(w.instance.candidates.candidates.back() == kNullEntity);
  CHECK(w.instance.gold >= 0);
  CHECK(w.instance.fe.size() == 6);
}

TEST_CASE("zero weights give a uniform posterior") {
  TinyWorld w(2);
  ZeroWeights(&w.model);
  const ScoreTable t = ScorePairs(w.model, *w.context, w.instance);
  CHECK(t.scores.isZero(0));
  for (const auto &c : Infer(w.model, *w.context, w.instance)) {
    CHECK(c.marginal_prob == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("NULL alone takes all the mass") {
  TinyWorld w(3);
  const MentionInstance inst = Retarget(w, "zzz", std::nullopt);
  REQUIRE(inst.num_candidates() == 1);
  REQUIRE(inst.num_queries() == 1);
  const auto ranked = Infer(w.model, *w.context, inst);
  CHECK(ranked[0].entity == kNullEntity);
  CHECK(ranked[0].marginal_prob == 1.0);
}

TEST_CASE("scores and marginals match brute-force enumeration") {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    TinyWorld w(100 + seed);
    const ScoreTable t = ScorePairs(w.model, *w.context, w.instance);
    const auto want = oracle::Scores(w.model, *w.context, w.instance);
    for (size_t i = 0; i < want.size(); ++i) {
      for (size_t q = 0; q < want[i].size(); ++q) {
        REQUIRE(std::abs(t.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) -
                         want[i][q]) < 1e-12);
      }
    }
    const auto p = oracle::Marginals(want);
    const Eigen::VectorXd got = Marginals(t.scores);
    REQUIRE(std::abs(got.sum() - 1.0) < 1e-9);
    for (size_t i = 0; i < p.size(); ++i) {
      REQUIRE(std::abs(got[static_cast<Eigen::Index>(i)] - p[i]) < 1e-12);
    }
  }
}

TEST_CASE("marginal edge cases") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(3, 2, 4.25);
  const Eigen::VectorXd flat = Marginals(s);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(flat[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  Eigen::MatrixXd uneven = Eigen::MatrixXd::Zero(2, 3);
  uneven(1, 2) = 100.0;
  CHECK(Marginals(uneven)[1] > 0.999);
  CHECK(LogSumExp(Eigen::MatrixXd::Constant(1, 1, 1e300)) == 1e300);
  CHECK(std::isfinite(Marginals(Eigen::MatrixXd::Constant(2, 2, 1e4))[0]));
}

TEST_CASE("marginals are invariant to shifting every score") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd s(4, 3);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s.data()[i] = static_cast<double>(UniformIndex(rng, 64)) / 8.0 - 4.0;
    }
    const double c = static_cast<double>(UniformIndex(rng, 200)) - 100.0;
    const Eigen::MatrixXd shifted = (s.array() + c).matrix();
    REQUIRE((Marginals(shifted) - Marginals(s)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sharpened weights pick the best single pair") {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    TinyWorld w(200 + seed);
    const auto s = oracle::Scores(w.model, *w.context, w.instance);
    size_t best = 0;
    double top = -INFINITY;
    for (size_t t = 0; t < s.size(); ++t) {
      for (double x : s[t]) {
        if (x > top) top = x, best = t;
      }
    }
    Model sharp = w.model;
    for (double &x : sharp.w_sparse) x *= 1e4;
    sharp.w_dense *= 1e4;
    REQUIRE(Infer(sharp, *w.context, w.instance)[0].entity ==
            w.instance.candidates.candidates[best]);
  }
}

TEST_CASE("cached and uncached f_C agree") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    TinyWorld w(300 + seed);
    const ScoreTable a = ScorePairs(w.model, *w.context, w.instance, true);
    const ScoreTable b = ScorePairs(w.model, *w.context, w.instance, false);
    REQUIRE((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("uniform two-way loss is ln 2") {
  TinyWorld w(5);
  ZeroWeights(&w.model);
  const MentionInstance inst = Retarget(w, "bar", "E2");
  REQUIRE(inst.num_candidates() == 2);
  REQUIRE(inst.num_queries() == 1);
  const auto lg = ComputeLossAndGradient(w.model, *w.context, inst);
  REQUIRE(lg);
  CHECK(lg->loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("a gold outside the candidates is skipped") {
  TinyWorld w(6);
  const MentionInstance inst = Retarget(w, "bar", "E0");
  CHECK(inst.gold == -1);
  CHECK_FALSE(ComputeLossAndGradient(w.model, *w.context, inst).has_value());
  const MentionInstance nil = Retarget(w, "bar", "NIL");
  CHECK(nil.gold == static_cast<int>(nil.num_candidates()) - 1);
}

TEST_CASE("separated scores give near-zero loss and gradient") {
  int checked = 0;
  for (uint64_t seed = 0; checked < 5 && seed < 200; ++seed) {
    TinyWorld w(400 + seed);
    ZeroWeights(&w.model);
    const auto &inst = w.instance;
    std::set<uint32_t> gold_only, others;
    for (size_t t = 0; t < inst.num_candidates(); ++t) {
      for (size_t q = 0; q < inst.num_queries(); ++q) {
        for (const auto &[i, x] : inst.FE(t, q).entries()) {
          (static_cast<int>(t) == inst.gold ? gold_only : others).insert(i);
        }
      }
    }
    for (uint32_t i : others) gold_only.erase(i);
    if (gold_only.empty()) continue;
    ++checked;
    w.model.w_sparse[*gold_only.begin()] = 40.0;
    const auto lg = ComputeLossAndGradient(w.model, *w.context, inst);
    REQUIRE(lg);
    CHECK(lg->loss < 1e-15);
    for (const auto &[i, g] : lg->grad.sparse) CHECK(std::abs(g) < 1e-15);
  }
  CHECK(checked == 5);
}

TEST_CASE("analytic gradient matches finite differences") {
  for (uint64_t seed = 0; seed < 15; ++seed) {
    auto w = oracle::KinkFreeWorld(500 + seed);
    const auto check = oracle::CheckGradient(*w);
    REQUIRE(check.parameters > 6 + 5 * 3 * 8);
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient check in restricted modes") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto w = oracle::KinkFreeWorld(600 + seed);
    w->model.config.mode = seed % 2 ? FeatureMode::kCnnOnly : FeatureMode::kFull;
    w->model.config.pairs = static_cast<PairMask>(1u << (seed % kNumPairs)) | 0x4;
    for (int p = 0; p < kNumPairs; ++p) {
      if (!w->model.config.pair_enabled(p)) w->model.w_dense[p] = 0.0;
    }
    w->instance = PrepareMention(w->model.config, &w->model.vocab, true, *w->context,
                                 w->doc, w->doc.mentions[0]);
    CHECK(oracle::CheckGradient(*w).max_rel_error < 1e-4);
  }
}

TEST_CASE("dense weight gradient is sum_t (P(t) - [t = gold]) f_C(t)") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    TinyWorld w(700 + seed);
    const auto lg = ComputeLossAndGradient(w.model, *w.context, w.instance);
    REQUIRE(lg);
    const auto p = oracle::Marginals(oracle::Scores(w.model, *w.context, w.instance));
    DenseFeatures want = DenseFeatures::Zero();
    for (size_t t = 0; t < w.instance.num_candidates(); ++t) {
      const EntityIndex e = w.instance.candidates.candidates[t];
      if (e == kNullEntity) continue;
      const auto f = oracle::PairFeatures(w.model.cnn, w.instance.source,
                                          w.context->entity(e).embedded);
      const double c = p[t] - (static_cast<int>(t) == w.instance.gold ? 1.0 : 0.0);
      for (int i = 0; i < kNumPairs; ++i) want[i] += c * f[static_cast<size_t>(i)];
    }
    REQUIRE((lg->grad.dense - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("l2 adds 0.5 l2 |w|^2 over active coordinates") {
  TinyWorld w(8);
  const auto plain = ComputeLossAndGradient(w.model, *w.context, w.instance);
  w.model.config.l2 = 0.1;
  const auto reg = ComputeLossAndGradient(w.model, *w.context, w.instance);
  REQUIRE(plain);
  REQUIRE(reg);
  double penalty = 0.0;
  REQUIRE(plain->grad.sparse.size() == reg->grad.sparse.size());
  for (size_t j = 0; j < reg->grad.sparse.size(); ++j) {
    const auto [i, g] = reg->grad.sparse[j];
    const double wi = w.model.w_sparse[i];
    penalty += 0.05 * wi * wi;
    CHECK(g == doctest::Approx(plain->grad.sparse[j].second + 0.1 * wi).epsilon(1e-12));
  }
  penalty += 0.05 * w.model.w_dense.squaredNorm();
  for (const auto &b : w.model.cnn.banks) penalty += 0.05 * b.filters.squaredNorm();
  CHECK(reg->loss == doctest::Approx(plain->loss + penalty).epsilon(1e-12));
  CHECK((reg->grad.dense - plain->grad.dense - 0.1 * w.model.w_dense).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("feature modes") {
  TinyWorld full(9);
  TinyWorld cnn(9, 4, 3, 2, FeatureMode::kCnnOnly);
  TinyWorld sparse(9, 4, 3, 2, FeatureMode::kSparseOnly);

  for (const auto &v : cnn.instance.fq) CHECK(v.empty());
  for (size_t t = 0; t < cnn.instance.num_candidates(); ++t) {
    const bool is_null = cnn.instance.candidates.candidates[t] == kNullEntity;
    for (size_t q = 0; q < cnn.instance.num_queries(); ++q) {
      CHECK(cnn.instance.FE(t, q).size() == (is_null ? 1u : 0u));
    }
  }

  CHECK(ScorePairs(sparse.model, *sparse.context, sparse.instance).dense.isZero(0));
  CHECK(sparse.instance.source[0].size() == 0);

  // With the dense block off, the full system scores like sparse-only.
  Model no_dense = full.model;
  no_dense.w_dense.setZero();
  Model sparse_only = full.model;
  sparse_only.config.mode = FeatureMode::kSparseOnly;
  CHECK(ScorePairs(no_dense, *full.context, full.instance).scores ==
        ScorePairs(sparse_only, *full.context, full.instance).scores);

  const auto lg = ComputeLossAndGradient(sparse_only, *full.context, full.instance);
  REQUIRE(lg);
  CHECK(lg->grad.dense.isZero(0));
  for (const auto &b : lg->grad.cnn.banks) CHECK(b.isZero(0));
}

TEST_CASE("lazy sparse Adadelta equals the dense update") {
  ModelConfig config;
  config.k = 2;
  config.width = 2;
  config.dim = 3;
  config.mode = FeatureMode::kSparseOnly;
  Model lazy = Model::Create(config, FeatureVocabulary::Interned(64));
  AdadeltaState state(lazy);
  std::vector<double> w(64, 0.0), eg2(64, 0.0), edx2(64, 0.0);
  const double rho = config.rho, eps = config.epsilon;
  Rng rng(10);
  for (int step = 0; step < 60; ++step) {
    std::vector<SparseVector::Entry> touched;
    for (int j = 0; j < 5; ++j) touched.emplace_back(UniformIndex(rng, 64), StandardNormal(rng));
    const SparseVector g(touched);
    ModelGradient grad;
    grad.sparse.assign(g.entries().begin(), g.entries().end());
    grad.cnn = CnnGradient::ZerosLike(lazy.cnn);
    state.Apply(grad, &lazy);

    std::vector<double> full(64, 0.0);
    for (const auto &[i, x] : g.entries()) full[i] = x;
    for (size_t i = 0; i < 64; ++i) {
      eg2[i] = rho * eg2[i] + (1 - rho) * full[i] * full[i];
      const double dx = -std::sqrt(edx2[i] + eps) / std::sqrt(eg2[i] + eps) * full[i];
      edx2[i] = rho * edx2[i] + (1 - rho) * dx * dx;
      w[i] += dx;
    }
  }
  for (uint32_t i = 0; i < 64; ++i) {
    REQUIRE(lazy.w_sparse[i] == doctest::Approx(w[i]).epsilon(1e-12));
    const auto [a, b] = state.SparseAccumulators(i);
    REQUIRE(a == doctest::Approx(eg2[i]).epsilon(1e-12));
    REQUIRE(b == doctest::Approx(edx2[i]).epsilon(1e-12));
  }
  CHECK(state.steps() == 60);
}

// Small synthetic corpus where context decides every mention.
SyntheticSpec ToySpec() {
  SyntheticSpec spec;
  spec.n_entities = 8;
  spec.vocab_per_topic = 20;
  spec.noise_vocab = 20;
  spec.train_mentions = 90;
  spec.test_mentions = 0;
  spec.test_group_fraction = 0.0;
  spec.context_free_fraction = 0.0;
  spec.segment_length = 14;
  spec.article_length = 20;
  spec.dim = 8;
  return spec;
}

struct ToyWorld {
  ToyWorld() : data(GenerateSynthetic(ToySpec())) {
    kb = KnowledgeBase::Ingest(data.articles, data.anchors);
    config.k = 4;
    config.width = 3;
    config.dim = 8;
    config.views.context_window = 5;
    context = std::make_unique<LinkingContext>(kb, data.embeddings, config.views);
  }
  SyntheticData data;
  KnowledgeBase kb;
  ModelConfig config;
  std::unique_ptr<LinkingContext> context;
};

TEST_CASE("zero epochs leave the model unchanged") {
  ToyWorld toy;
  Model m = Model::Create(toy.config);
  const Model before = m;
  TrainOptions options;
  options.epochs = 0;
  Train(&m, *toy.context, toy.data.train, options);
  CHECK(SameParameters(m, before));
}

TEST_CASE("training is deterministic and fits a separable corpus") {
  ToyWorld toy;
  TrainOptions options;
  options.epochs = 8;
  Model a = Model::Create(toy.config, FeatureVocabulary::Interned());
  Model b = Model::Create(toy.config, FeatureVocabulary::Interned());
  const TrainingReport ra = Train(&a, *toy.context, toy.data.train, options);
  Train(&b, *toy.context, toy.data.train, options);
  CHECK(SameParameters(a, b));
  CHECK(a.vocab.interned() == b.vocab.interned());
  REQUIRE(ra.epochs.size() == 8);
  CHECK(ra.initial_mean_loss > 0.0);
  CHECK(ra.epochs.back().mean_loss < 0.1 * ra.initial_mean_loss);
  CHECK(ra.mean_queries >= 1.0);

  Model c = Model::Create(toy.config, FeatureVocabulary::Interned());
  options.seed = 2;
  Train(&c, *toy.context, toy.data.train, options);
  CHECK_FALSE(SameParameters(a, c));
}

TEST_CASE("a non-finite loss aborts with the document id") {
  ToyWorld toy;
  Model m = Model::Create(toy.config);
  m.w_dense[0] = std::numeric_limits<double>::quiet_NaN();
  TrainOptions options;
  options.epochs = 1;
  try {
    Train(&m, *toy.context, toy.data.train, options);
    FAIL("expected TrainingError");
  } catch (const TrainingError &e) {
    CHECK(std::string(e.what()).find("train-") != std::string::npos);
  }
}

TEST_CASE("save and load round trip") {
  ToyWorld toy;
  Model m = Model::Create(toy.config, FeatureVocabulary::Interned());
  TrainOptions options;
  options.epochs = 2;
  Train(&m, *toy.context, toy.data.train, options);
  testing::TempDir dir;
  const std::string path = dir.file("model.bin");
  m.Save(path);
  const Model back = Model::Load(path);
  CHECK(SameParameters(m, back));
  CHECK(back.vocab.interned() == m.vocab.interned());
  CHECK(back.config.k == m.config.k);
  CHECK(back.config.views.context_window == 5);

  int compared = 0;
  for (const auto &doc : toy.data.train) {
    for (const auto &mention : doc.mentions) {
      if (compared == 100) break;
      const auto a = Infer(m, *toy.context, PrepareMention(m, *toy.context, doc, mention));
      const auto b = Infer(back, *toy.context, PrepareMention(back, *toy.context, doc, mention));
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].entity == b[i].entity);
        REQUIRE(a[i].marginal_prob == b[i].marginal_prob);
      }
      ++compared;
    }
  }
  CHECK(compared == 90);
}

TEST_CASE("damaged model files") {
  TinyWorld w(11);
  testing::TempDir dir;
  const std::string path = dir.file("m.bin");
  w.model.Save(path);
  const std::string bytes = testing::Slurp(path);
  CHECK(bytes.substr(0, 5) == "CLMD1");

  testing::WriteText(path, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(Model::Load(path), ChecksumError);
  testing::WriteText(path, bytes.substr(0, 7));
  CHECK_THROWS_AS(Model::Load(path), ChecksumError);

  std::string future = bytes;
  future[4] = '2';
  testing::WriteText(path, future);
  CHECK_THROWS_AS(Model::Load(path), VersionError);

  testing::WriteText(path, "CLKB1-not-a-model");
  CHECK_THROWS_AS(Model::Load(path), FormatError);
}

}  // namespace
}  // namespace clink
