// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "diffg/embed.hpp"
#include "support.hpp"

namespace diffg::embed {
namespace {

TEST(Load, TwoLineTable) {
  auto t = EmbeddingTable::parse("cup 1 2 3\nfork 0 1 0\n");
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(*t.find("fork"), (std::vector<double>{0, 1, 0}));
}

TEST(Load, RaggedRowNamesTheLine) {
  try {
    EmbeddingTable::parse("cup 1 2 3\nfork 0 1\n", "vec.txt");
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("vec.txt:2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(EmbeddingTable::parse("cup 1 x\n"), DataError);
}

TEST(Load, DuplicateLastWinsWithWarning) {
  auto t = EmbeddingTable::parse("cup 1 0\ncup 0 1\n");
  EXPECT_EQ(*t.find("cup"), (std::vector<double>{0, 1}));
  ASSERT_EQ(t.warnings().size(), 1u);
  EXPECT_NE(t.warnings()[0].find("duplicate"), std::string::npos);
}

TEST(Load, ReloadIsIdentical) {
  auto path = diffg::testing::data_dir() / "embeddings_d8.txt";
  EXPECT_EQ(EmbeddingTable::load(path), EmbeddingTable::load(path));
  EXPECT_EQ(EmbeddingTable::load(path).dim(), 8u);
}

TEST(Phrase, SingleTokenAndMean) {
  auto t = EmbeddingTable::parse("cup 1 2\ndirty 1 0\nfork 0 1\n");
  EXPECT_EQ(t.phrase_vector("cup").values, (std::vector<double>{1, 2}));
  auto pv = t.phrase_vector("dirty fork");
  EXPECT_EQ(pv.values, (std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(pv.oov);
  EXPECT_EQ(t.phrase_vector("dirty zzz fork").values, (std::vector<double>{0.5, 0.5}));
}

TEST(Phrase, AllOovIsZeroWithFlag) {
  auto t = EmbeddingTable::parse("cup 1 2\n");
  auto pv = t.phrase_vector("zzz");
  EXPECT_EQ(pv.values, (std::vector<double>{0, 0}));
  EXPECT_TRUE(pv.oov);
}

TEST(Cosine, Examples) {
  std::vector<double> a{1, 0}, b{0, 1}, c{1, 2}, d{2, 1}, z{0, 0};
  EXPECT_EQ(*cosine(a, a), 1.0);
  EXPECT_EQ(*cosine(a, b), 0.0);
  EXPECT_NEAR(*cosine(c, d), 0.8, 1e-15);
  EXPECT_FALSE(cosine(a, z).has_value());
  EXPECT_FALSE(cosine(a, std::vector<double>{1, 0, 0}).has_value());
}

TEST(Property, CosineSymmetricAndScaleInvariant) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> a(8), b(8);
    for (auto& x : a) x = rng.uniform(-1, 1);
    for (auto& x : b) x = rng.uniform(-1, 1);
    EXPECT_EQ(*cosine(a, b), *cosine(b, a));
    const double c = rng.uniform(0.01, 100.0);
    auto ca = a;
    for (auto& x : ca) x *= c;
    EXPECT_NEAR(*cosine(ca, b), *cosine(a, b), 1e-12);
    EXPECT_LE(std::abs(*cosine(a, b)), 1.0);
  }
}

TEST(Property, PhraseMeanIsOrderInvariant) {
  auto t = EmbeddingTable::load(diffg::testing::data_dir() / "embeddings_d8.txt");
  const std::vector<std::string> words{"dirty", "fork", "cup", "shelf", "mug", "table", "clean"};
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> toks;
    for (std::size_t k = 1 + rng.below(5); k > 0; --k) toks.push_back(rng.pick(words));
    auto shuffled = toks;
    rng.shuffle(shuffled);
    EXPECT_EQ(t.phrase_vector(text::join(toks, " ")).values, t.phrase_vector(text::join(shuffled, " ")).values);
  }
}

}  // namespace
}  // namespace diffg::embed
