#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "liel/text_vsm.hpp"

using namespace liel;

namespace {

std::vector<std::string> texts(const TokenStream& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

TermVector vec(std::initializer_list<std::pair<const char*, double>> items) {
  TermVector v;
  for (const auto& [t, w] : items) v.add(t, w);
  return v;
}

}  // namespace

TEST(Tokenize, WhitespaceAndCaseFold) {
  EXPECT_EQ(texts(tokenize("Home Depot CEO")),
            (std::vector<std::string>{"home", "depot", "ceo"}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, HanCharactersSplitIndividually) {
  EXPECT_EQ(texts(tokenize("李娜 wins")), (std::vector<std::string>{"李", "娜", "wins"}));
}

TEST(Tokenize, ScriptBoundarySplits) {
  EXPECT_EQ(texts(tokenize("abcБвг")), (std::vector<std::string>{"abc", "бвг"}));
}

TEST(Tokenize, PunctuationSeparates) {
  EXPECT_EQ(texts(tokenize("U.S.-based, (firm)")),
            (std::vector<std::string>{"u", "s", "based", "firm"}));
}

TEST(Tokenize, CombiningMarksStayInToken) {
  // "é" as e + U+0301
  EXPECT_EQ(texts(tokenize("café noir")),
            (std::vector<std::string>{"café", "noir"}));
}

TEST(Tokenize, OffsetsAlignWithSource) {
  const std::string text = "  Políticos de   Irak, 李娜!";
  const TokenStream tokens = tokenize(text);
  ASSERT_EQ(tokens.size(), 5u);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      EXPECT_GT(tokens[i].offset, tokens[i - 1].offset);
    }
    const std::string slice = text.substr(tokens[i].offset, tokens[i].length);
    EXPECT_EQ(tokenize(slice).size(), 1u) << slice;
    EXPECT_EQ(tokenize(slice)[0].text, tokens[i].text);
  }
}

TEST(StopWords, ReadFoldsLikeTokens) {
  std::istringstream in("The\nof\n\n  AND \n");
  const StopWords s = read_stopwords(in);
  EXPECT_EQ(s, (StopWords{"and", "of", "the"}));
}

TEST(TextVector, TermFrequencyWithoutStopWords) {
  const TermVector v = text_vector("the cat and the hat, the CAT", StopWords{"the", "and"});
  EXPECT_EQ(v, vec({{"cat", 2}, {"hat", 1}}));
}

TEST(TopVector, KeepsMostFrequentWithLexicographicTies) {
  const TermVector v = top_vector("b b a a c d d d", 2, {});
  EXPECT_EQ(v, vec({{"d", 3}, {"a", 2}}));
}

TEST(TopVector, LargeNEqualsTextVector) {
  const std::string text = "one two two three three three four";
  EXPECT_EQ(top_vector(text, 1000, {}), text_vector(text, {}));
}

TEST(ContextVector, WindowSplitsEvenlyAroundAnchor) {
  // tokens: t0 .. t9, anchor at t5, window 4 -> t3 t4 t5 t6
  const std::string text = "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9";
  const TermVector v = context_vector(text, text.find("t5"), 4, {});
  EXPECT_EQ(v, vec({{"t3", 1}, {"t4", 1}, {"t5", 1}, {"t6", 1}}));
}

TEST(ContextVector, ClampsAtEdges) {
  const std::string text = "t0 t1 t2 t3 t4";
  EXPECT_EQ(context_vector(text, 0, 4, {}), vec({{"t0", 1}, {"t1", 1}}));
}

TEST(ContextVector, WideWindowEqualsTextVector) {
  const std::string text = "alpha beta gamma beta delta alpha alpha";
  const std::size_t n = tokenize(text).size();
  EXPECT_EQ(context_vector(text, text.find("gamma"), 2 * n, {}), text_vector(text, {}));
}

TEST(Cosine, Identity) {
  const TermVector v = vec({{"x", 3}, {"y", 1}, {"z", 2}});
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
}

TEST(Cosine, Disjoint) { EXPECT_EQ(cosine(vec({{"x", 1}}), vec({{"y", 1}})), 0.0); }

TEST(Cosine, HandComputed) {
  // dot 1, norms sqrt(2) and 1
  EXPECT_NEAR(cosine(vec({{"x", 1}, {"y", 1}}), vec({{"x", 1}})), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Cosine, EmptyIsZero) {
  EXPECT_EQ(cosine(TermVector{}, vec({{"x", 1}})), 0.0);
  EXPECT_EQ(cosine(TermVector{}, TermVector{}), 0.0);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    TermVector a, b;
    for (int t = 0; t < 12; ++t) {
      if (rng() % 2) a.add("t" + std::to_string(t), w(rng));
      if (rng() % 2) b.add("t" + std::to_string(t), w(rng));
    }
    const double c = cosine(a, b);
    EXPECT_EQ(c, cosine(b, a));
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(cosine(a.scaled(w(rng)), b), c, 1e-12);
  }
}

TEST(TermVector, NeverStoresZeroWeights) {
  TermVector v;
  v.add("x", 0.0);
  EXPECT_TRUE(v.empty());
}
