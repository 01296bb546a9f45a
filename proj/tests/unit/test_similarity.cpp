#include <gtest/gtest.h>

#include <functional>

#include "fixtures.hpp"
#include "specuq/error.hpp"
#include "specuq/similarity.hpp"
#include "specuq/spectral.hpp"

using namespace specuq;
using specuq::testing::make_record;

namespace {

std::vector<std::vector<std::string>> all_sequences(std::size_t max_len, const std::vector<std::string>& alphabet) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& s : frontier) {
      for (const auto& a : alphabet) {
        auto t = s;
        t.push_back(a);
        next.push_back(t);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// Longest common subsequence by trying every subsequence of the shorter side.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& s = a.size() <= b.size() ? a : b;
  const auto& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << s.size()); ++mask) {
    std::size_t pos = 0;
    std::size_t len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < s.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      while (pos < t.size() && t[pos] != s[i]) ++pos;
      if (pos == t.size()) ok = false;
      else {
        ++pos;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

}  // namespace

TEST(Tokenize, LowercasesAndStripsPunctuation) {
  EXPECT_EQ(tokenize("Pink Floyd, in EDINBURGH!"), (std::vector<std::string>{"pink", "floyd", "in", "edinburgh"}));
  EXPECT_EQ(tokenize("  \"quoted\"\t(x)\n ...  "), (std::vector<std::string>{"quoted", "x"}));
  EXPECT_EQ(tokenize("don't e.g."), (std::vector<std::string>{"don't", "e.g"}));
  EXPECT_EQ(tokenize("a b　c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" !? ").empty());
}

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(jaccard_similarity("Pink Floyd", "Pink Floyd in Edinburgh"), 0.5);
  EXPECT_DOUBLE_EQ(jaccard_similarity("Olympia", "Olympia"), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity("Olympia", "Corinth"), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity("", "x"), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity("a b", "b c"), 1.0 / 3.0);
}

TEST(Jaccard, PropertiesOverSmallVocabulary) {
  const std::vector<std::string> vocab{"w", "x", "y", "z"};
  auto text_of = [&](unsigned mask) {
    std::string s;
    for (unsigned i = 0; i < vocab.size(); ++i) {
      if (mask >> i & 1) s += vocab[i] + " ";
    }
    return s;
  };
  for (unsigned a = 0; a < 16; ++a) {
    for (unsigned b = 0; b < 16; ++b) {
      const double ab = jaccard_similarity(text_of(a), text_of(b));
      EXPECT_EQ(ab, jaccard_similarity(text_of(b), text_of(a)));
      EXPECT_EQ(ab == 1.0, a == b);
      for (unsigned k = 0; k < 4; ++k) {
        const unsigned bit = 1u << k;
        if ((a | b) & bit) continue;
        const double grown = jaccard_similarity(text_of(a | bit), text_of(b | bit));
        if (ab < 1.0) EXPECT_GT(grown, ab);
        else EXPECT_EQ(grown, 1.0);
      }
    }
  }
}

TEST(RougeL, Examples) {
  EXPECT_DOUBLE_EQ(rouge_l("the cat sat", "the cat sat"), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l("a b c", "a c"), 0.8);
  EXPECT_DOUBLE_EQ(rouge_l("x", "y"), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l("", ""), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l("", "a"), 0.0);
}

TEST(RougeL, MatchesBruteForceLcsExhaustively) {
  const auto seqs = all_sequences(6, {"a", "b", "c"});
  ASSERT_EQ(seqs.size(), 1093u);
  Rng rng(5);
  // Every pair with total length <= 6, plus a random sample of longer pairs.
  std::size_t checked = 0;
  for (const auto& s : seqs) {
    for (const auto& t : seqs) {
      if (s.size() + t.size() > 6 && rng.below(40) != 0) continue;
      const std::size_t lcs = brute_lcs(s, t);
      ASSERT_EQ(lcs_length(s, t), lcs);
      double f;
      if (s.empty() && t.empty()) f = 1.0;
      else if (lcs == 0) f = 0.0;
      else {
        const double p = static_cast<double>(lcs) / static_cast<double>(s.size());
        const double r = static_cast<double>(lcs) / static_cast<double>(t.size());
        f = 2 * p * r / (p + r);
      }
      ASSERT_NEAR(rouge_l_tokens(s, t), f, 1e-15);
      ++checked;
    }
  }
  EXPECT_GT(checked, 30000u);
}

TEST(NliSimilarities, Examples) {
  const auto a = nli_similarities(0.9, 0.02);
  EXPECT_DOUBLE_EQ(a.entail, 0.9);
  EXPECT_DOUBLE_EQ(a.contra, 0.98);
  const auto b = nli_similarities(0.0, 1.0);
  EXPECT_EQ(b.entail, 0.0);
  EXPECT_EQ(b.contra, 0.0);
  const auto p = to_probabilities({0, 0, 0}, 1.0);
  const auto c = nli_similarities(p.p_entail, p.p_contra);
  EXPECT_NEAR(c.entail, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.contra, 2.0 / 3.0, 1e-15);
}

TEST(SimilarityMatrix, IdenticalTextsGiveAllOnes) {
  const auto r = make_record("q", {"same", "same", "same"});
  for (Kernel k : {Kernel::jaccard, Kernel::rouge_l}) {
    const auto s = lexical_similarity_matrix(r, k);
    EXPECT_EQ(s.a(), Matrix::Ones(3, 3));
    EXPECT_EQ(s.w(), Matrix::Ones(3, 3));
  }
}

TEST(SimilarityMatrix, JaccardPair) {
  const auto s = lexical_similarity_matrix(make_record("q", {"a b", "b c"}), Kernel::jaccard);
  EXPECT_DOUBLE_EQ(s.a()(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.a()(1, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.w()(0, 1), 1.0 / 3.0);
  EXPECT_EQ(s.a()(0, 0), 1.0);
}

TEST(SimilarityMatrix, SymmetrizesAndClamps) {
  Matrix a(3, 3);
  a << 0.2, 0.8, 1.7, 0.6, 1, -0.4, 0.3, 0.5, 1;
  const auto s = SimilarityMatrix::from_directed(a, Kernel::nli_entail);
  EXPECT_DOUBLE_EQ(s.w()(0, 1), 0.7);
  EXPECT_DOUBLE_EQ(s.w()(1, 0), 0.7);
  EXPECT_EQ(s.a()(0, 0), 1.0);
  EXPECT_EQ(s.a()(0, 2), 1.0);
  EXPECT_EQ(s.a()(1, 2), 0.0);
  EXPECT_EQ((s.w() - s.w().transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.kernel(), Kernel::nli_entail);
}

TEST(SimilarityMatrix, RangeAndSymmetryOnCorpus) {
  for (const auto& r : specuq::testing::text_corpus(30, 8, 3)) {
    for (Kernel k : {Kernel::jaccard, Kernel::rouge_l}) {
      const auto s = lexical_similarity_matrix(r, k);
      EXPECT_EQ((s.w() - s.w().transpose()).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_GE(s.a().minCoeff(), 0.0);
      EXPECT_LE(s.a().maxCoeff(), 1.0);
      EXPECT_TRUE((s.a().diagonal().array() == 1.0).all());
    }
  }
}

TEST(Kernels, NamesAndParsing) {
  EXPECT_EQ(kernel_name(Kernel::nli_contra), "nli_contra");
  EXPECT_EQ(kernel_suffix(Kernel::jaccard), 'J');
  EXPECT_EQ(parse_kernel("E"), Kernel::nli_entail);
  EXPECT_EQ(parse_kernel("rouge_l"), Kernel::rouge_l);
  EXPECT_THROW(parse_kernel("cosine"), ValidationError);
}

TEST(LexiSim, Examples) {
  EXPECT_DOUBLE_EQ(lexi_sim_uncertainty(make_record("q", {"a b", "a b", "a b"})), -1.0);
  EXPECT_DOUBLE_EQ(lexi_sim_uncertainty(make_record("q", {"a", "b", "c"})), 0.0);
  Matrix r(3, 3);
  r << 1, 1.0, 0.5, 1.0, 1, 0.0, 0.5, 0.0, 1;
  EXPECT_DOUBLE_EQ(lexi_sim_uncertainty(r), -0.5);
}

// Replacing response r by a copy of a response s whose similarity degree is
// at least r's can only raise the mean pairwise similarity.
TEST(Orientation, DuplicatingAHighDegreeResponseNeverRaisesUncertainty) {
  Rng rng(11);
  for (const auto& rec : specuq::testing::text_corpus(200, 6, 17)) {
    const auto j = lexical_similarity_matrix(rec, Kernel::jaccard);
    const auto rl = lexical_similarity_matrix(rec, Kernel::rouge_l);
    const auto r = rng.below(rec.size());
    for (std::size_t s = 0; s < rec.size(); ++s) {
      if (s == r) continue;
      auto replaced = rec;
      replaced.responses[r] = rec.responses[s];
      auto degree = [&](const Matrix& w, std::size_t i) {
        return w.row(static_cast<Eigen::Index>(i)).sum() - w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
      };
      if (degree(rl.w(), s) >= degree(rl.w(), r)) {
        EXPECT_LE(lexi_sim_uncertainty(replaced), lexi_sim_uncertainty(rec) + 1e-12);
      }
      if (degree(j.w(), s) >= degree(j.w(), r)) {
        const double before = deg_scores(laplacian(j.w())).u;
        const double after = deg_scores(laplacian(lexical_similarity_matrix(replaced, Kernel::jaccard).w())).u;
        EXPECT_LE(after, before + 1e-12);
      }
    }
  }
}
