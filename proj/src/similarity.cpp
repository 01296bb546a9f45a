#include "specuq/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>

#include "specuq/error.hpp"

namespace specuq {

std::string_view kernel_name(Kernel kernel) {
  switch (kernel) {
    case Kernel::jaccard: return "jaccard";
    case Kernel::nli_entail: return "nli_entail";
    case Kernel::nli_contra: return "nli_contra";
    case Kernel::rouge_l: return "rouge_l";
  }
  return "unknown";
}

char kernel_suffix(Kernel kernel) {
  switch (kernel) {
    case Kernel::jaccard: return 'J';
    case Kernel::nli_entail: return 'E';
    case Kernel::nli_contra: return 'C';
    case Kernel::rouge_l: return 'R';
  }
  return '?';
}

Kernel parse_kernel(std::string_view name) {
  if (name == "jaccard" || name == "J") return Kernel::jaccard;
  if (name == "nli_entail" || name == "E") return Kernel::nli_entail;
  if (name == "nli_contra" || name == "C") return Kernel::nli_contra;
  if (name == "rouge_l" || name == "R") return Kernel::rouge_l;
  throw ValidationError("unknown similarity measure \"" + std::string(name) + "\"");
}

namespace {

// Length in bytes of the whitespace code point starting at text[i], or 0.
std::size_t unicode_space_at(std::string_view text, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0D)) return 1;
  auto byte = [&](std::size_t k) -> unsigned {
    return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0u;
  };
  if (b0 == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;
  if (b0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;  // U+1680
  if (b0 == 0xE2 && byte(1) == 0x80) {
    const unsigned b2 = byte(2);
    if ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) return 3;
  }
  if (b0 == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;  // U+205F
  if (b0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
  return 0;
}

bool ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

void push_token(std::string& current, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = current.size();
  while (begin < end && ascii_punct(current[begin])) ++begin;
  while (end > begin && ascii_punct(current[end - 1])) --end;
  if (end > begin) out.emplace_back(current.substr(begin, end - begin));
  current.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size();) {
    if (const std::size_t n = unicode_space_at(text, i); n > 0) {
      push_token(current, tokens);
      i += n;
      continue;
    }
    const auto u = static_cast<unsigned char>(text[i]);
    current += (u < 0x80) ? static_cast<char>(std::tolower(u)) : text[i];
    ++i;
  }
  push_token(current, tokens);
  return tokens;
}

double jaccard_similarity(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_tokens(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(a, b));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(a.size());
  const double recall = lcs / static_cast<double>(b.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l(std::string_view a, std::string_view b) {
  return rouge_l_tokens(tokenize(a), tokenize(b));
}

NliSimilarity nli_similarities(double p_entail, double p_contra) {
  return {p_entail, 1.0 - p_contra};
}

SimilarityMatrix SimilarityMatrix::from_directed(Matrix a, Kernel kernel) {
  if (a.rows() != a.cols()) throw ValidationError("similarity matrix must be square");
  const Eigen::Index m = a.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a(i, j) = i == j ? 1.0 : std::clamp(a(i, j), 0.0, 1.0);
    }
  }
  Matrix w(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    w(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      w(i, j) = w(j, i) = 0.5 * (a(i, j) + a(j, i));
    }
  }
  return SimilarityMatrix(std::move(a), std::move(w), kernel);
}

SimilarityMatrix lexical_similarity_matrix(const ResponseSet& record, Kernel kernel) {
  if (kernel != Kernel::jaccard && kernel != Kernel::rouge_l) {
    throw ValidationError("lexical_similarity_matrix needs the jaccard or rouge_l kernel");
  }
  const auto m = static_cast<Eigen::Index>(record.size());
  const DedupMap dedup = dedup_pairs(record.responses);
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(record.size());
  for (const auto& r : record.responses) tokens.push_back(tokenize(r));

  Matrix a = Matrix::Ones(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j || dedup.representative[i] == dedup.representative[j]) continue;
      if (kernel == Kernel::rouge_l) {
        a(i, j) = rouge_l_tokens(tokens[i], tokens[j]);
      } else if (j > i) {
        a(i, j) = a(j, i) = jaccard_similarity(record.responses[i], record.responses[j]);
      }
    }
  }
  return SimilarityMatrix::from_directed(std::move(a), kernel);
}

SimilarityMatrix nli_similarity_matrix(const PairLogits& logits, Kernel kernel, double temperature) {
  if (!is_nli(kernel)) throw ValidationError("nli_similarity_matrix needs an NLI kernel");
  const auto m = static_cast<Eigen::Index>(logits.size());
  Matrix a = Matrix::Ones(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j || logits.same_text(i, j)) continue;
      const auto p = to_probabilities(logits.at(i, j), temperature);
      const auto s = nli_similarities(p.p_entail, p.p_contra);
      a(i, j) = kernel == Kernel::nli_entail ? s.entail : s.contra;
    }
  }
  return SimilarityMatrix::from_directed(std::move(a), kernel);
}

SimilarityMatrix build_similarity_matrix(const ResponseSet& record, Kernel kernel,
                                         PairClassifier* classifier, double temperature) {
  if (record.size() < 2) throw ValidationError("record " + record.question_id + ": m<2");
  if (!is_nli(kernel)) return lexical_similarity_matrix(record, kernel);
  const DedupMap dedup = dedup_pairs(record.responses);
  if (dedup.distinct_count() == 1) {
    return SimilarityMatrix::from_directed(Matrix::Ones(record.size(), record.size()), kernel);
  }
  if (classifier == nullptr) throw ValidationError("NLI similarity needs an NLI classifier");
  return nli_similarity_matrix(fetch_pair_logits(record, dedup, *classifier), kernel, temperature);
}

double lexi_sim_uncertainty(const Matrix& rouge) {
  const Eigen::Index m = rouge.rows();
  CompensatedSum sum;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      sum += rouge(i, j);
      ++pairs;
    }
  }
  return pairs == 0 ? -1.0 : -sum.value() / static_cast<double>(pairs);
}

double lexi_sim_uncertainty(const ResponseSet& record) {
  if (record.size() < 2) throw ValidationError("record " + record.question_id + ": m<2");
  return lexi_sim_uncertainty(lexical_similarity_matrix(record, Kernel::rouge_l).a());
}

}  // namespace specuq
