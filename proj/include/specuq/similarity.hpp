#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/ingest.hpp"
#include "specuq/nli_client.hpp"
#include "specuq/numeric.hpp"

namespace specuq {

enum class Kernel { jaccard, nli_entail, nli_contra, rouge_l };

std::string_view kernel_name(Kernel kernel);  // "jaccard", "nli_entail", ...
char kernel_suffix(Kernel kernel);            // J, E, C, R
Kernel parse_kernel(std::string_view name);   // accepts names or suffix letters
constexpr bool is_nli(Kernel kernel) {
  return kernel == Kernel::nli_entail || kernel == Kernel::nli_contra;
}

// Lowercases (ASCII), splits on Unicode whitespace and strips ASCII
// punctuation from both ends of every token. Tokens that strip to nothing are
// dropped. Shared by the Jaccard and ROUGE-L kernels.
std::vector<std::string> tokenize(std::string_view text);

// |A ∩ B| / |A ∪ B| over token sets; 1 when both are empty.
double jaccard_similarity(std::string_view a, std::string_view b);

// ROUGE-L F-measure over token sequences.
double rouge_l(std::string_view a, std::string_view b);
double rouge_l_tokens(std::span<const std::string> a, std::span<const std::string> b);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct NliSimilarity {
  double entail;
  double contra;
};

// a_entail = p_entail, a_contra = 1 - p_contra.
NliSimilarity nli_similarities(double p_entail, double p_contra);

// The directed similarity A (diagonal 1) and its symmetrization
// W = (A + Aᵀ) / 2. All entries lie in [0,1].
class SimilarityMatrix {
 public:
  // Clamps off-diagonal entries to [0,1], forces the diagonal to 1 and builds W.
  static SimilarityMatrix from_directed(Matrix a, Kernel kernel);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& w() const noexcept { return w_; }
  Kernel kernel() const noexcept { return kernel_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(a_.rows()); }

 private:
  SimilarityMatrix(Matrix a, Matrix w, Kernel kernel)
      : a_(std::move(a)), w_(std::move(w)), kernel_(kernel) {}

  Matrix a_;
  Matrix w_;
  Kernel kernel_;
};

// Jaccard or ROUGE-L matrix. Byte-identical responses score 1.
SimilarityMatrix lexical_similarity_matrix(const ResponseSet& record, Kernel kernel);

// Entail or contra matrix from cached logits at the given softmax temperature.
SimilarityMatrix nli_similarity_matrix(const PairLogits& logits, Kernel kernel, double temperature);

// Convenience over the two above. NLI kernels require a classifier, which is
// consulted once per ordered pair of distinct texts.
SimilarityMatrix build_similarity_matrix(const ResponseSet& record, Kernel kernel,
                                         PairClassifier* classifier = nullptr,
                                         double temperature = 1.0);

// Negated mean ROUGE-L over unordered pairs j1 < j2; larger is more uncertain.
double lexi_sim_uncertainty(const ResponseSet& record);
double lexi_sim_uncertainty(const Matrix& rouge);

}  // namespace specuq
