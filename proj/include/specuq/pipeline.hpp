#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/ingest.hpp"
#include "specuq/nli_client.hpp"
#include "specuq/scores.hpp"
#include "specuq/similarity.hpp"
#include "specuq/spectral.hpp"

namespace specuq {

// A named uncertainty/confidence measure: NumSet, LexiSim, or one of
// EigV/Deg/Ecc over a similarity kernel, written "Deg(E)", "Ecc(J)", ...
struct MeasureSpec {
  Method method = Method::deg;
  std::optional<Kernel> kernel;

  std::string name() const;
  static MeasureSpec parse(std::string_view name);

  bool has_confidence() const noexcept { return method == Method::deg || method == Method::ecc; }
  bool needs_nli() const noexcept { return method == Method::num_set || (kernel && is_nli(*kernel)); }
  // The NumSet merge test compares logits of one pair, so it is temperature
  // invariant and is not tuned.
  bool uses_temperature() const noexcept { return kernel && is_nli(*kernel); }
  bool uses_threshold() const noexcept { return method == Method::ecc; }

  friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

// EigV, Ecc and Deg for each kernel, then LexiSim, then NumSet when any kernel
// is NLI-based.
std::vector<MeasureSpec> default_measures(std::span<const Kernel> kernels);

struct Hyperparameters {
  double temperature = 1.0;
  double ecc_threshold = 0.9;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct HyperTable {
  Hyperparameters defaults;
  std::map<std::string, Hyperparameters> per_measure;

  Hyperparameters lookup(const MeasureSpec& measure) const {
    auto it = per_measure.find(measure.name());
    return it == per_measure.end() ? defaults : it->second;
  }
};

// A question ready for scoring: truncated responses, dedup map and, when NLI
// measures are requested, the logits of every ordered distinct-text pair.
struct PreparedQuestion {
  ResponseSet record;
  DedupMap dedup;
  std::optional<PairLogits> logits;
};

// num_generations == 0 keeps every response. classifier may be null when no
// NLI measure is requested.
PreparedQuestion prepare_question(const ResponseSet& record, std::size_t num_generations,
                                  PairClassifier* classifier);
std::vector<PreparedQuestion> prepare_dataset(std::span<const ResponseSet> records,
                                              std::size_t num_generations, PairClassifier* classifier,
                                              std::size_t workers);

SimilarityMatrix similarity_for(const PreparedQuestion& question, Kernel kernel, double temperature);

struct SpectralState {
  Laplacian laplacian;
  SpectralSummary spectrum;
};

SpectralState spectral_state(const SimilarityMatrix& similarity);

// EigV, Deg or Ecc from an already decomposed similarity graph.
MeasureScores spectral_measure(const SpectralState& state, Method method, const Hyperparameters& hyper);

MeasureScores score_measure(const PreparedQuestion& question, const MeasureSpec& measure,
                            const Hyperparameters& hyper);

// Shares similarity matrices and spectra between measures with the same
// kernel and temperature. Adds the semantic partition when NumSet is scored.
QuestionScores score_question(const PreparedQuestion& question, std::span<const MeasureSpec> measures,
                              const HyperTable& hyper);

std::vector<QuestionScores> score_dataset(std::span<const PreparedQuestion> questions,
                                          std::span<const MeasureSpec> measures, const HyperTable& hyper,
                                          std::size_t workers);
std::vector<QuestionScores> score_dataset(std::span<const PreparedQuestion* const> questions,
                                          std::span<const MeasureSpec> measures, const HyperTable& hyper,
                                          std::size_t workers);

std::vector<std::string> measure_names(std::span<const MeasureSpec> measures);

}  // namespace specuq
