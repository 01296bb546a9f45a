#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "specuq/ingest.hpp"
#include "specuq/nli_client.hpp"

namespace specuq {

// Union-find with path compression and union by rank.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n);

  std::size_t find(std::size_t x);
  // Returns false if x and y were already in the same set.
  bool unite(std::size_t x, std::size_t y);
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

// assignment[j] is the set of response j. Ids are contiguous and numbered by
// the smallest member index, so set 0 always contains response 0.
struct SemanticPartition {
  std::vector<std::size_t> assignment;
  std::size_t num_sets = 0;

  friend bool operator==(const SemanticPartition&, const SemanticPartition&) = default;
};

// Transitive closure of merge(j1, j2), queried for every j1 < j2.
SemanticPartition partition_by_merge_rule(std::size_t m,
                                          const std::function<bool(std::size_t, std::size_t)>& merge);

// Bi-directional entailment: entail beats contra strictly in both directions.
bool mutually_entailing(const NliProbabilities& forward, const NliProbabilities& backward);

using DirectedProbabilities = std::function<NliProbabilities(std::size_t premise, std::size_t hypothesis)>;

// Byte-identical responses (per `dedup`) are merged without consulting nli.
SemanticPartition cluster_semantic_sets(const DedupMap& dedup, const DirectedProbabilities& nli);

SemanticPartition cluster_semantic_sets(const PairLogits& logits, double temperature = 1.0);

// Fetches the logits it needs through `classifier`.
SemanticPartition cluster_semantic_sets(const ResponseSet& record, PairClassifier& classifier,
                                        double temperature = 1.0);

inline double num_set_uncertainty(const SemanticPartition& partition) {
  return static_cast<double>(partition.num_sets);
}

}  // namespace specuq
