#include "specuq/semantic_sets.hpp"

#include <limits>
#include <numeric>

namespace specuq {

DisjointSet::DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSet::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool DisjointSet::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return false;
  if (rank_[x] < rank_[y]) std::swap(x, y);
  parent_[y] = x;
  if (rank_[x] == rank_[y]) ++rank_[x];
  return true;
}

SemanticPartition partition_by_merge_rule(std::size_t m,
                                          const std::function<bool(std::size_t, std::size_t)>& merge) {
  DisjointSet sets(m);
  for (std::size_t j1 = 0; j1 < m; ++j1) {
    for (std::size_t j2 = j1 + 1; j2 < m; ++j2) {
      if (sets.find(j1) == sets.find(j2)) continue;
      if (merge(j1, j2)) sets.unite(j1, j2);
    }
  }
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> id_of_root(m, kUnset);
  SemanticPartition out;
  out.assignment.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t root = sets.find(j);
    if (id_of_root[root] == kUnset) id_of_root[root] = out.num_sets++;
    out.assignment[j] = id_of_root[root];
  }
  return out;
}

bool mutually_entailing(const NliProbabilities& forward, const NliProbabilities& backward) {
  return forward.p_entail > forward.p_contra && backward.p_entail > backward.p_contra;
}

SemanticPartition cluster_semantic_sets(const DedupMap& dedup, const DirectedProbabilities& nli) {
  return partition_by_merge_rule(dedup.size(), [&](std::size_t j1, std::size_t j2) {
    if (dedup.representative[j1] == dedup.representative[j2]) return true;
    return mutually_entailing(nli(j1, j2), nli(j2, j1));
  });
}

SemanticPartition cluster_semantic_sets(const PairLogits& logits, double temperature) {
  DedupMap dedup;
  dedup.representative.resize(logits.size());
  std::vector<std::size_t> first(logits.distinct, logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    auto& f = first[logits.slot[j]];
    if (f == logits.size()) f = j;
    dedup.representative[j] = f;
  }
  return cluster_semantic_sets(dedup, [&](std::size_t p, std::size_t h) {
    return to_probabilities(logits.at(p, h), temperature);
  });
}

SemanticPartition cluster_semantic_sets(const ResponseSet& record, PairClassifier& classifier,
                                        double temperature) {
  const DedupMap dedup = dedup_pairs(record.responses);
  if (dedup.distinct_count() <= 1) {
    return SemanticPartition{std::vector<std::size_t>(record.size(), 0), record.size() == 0 ? 0u : 1u};
  }
  return cluster_semantic_sets(fetch_pair_logits(record, dedup, classifier), temperature);
}

}  // namespace specuq
