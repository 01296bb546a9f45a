#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/semantic_sets.hpp"

namespace specuq {

// Scores of one measure (e.g. "Deg(E)") for one question.
struct NamedScores {
  std::string measure;
  double u = 0.0;
  std::optional<std::vector<double>> c;

  friend bool operator==(const NamedScores&, const NamedScores&) = default;
};

struct QuestionScores {
  std::string question_id;
  std::optional<std::vector<double>> accuracy;
  std::vector<NamedScores> scores;
  std::optional<SemanticPartition> partition;

  const NamedScores* find(std::string_view measure) const {
    for (const auto& s : scores) {
      if (s.measure == measure) return &s;
    }
    return nullptr;
  }

  NamedScores* find(std::string_view measure) {
    for (auto& s : scores) {
      if (s.measure == measure) return &s;
    }
    return nullptr;
  }
};

}  // namespace specuq
