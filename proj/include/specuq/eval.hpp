#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/scores.hpp"

namespace specuq {

enum class Predictor { U, C };
enum class Target { expected_accuracy, individual_accuracy };

// One of U+EA, C+IA, U+IA. C+EA is rejected at construction.
class EvalSetting {
 public:
  EvalSetting(Predictor predictor, Target target);

  static EvalSetting parse(std::string_view label);
  static EvalSetting u_ea() { return {Predictor::U, Target::expected_accuracy}; }
  static EvalSetting c_ia() { return {Predictor::C, Target::individual_accuracy}; }
  static EvalSetting u_ia() { return {Predictor::U, Target::individual_accuracy}; }

  Predictor predictor() const noexcept { return predictor_; }
  Target target() const noexcept { return target_; }
  std::string label() const;

  friend bool operator==(const EvalSetting&, const EvalSetting&) = default;

 private:
  Predictor predictor_;
  Target target_;
};

inline constexpr double kDefaultCorrectnessCutoff = 0.7;

double expected_accuracy(std::span<const double> accuracy_row);

// Mann-Whitney AUROC with midranks: P(pos > neg) + P(pos == neg) / 2.
// Throws ValidationError when labels hold a single class.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct ArcPoint {
  double keep_fraction;
  double mean_target;

  friend bool operator==(const ArcPoint&, const ArcPoint&) = default;
};

// Keeps samples in descending predictor order (ties: lower index first) and
// reports the mean target of every prefix n = 1..N.
std::vector<ArcPoint> arc_points(std::span<const double> predictor, std::span<const double> targets);

// Uniform mean of the arc_points mean targets.
double auarc(std::span<const double> predictor, std::span<const double> targets);

// acc_row[argmax_j confidence[j]], ties to the smallest index.
double pick_best(std::span<const double> confidence, std::span<const double> acc_row);

struct MetricRow {
  std::string measure;
  std::optional<double> auroc;
  double auarc = 0.0;
  std::vector<ArcPoint> arc;
};

struct EvalReport {
  EvalSetting setting = EvalSetting::u_ea();
  std::vector<MetricRow> measures;
  // AUARC of a random predictor (mean target) and of target-as-predictor.
  double base_accuracy = 0.0;
  double oracle_auarc = 0.0;
  std::optional<double> oracle_auroc;
  std::vector<ArcPoint> oracle_arc;

  const MetricRow* find(std::string_view measure) const;
};

struct EvalOptions {
  double correctness_cutoff = kDefaultCorrectnessCutoff;  // acc > cutoff counts as correct
  std::size_t workers = 1;
};

// U+EA: AUARC of -U against the mean accuracy of each question.
// C+IA: AUROC/AUARC of C(x, s_j) against acc_{.,j}, averaged over j; measures
//       without confidences fall back to -U.
// U+IA: AUROC/AUARC of -U against acc_{.,j}, averaged over j.
// Individual-accuracy settings need the same m for every question.
EvalReport evaluate(std::span<const QuestionScores> questions, const EvalSetting& setting,
                    std::span<const std::string> measures, const EvalOptions& options = {});

struct PickBestRow {
  std::string measure;
  double mean_accuracy;
};

// Mean accuracy of the most confident response per question, for measures with
// confidences. Random (mean accuracy) and Oracle (best response) rows first.
std::vector<PickBestRow> pick_best_summary(std::span<const QuestionScores> questions,
                                           std::span<const std::string> measures);

}  // namespace specuq
