#include "specuq/eval.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "specuq/error.hpp"
#include "specuq/numeric.hpp"
#include "specuq/parallel.hpp"

namespace specuq {

EvalSetting::EvalSetting(Predictor predictor, Target target) : predictor_(predictor), target_(target) {
  if (predictor == Predictor::C && target == Target::expected_accuracy) {
    throw ValidationError("C+EA is not a defined evaluation setting");
  }
}

EvalSetting EvalSetting::parse(std::string_view label) {
  if (label == "U+EA") return u_ea();
  if (label == "C+IA") return c_ia();
  if (label == "U+IA") return u_ia();
  if (label == "C+EA") return {Predictor::C, Target::expected_accuracy};  // throws
  throw ValidationError("unknown evaluation setting \"" + std::string(label) + "\"");
}

std::string EvalSetting::label() const {
  std::string out = predictor_ == Predictor::U ? "U" : "C";
  out += target_ == Target::expected_accuracy ? "+EA" : "+IA";
  return out;
}

double expected_accuracy(std::span<const double> accuracy_row) {
  if (accuracy_row.empty()) throw ValidationError("expected accuracy of an empty row");
  return compensated_mean(accuracy_row);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("AUROC: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw ValidationError("AUROC undefined: labels hold a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks are multiples of 1/2, so the rank sum is exact in double.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && scores[order[k]] == scores[order[i]]) ++k;
    const double midrank = 0.5 * static_cast<double>(i + 1 + k);
    for (std::size_t t = i; t < k; ++t) {
      if (labels[order[t]] != 0) positive_rank_sum += midrank;
    }
    i = k;
  }
  const auto p = static_cast<double>(positives);
  const auto q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

std::vector<ArcPoint> arc_points(std::span<const double> predictor, std::span<const double> targets) {
  if (predictor.size() != targets.size()) throw ValidationError("ARC: predictor and targets differ in length");
  if (predictor.empty()) throw ValidationError("ARC needs at least one sample");
  const std::size_t n = predictor.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predictor[a] > predictor[b]; });
  std::vector<ArcPoint> points;
  points.reserve(n);
  CompensatedSum kept;
  for (std::size_t i = 0; i < n; ++i) {
    kept += targets[order[i]];
    const auto count = static_cast<double>(i + 1);
    points.push_back({count / static_cast<double>(n), kept.value() / count});
  }
  return points;
}

double auarc(std::span<const double> predictor, std::span<const double> targets) {
  const auto points = arc_points(predictor, targets);
  CompensatedSum sum;
  for (const auto& p : points) sum += p.mean_target;
  return sum.value() / static_cast<double>(points.size());
}

double pick_best(std::span<const double> confidence, std::span<const double> acc_row) {
  if (confidence.empty() || confidence.size() != acc_row.size()) {
    throw ValidationError("pick_best needs equally sized, non-empty confidence and accuracy rows");
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < confidence.size(); ++j) {
    if (confidence[j] > confidence[best]) best = j;
  }
  return acc_row[best];
}

const MetricRow* EvalReport::find(std::string_view measure) const {
  for (const auto& row : measures) {
    if (row.measure == measure) return &row;
  }
  return nullptr;
}

namespace {

void require_labels(std::span<const QuestionScores> questions) {
  std::string missing;
  for (const auto& q : questions) {
    if (!q.accuracy || q.accuracy->empty()) missing += (missing.empty() ? "" : ", ") + q.question_id;
  }
  if (!missing.empty()) throw ValidationError("accuracy labels missing for: " + missing);
}

const NamedScores& require_measure(const QuestionScores& q, const std::string& measure) {
  const NamedScores* s = q.find(measure);
  if (s == nullptr) throw ValidationError("question " + q.question_id + " has no scores for " + measure);
  return *s;
}

// Pointwise mean of equally long curves.
std::vector<ArcPoint> mean_curve(const std::vector<std::vector<ArcPoint>>& curves) {
  std::vector<ArcPoint> out = curves.front();
  for (std::size_t i = 0; i < out.size(); ++i) {
    CompensatedSum s;
    for (const auto& c : curves) s += c[i].mean_target;
    out[i].mean_target = s.value() / static_cast<double>(curves.size());
  }
  return out;
}

struct ColumnMetrics {
  std::optional<double> auroc;
  double auarc;
  std::vector<ArcPoint> arc;
};

// Averages per-generation metrics over the m accuracy columns.
ColumnMetrics per_generation(std::span<const QuestionScores> questions, std::size_t m, double cutoff,
                             const std::function<double(std::size_t i, std::size_t j)>& predictor) {
  const std::size_t n = questions.size();
  std::vector<double> pred(n);
  std::vector<double> target(n);
  std::vector<int> label(n);
  CompensatedSum auarc_sum;
  CompensatedSum auroc_sum;
  std::size_t auroc_columns = 0;
  std::vector<std::vector<ArcPoint>> curves;
  curves.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = predictor(i, j);
      target[i] = (*questions[i].accuracy)[j];
      label[i] = target[i] > cutoff ? 1 : 0;
      (label[i] ? pos : neg) = true;
    }
    curves.push_back(arc_points(pred, target));
    CompensatedSum s;
    for (const auto& pt : curves.back()) s += pt.mean_target;
    auarc_sum += s.value() / static_cast<double>(n);
    if (pos && neg) {
      auroc_sum += auroc(pred, label);
      ++auroc_columns;
    }
  }
  ColumnMetrics out;
  out.auarc = auarc_sum.value() / static_cast<double>(m);
  if (auroc_columns > 0) out.auroc = auroc_sum.value() / static_cast<double>(auroc_columns);
  out.arc = mean_curve(curves);
  return out;
}

}  // namespace

EvalReport evaluate(std::span<const QuestionScores> questions, const EvalSetting& setting,
                    std::span<const std::string> measures, const EvalOptions& options) {
  if (questions.empty()) throw ValidationError("nothing to evaluate: no questions");
  require_labels(questions);
  for (const auto& q : questions) {
    for (const auto& name : measures) require_measure(q, name);
  }

  EvalReport report;
  report.setting = setting;
  report.measures.resize(measures.size());
  const std::size_t n = questions.size();

  if (setting.target() == Target::expected_accuracy) {
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = expected_accuracy(*questions[i].accuracy);
    report.base_accuracy = compensated_mean(target);
    report.oracle_arc = arc_points(target, target);
    report.oracle_auarc = auarc(target, target);
    parallel_for(measures.size(), options.workers, [&](std::size_t k) {
      std::vector<double> pred(n);
      for (std::size_t i = 0; i < n; ++i) pred[i] = -require_measure(questions[i], measures[k]).u;
      auto& row = report.measures[k];
      row.measure = measures[k];
      row.arc = arc_points(pred, target);
      row.auarc = auarc(pred, target);
    });
    return report;
  }

  const std::size_t m = questions.front().accuracy->size();
  for (const auto& q : questions) {
    if (q.accuracy->size() != m) {
      throw ValidationError(setting.label() + " needs the same number of generations for every question (" +
                            q.question_id + " has " + std::to_string(q.accuracy->size()) + ", expected " +
                            std::to_string(m) + ")");
    }
  }

  CompensatedSum all;
  for (const auto& q : questions) {
    for (double a : *q.accuracy) all += a;
  }
  report.base_accuracy = all.value() / static_cast<double>(n * m);
  const auto oracle = per_generation(questions, m, options.correctness_cutoff,
                                     [&](std::size_t i, std::size_t j) { return (*questions[i].accuracy)[j]; });
  report.oracle_auarc = oracle.auarc;
  report.oracle_auroc = oracle.auroc;
  report.oracle_arc = oracle.arc;

  parallel_for(measures.size(), options.workers, [&](std::size_t k) {
    std::vector<const NamedScores*> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = &require_measure(questions[i], measures[k]);
      if (rows[i]->c && rows[i]->c->size() != m) {
        throw ValidationError("question " + questions[i].question_id + ": " + measures[k] +
                              " confidence length does not match the accuracy labels");
      }
    }
    const bool use_c = setting.predictor() == Predictor::C;
    const auto metrics = per_generation(questions, m, options.correctness_cutoff, [&](std::size_t i, std::size_t j) {
      const NamedScores& s = *rows[i];
      return use_c && s.c ? (*s.c)[j] : -s.u;
    });
    auto& row = report.measures[k];
    row.measure = measures[k];
    row.auroc = metrics.auroc;
    row.auarc = metrics.auarc;
    row.arc = metrics.arc;
  });
  return report;
}

std::vector<PickBestRow> pick_best_summary(std::span<const QuestionScores> questions,
                                           std::span<const std::string> measures) {
  require_labels(questions);
  std::vector<PickBestRow> rows;
  CompensatedSum random;
  CompensatedSum oracle;
  for (const auto& q : questions) {
    random += compensated_mean(*q.accuracy);
    oracle += *std::max_element(q.accuracy->begin(), q.accuracy->end());
  }
  const auto n = static_cast<double>(questions.size());
  rows.push_back({"Random", random.value() / n});
  rows.push_back({"Oracle", oracle.value() / n});
  for (const auto& name : measures) {
    if (questions.empty() || !require_measure(questions.front(), name).c) continue;
    CompensatedSum picked;
    for (const auto& q : questions) {
      const auto& s = require_measure(q, name);
      if (!s.c) throw ValidationError("question " + q.question_id + " lacks confidences for " + name);
      picked += pick_best(*s.c, *q.accuracy);
    }
    rows.push_back({name, picked.value() / n});
  }
  return rows;
}

}  // namespace specuq
