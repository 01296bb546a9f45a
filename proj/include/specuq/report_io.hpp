#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/calibrate.hpp"
#include "specuq/eval.hpp"
#include "specuq/pipeline.hpp"
#include "specuq/scores.hpp"

namespace specuq {

// 17 significant digits, so every written double reads back bit-identical.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string csv_escape(std::string_view field);
// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

// Score CSV: question_id,measure,response_index,u,c,semantic_set_id
// One row per (question, measure) carrying U, then one row per response with C
// for confidence measures. NumSet response rows carry semantic_set_id.
void write_scores_csv(std::ostream& out, std::span<const QuestionScores> scores);
std::vector<QuestionScores> read_scores_csv(std::istream& in);

// Report CSV: measure,setting,auroc,auarc,trial_mean,trial_std
// auroc/auarc are means over trials; trial_mean/trial_std summarize AUARC.
struct ReportRow {
  std::string measure;
  std::string setting;
  std::optional<double> auroc;
  double auarc = 0.0;
  double trial_mean = 0.0;
  double trial_std = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::vector<ReportRow> report_rows(const EvalReport& report);
std::vector<ReportRow> report_rows(const TrialSummary& summary);
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> read_report_csv(std::istream& in);

// ARC CSV: measure,keep_fraction,mean_accuracy (Random and Oracle included).
struct ArcRow {
  std::string measure;
  double keep_fraction;
  double mean_accuracy;

  friend bool operator==(const ArcRow&, const ArcRow&) = default;
};

std::vector<ArcRow> arc_rows(const EvalReport& report);
void write_arc_csv(std::ostream& out, std::span<const ArcRow> rows);
std::vector<ArcRow> read_arc_csv(std::istream& in);

// Embedding CSV: question_id,response_index,dim,value
struct EmbeddingRow {
  std::string question_id;
  std::size_t response_index;
  std::size_t dim;
  double value;

  friend bool operator==(const EmbeddingRow&, const EmbeddingRow&) = default;
};

void write_embeddings_csv(std::ostream& out, std::span<const EmbeddingRow> rows);
std::vector<EmbeddingRow> read_embeddings_csv(std::istream& in);

void write_pick_best_csv(std::ostream& out, std::span<const PickBestRow> rows);

// trial,measure,setting,auroc,auarc
void write_trials_csv(std::ostream& out, const TrialSummary& summary, std::span<const std::string> measures);

// {"defaults": {...}, "selected": {measure: {...}}, "trials": [...]}. The
// selected entry per measure is the most frequent choice across trials.
std::string hyperparameters_json(const TrialSummary& summary, const Hyperparameters& defaults);
HyperTable read_hyperparameters_json(std::istream& in);

}  // namespace specuq
