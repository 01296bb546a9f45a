#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specuq/eval.hpp"
#include "specuq/pipeline.hpp"

namespace specuq {

enum class Objective { auarc, auroc };

Objective parse_objective(std::string_view name);
std::string_view objective_name(Objective objective);

struct HyperGrid {
  std::vector<double> temperatures{0.1, 0.25, 0.5, 1.0, 3.0, 5.0, 7.0};
  std::vector<double> ecc_thresholds{0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  Objective objective = Objective::auarc;
  // When unset every measure is tuned in its native setting: C+IA for
  // confidence measures, U+EA (U+IA for AUROC) for uncertainty-only ones.
  std::optional<EvalSetting> setting;

  void validate() const;
};

EvalSetting objective_setting(const MeasureSpec& measure, const HyperGrid& grid);

// Candidate settings for one measure in search order: temperatures outer,
// thresholds inner. Measures without tunable parameters get {base}.
std::vector<Hyperparameters> grid_points(const MeasureSpec& measure, const HyperGrid& grid,
                                         const Hyperparameters& base = {});

// Questions that may be used for hyper-parameter selection. Distinct from
// TestSet so a test split cannot be handed to grid_search.
class CalibrationSet {
 public:
  explicit CalibrationSet(std::vector<const PreparedQuestion*> questions);

  std::span<const PreparedQuestion* const> questions() const noexcept { return questions_; }
  std::size_t size() const noexcept { return questions_.size(); }
  bool empty() const noexcept { return questions_.empty(); }
  std::uint64_t id() const noexcept { return id_; }

 private:
  std::vector<const PreparedQuestion*> questions_;
  std::uint64_t id_;
};

class TestSet {
 public:
  explicit TestSet(std::vector<const PreparedQuestion*> questions) : questions_(std::move(questions)) {}

  std::span<const PreparedQuestion* const> questions() const noexcept { return questions_; }
  std::size_t size() const noexcept { return questions_.size(); }

 private:
  std::vector<const PreparedQuestion*> questions_;
};

// Larger is better.
using ObjectiveFn = std::function<double(const CalibrationSet&, const MeasureSpec&, const Hyperparameters&)>;

// Evaluates the grid's objective on the calibration questions. Spectra of the
// most recent (set, kernel, temperature) are kept so a threshold sweep reuses
// one eigendecomposition per question. Never touches the NLI endpoint.
ObjectiveFn make_objective(const HyperGrid& grid, const EvalOptions& options);

struct HyperChoice {
  std::string measure;
  Hyperparameters hyper;
  double objective = 0.0;
};

// Per measure, the grid point with the largest objective; ties go to the
// earliest point. Throws ValidationError on an empty calibration set.
std::vector<HyperChoice> grid_search(const CalibrationSet& calibration, std::span<const MeasureSpec> measures,
                                     const HyperGrid& grid, const ObjectiveFn& objective,
                                     const Hyperparameters& base = {});

struct TrialOptions {
  std::size_t trials = 10;
  std::size_t calib_size = 1000;
  std::uint64_t seed = 0;
  std::vector<EvalSetting> settings{EvalSetting::u_ea(), EvalSetting::c_ia(), EvalSetting::u_ia()};
  Hyperparameters base;
  EvalOptions eval;
};

struct TrialResult {
  std::size_t trial = 0;
  std::vector<std::string> calibration_ids;
  std::vector<HyperChoice> chosen;
  std::vector<EvalReport> reports;  // one per TrialOptions::settings entry
};

// Test metric of one (measure, setting) across trials. "Random" and "Oracle"
// rows carry the reference AUARCs.
struct MetricSummary {
  std::string measure;
  std::string setting;
  std::vector<double> auarc;
  std::vector<double> auroc;  // empty when undefined
  double auarc_mean = 0.0;
  double auarc_std = 0.0;
  std::optional<double> auroc_mean;
  std::optional<double> auroc_std;
};

struct TrialSummary {
  std::vector<TrialResult> trials;
  std::vector<MetricSummary> metrics;
};

struct MeanStd {
  double mean;
  double std;
};

// Population standard deviation. Identical values give exactly (value, 0).
MeanStd mean_std(std::span<const double> values);

// Per trial: split, grid_search on the calibration part, evaluate the chosen
// hyper-parameters on the rest. `objective` defaults to make_objective(grid).
TrialSummary run_trials(std::span<const PreparedQuestion> dataset, std::span<const MeasureSpec> measures,
                        const HyperGrid& grid, const TrialOptions& options,
                        const ObjectiveFn* objective = nullptr);

}  // namespace specuq
