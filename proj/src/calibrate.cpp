#include "specuq/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "specuq/error.hpp"
#include "specuq/numeric.hpp"
#include "specuq/parallel.hpp"

namespace specuq {

Objective parse_objective(std::string_view name) {
  if (name == "auarc") return Objective::auarc;
  if (name == "auroc") return Objective::auroc;
  throw ValidationError("unknown objective \"" + std::string(name) + "\"");
}

std::string_view objective_name(Objective objective) {
  return objective == Objective::auarc ? "auarc" : "auroc";
}

void HyperGrid::validate() const {
  if (temperatures.empty()) throw ValidationError("temperature grid is empty");
  if (ecc_thresholds.empty()) throw ValidationError("eccentricity threshold grid is empty");
  for (double t : temperatures) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("temperatures must be positive");
  }
  for (double t : ecc_thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ValidationError("eccentricity thresholds must lie strictly inside (0,1)");
  }
  if (setting && objective == Objective::auroc && setting->target() == Target::expected_accuracy) {
    throw ValidationError("AUROC is undefined for expected-accuracy targets");
  }
}

EvalSetting objective_setting(const MeasureSpec& measure, const HyperGrid& grid) {
  if (grid.setting) return *grid.setting;
  if (measure.has_confidence()) return EvalSetting::c_ia();
  return grid.objective == Objective::auroc ? EvalSetting::u_ia() : EvalSetting::u_ea();
}

std::vector<Hyperparameters> grid_points(const MeasureSpec& measure, const HyperGrid& grid,
                                         const Hyperparameters& base) {
  const std::vector<double> temps = measure.uses_temperature() ? grid.temperatures
                                                                : std::vector<double>{base.temperature};
  const std::vector<double> thresholds = measure.uses_threshold() ? grid.ecc_thresholds
                                                                   : std::vector<double>{base.ecc_threshold};
  std::vector<Hyperparameters> points;
  points.reserve(temps.size() * thresholds.size());
  for (double t : temps) {
    for (double th : thresholds) points.push_back({t, th});
  }
  return points;
}

namespace {
std::atomic<std::uint64_t> next_calibration_id{1};
}  // namespace

CalibrationSet::CalibrationSet(std::vector<const PreparedQuestion*> questions)
    : questions_(std::move(questions)), id_(next_calibration_id.fetch_add(1)) {}

namespace {

class SpectralObjective {
 public:
  SpectralObjective(const HyperGrid& grid, const EvalOptions& options) : grid_(grid), options_(options) {}

  double operator()(const CalibrationSet& calib, const MeasureSpec& measure, const Hyperparameters& hyper) {
    const std::size_t n = calib.size();
    auto questions = calib.questions();
    std::vector<QuestionScores> scored(n);
    const std::string name = measure.name();

    if (measure.kernel && measure.method != Method::lexi_sim) {
      const auto& states = states_for(calib, *measure.kernel, hyper.temperature);
      parallel_for(n, options_.workers, [&](std::size_t i) {
        auto s = spectral_measure(states[i], measure.method, hyper);
        scored[i] = {questions[i]->record.question_id, questions[i]->record.accuracy,
                     {{name, s.u, std::move(s.c)}}, std::nullopt};
      });
    } else {
      parallel_for(n, options_.workers, [&](std::size_t i) {
        auto s = score_measure(*questions[i], measure, hyper);
        scored[i] = {questions[i]->record.question_id, questions[i]->record.accuracy,
                     {{name, s.u, std::move(s.c)}}, std::nullopt};
      });
    }

    const std::vector<std::string> names{name};
    const auto report = evaluate(scored, objective_setting(measure, grid_), names, options_);
    const auto& row = report.measures.front();
    if (grid_.objective == Objective::auarc) return row.auarc;
    return row.auroc.value_or(-std::numeric_limits<double>::infinity());
  }

 private:
  const std::vector<SpectralState>& states_for(const CalibrationSet& calib, Kernel kernel, double temperature) {
    const double t = is_nli(kernel) ? temperature : 0.0;
    if (!(memo_set_ == calib.id() && memo_kernel_ == kernel && memo_temperature_ == t)) {
      auto questions = calib.questions();
      memo_states_.assign(calib.size(), SpectralState{});
      parallel_for(calib.size(), options_.workers, [&](std::size_t i) {
        memo_states_[i] = spectral_state(similarity_for(*questions[i], kernel, temperature));
      });
      memo_set_ = calib.id();
      memo_kernel_ = kernel;
      memo_temperature_ = t;
    }
    return memo_states_;
  }

  HyperGrid grid_;
  EvalOptions options_;
  std::uint64_t memo_set_ = 0;
  Kernel memo_kernel_ = Kernel::jaccard;
  double memo_temperature_ = -1.0;
  std::vector<SpectralState> memo_states_;
};

}  // namespace

ObjectiveFn make_objective(const HyperGrid& grid, const EvalOptions& options) {
  auto state = std::make_shared<SpectralObjective>(grid, options);
  auto mutex = std::make_shared<std::mutex>();
  return [state, mutex](const CalibrationSet& calib, const MeasureSpec& measure, const Hyperparameters& hyper) {
    std::lock_guard lock(*mutex);
    return (*state)(calib, measure, hyper);
  };
}

std::vector<HyperChoice> grid_search(const CalibrationSet& calibration, std::span<const MeasureSpec> measures,
                                     const HyperGrid& grid, const ObjectiveFn& objective,
                                     const Hyperparameters& base) {
  grid.validate();
  if (calibration.empty()) throw ValidationError("grid search needs a non-empty calibration set");
  std::vector<HyperChoice> chosen;
  chosen.reserve(measures.size());
  for (const auto& measure : measures) {
    HyperChoice best{measure.name(), base, -std::numeric_limits<double>::infinity()};
    bool first = true;
    for (const auto& point : grid_points(measure, grid, base)) {
      const double value = objective(calibration, measure, point);
      if (first || value > best.objective) {
        best.hyper = point;
        best.objective = value;
        first = false;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {*lo, 0.0};
  const double mean = std::clamp(compensated_mean(values), *lo, *hi);
  CompensatedSum sq;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq.value() / static_cast<double>(values.size()))};
}

TrialSummary run_trials(std::span<const PreparedQuestion> dataset, std::span<const MeasureSpec> measures,
                        const HyperGrid& grid, const TrialOptions& options, const ObjectiveFn* objective) {
  grid.validate();
  if (options.trials < 1) throw ValidationError("trials must be at least 1");
  const ObjectiveFn fallback = objective ? ObjectiveFn{} : make_objective(grid, options.eval);
  const ObjectiveFn& fn = objective ? *objective : fallback;
  const auto names = measure_names(measures);

  TrialSummary summary;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto split = split_indices(dataset.size(), options.calib_size, options.seed, t);
    std::vector<const PreparedQuestion*> calib_items;
    std::vector<const PreparedQuestion*> test_items;
    for (auto i : split.calibration) calib_items.push_back(&dataset[i]);
    for (auto i : split.test) test_items.push_back(&dataset[i]);
    const CalibrationSet calibration(std::move(calib_items));
    const TestSet test(std::move(test_items));

    TrialResult result;
    result.trial = t;
    for (const auto* q : calibration.questions()) result.calibration_ids.push_back(q->record.question_id);
    result.chosen = grid_search(calibration, measures, grid, fn, options.base);

    HyperTable table;
    table.defaults = options.base;
    for (const auto& c : result.chosen) table.per_measure[c.measure] = c.hyper;
    const auto scored = score_dataset(test.questions(), measures, table, options.eval.workers);
    for (const auto& setting : options.settings) result.reports.push_back(evaluate(scored, setting, names, options.eval));
    summary.trials.push_back(std::move(result));
  }

  auto summarize = [&](MetricSummary row) {
    const auto a = mean_std(row.auarc);
    row.auarc_mean = a.mean;
    row.auarc_std = a.std;
    if (!row.auroc.empty() && row.auroc.size() == row.auarc.size()) {
      const auto r = mean_std(row.auroc);
      row.auroc_mean = r.mean;
      row.auroc_std = r.std;
    } else {
      row.auroc.clear();
    }
    summary.metrics.push_back(std::move(row));
  };

  for (std::size_t s = 0; s < options.settings.size(); ++s) {
    const std::string label = options.settings[s].label();
    MetricSummary random;
    random.measure = "Random";
    random.setting = label;
    MetricSummary oracle;
    oracle.measure = "Oracle";
    oracle.setting = label;
    for (const auto& trial : summary.trials) {
      const auto& report = trial.reports[s];
      random.auarc.push_back(report.base_accuracy);
      oracle.auarc.push_back(report.oracle_auarc);
      if (report.oracle_auroc) {
        random.auroc.push_back(0.5);
        oracle.auroc.push_back(*report.oracle_auroc);
      }
    }
    summarize(std::move(random));
    summarize(std::move(oracle));
    for (std::size_t k = 0; k < names.size(); ++k) {
      MetricSummary row;
      row.measure = names[k];
      row.setting = label;
      for (const auto& trial : summary.trials) {
        const auto& m = trial.reports[s].measures[k];
        row.auarc.push_back(m.auarc);
        if (m.auroc) row.auroc.push_back(*m.auroc);
      }
      summarize(std::move(row));
    }
  }
  return summary;
}

}  // namespace specuq
