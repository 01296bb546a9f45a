#include "specuq/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "specuq/error.hpp"
#include "specuq/parallel.hpp"
#include "specuq/report_io.hpp"

namespace specuq::cli {

namespace {

std::vector<ResponseSet> load_truncated(const RunConfig& config) {
  auto records = load_dataset(config.dataset);
  if (config.num_generations > 0) {
    for (auto& r : records) r = truncate_responses(r, config.num_generations);
  }
  return records;
}

HyperTable hyper_table(const RunConfig& config) {
  HyperTable table;
  if (config.hyperparams) {
    std::ifstream in(*config.hyperparams);
    if (!in) throw ValidationError("cannot open hyper-parameter file " + config.hyperparams->string());
    table = read_hyperparameters_json(in);
  }
  table.defaults = config.hyper;
  return table;
}

void validate_hyper(const Hyperparameters& h) {
  if (!(h.temperature > 0.0)) throw ValidationError("--nli-temperature must be positive");
  if (!(h.ecc_threshold > 0.0 && h.ecc_threshold < 1.0)) {
    throw ValidationError("--ecc-threshold must lie strictly inside (0,1)");
  }
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  const auto path = config.out_dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// NLI plumbing for one run. The cache is flushed when the session ends, also
// on failure, so finished pairs are never re-requested.
class NliSession {
 public:
  NliSession(const RunConfig& config, bool endpoint_required) {
    cache_ = config.cache_dir ? std::make_unique<NliCache>(NliCache::file_in(*config.cache_dir))
                              : std::make_unique<NliCache>();
    std::shared_ptr<NliBackend> backend;
    if (!config.nli_url.empty()) {
      HttpBackendOptions options;
      options.class_order = ClassOrder::parse(config.nli_class_order);
      options.timeout = std::chrono::milliseconds(config.nli_timeout_ms);
      backend = std::make_shared<HttpNliBackend>(config.nli_url, options);
    } else if (endpoint_required) {
      throw ValidationError("no NLI endpoint: pass --nli-url or set NLI_ENDPOINT_URL");
    }
    client_ = std::make_unique<NliClient>(*cache_, std::move(backend), config.max_in_flight);
  }

  ~NliSession() {
    try {
      cache_->flush();
    } catch (...) {
    }
  }

  NliSession(const NliSession&) = delete;
  NliSession& operator=(const NliSession&) = delete;

  NliClient& client() { return *client_; }
  NliCache& cache() { return *cache_; }
  void flush() { cache_->flush(); }

  // Without an endpoint every needed pair must already be cached.
  void require_coverage(std::span<const ResponseSet> records) const {
    if (client_->has_backend()) return;
    for (const auto& r : records) {
      if (!client_->covers(pair_requests(r, dedup_pairs(r.responses)))) {
        throw ValidationError("NLI cache does not cover question " + r.question_id +
                              " and no NLI endpoint is configured (--nli-url or NLI_ENDPOINT_URL)");
      }
    }
  }

 private:
  std::unique_ptr<NliCache> cache_;
  std::unique_ptr<NliClient> client_;
};

bool any_nli(std::span<const MeasureSpec> measures) {
  for (const auto& m : measures) {
    if (m.needs_nli()) return true;
  }
  return false;
}

struct Prepared {
  std::vector<MeasureSpec> measures;
  std::vector<PreparedQuestion> questions;
};

Prepared prepare(const RunConfig& config, std::ostream& log) {
  Prepared p;
  p.measures = resolve_measures(config);
  const auto records = load_truncated(config);
  if (any_nli(p.measures)) {
    NliSession session(config, false);
    session.require_coverage(records);
    p.questions = prepare_dataset(records, 0, &session.client(), config.workers);
    session.flush();
    log << "nli: " << session.client().endpoint_calls() << " endpoint calls, "
        << session.client().cache_hits() << " cache hits\n";
  } else {
    p.questions = prepare_dataset(records, 0, nullptr, config.workers);
  }
  return p;
}

std::string setting_file_tag(const EvalSetting& s) {
  std::string tag = s.label();
  for (auto& c : tag) c = c == '+' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return tag;
}

}  // namespace

std::vector<MeasureSpec> resolve_measures(const RunConfig& config) {
  std::vector<MeasureSpec> measures;
  if (!config.measures.empty()) {
    for (const auto& name : config.measures) measures.push_back(MeasureSpec::parse(name));
  } else {
    std::vector<Kernel> kernels;
    for (const auto& k : config.kernels) kernels.push_back(parse_kernel(k));
    measures = default_measures(kernels);
  }
  std::set<std::string> seen;
  for (const auto& m : measures) {
    if (!seen.insert(m.name()).second) throw ValidationError("measure listed twice: " + m.name());
  }
  return measures;
}

void cmd_score(const RunConfig& config, std::ostream& log) {
  validate_hyper(config.hyper);
  const HyperTable table = hyper_table(config);
  auto prepared = prepare(config, log);
  const auto scores = score_dataset(prepared.questions, prepared.measures, table, config.workers);
  {
    auto out = open_output(config, "scores.csv");
    write_scores_csv(out, scores);
  }
  log << "scored " << scores.size() << " questions with " << prepared.measures.size() << " measures\n";

  if (!config.export_embeddings) return;
  std::optional<MeasureSpec> target;
  if (config.embedding_measure) {
    target = MeasureSpec::parse(*config.embedding_measure);
    if (target->method != Method::ecc) throw ValidationError("--embedding-measure must be an Ecc measure");
  } else {
    for (const auto& m : prepared.measures) {
      if (m.method == Method::ecc) {
        target = m;
        break;
      }
    }
  }
  if (!target) throw ValidationError("--export-embeddings needs an Ecc measure");
  const Hyperparameters h = table.lookup(*target);
  std::vector<std::vector<EmbeddingRow>> per_question(prepared.questions.size());
  parallel_for(prepared.questions.size(), config.workers, [&](std::size_t i) {
    const auto& q = prepared.questions[i];
    const auto state = spectral_state(similarity_for(q, *target->kernel, h.temperature));
    const Matrix v = ecc_embed(state.spectrum, h.ecc_threshold);
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      for (Eigen::Index d = 0; d < v.cols(); ++d) {
        per_question[i].push_back({q.record.question_id, static_cast<std::size_t>(j), static_cast<std::size_t>(d), v(j, d)});
      }
    }
  });
  std::vector<EmbeddingRow> rows;
  for (auto& pq : per_question) rows.insert(rows.end(), pq.begin(), pq.end());
  auto out = open_output(config, "embeddings.csv");
  write_embeddings_csv(out, rows);
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  validate_hyper(config.hyper);
  std::vector<EvalSetting> settings;
  for (const auto& s : config.settings) settings.push_back(EvalSetting::parse(s));
  std::vector<QuestionScores> scores;
  std::vector<std::string> names;

  if (config.scores) {
    std::ifstream in(*config.scores, std::ios::binary);
    if (!in) throw ValidationError("cannot open scores " + config.scores->string());
    scores = read_scores_csv(in);
    const auto records = load_truncated(config);
    std::map<std::string, const ResponseSet*> by_id;
    for (const auto& r : records) by_id[r.question_id] = &r;
    for (auto& q : scores) {
      auto it = by_id.find(q.question_id);
      if (it == by_id.end()) throw ValidationError("scores mention unknown question " + q.question_id);
      q.accuracy = it->second->accuracy;
    }
    if (!config.measures.empty()) {
      names = config.measures;
    } else if (!scores.empty()) {
      for (const auto& s : scores.front().scores) names.push_back(s.measure);
    }
  } else {
    const HyperTable table = hyper_table(config);
    auto prepared = prepare(config, log);
    scores = score_dataset(prepared.questions, prepared.measures, table, config.workers);
    names = measure_names(prepared.measures);
  }

  EvalOptions options;
  options.correctness_cutoff = config.correctness_cutoff;
  options.workers = config.workers;
  std::vector<ReportRow> rows;
  for (const auto& setting : settings) {
    const auto report = evaluate(scores, setting, names, options);
    const auto r = report_rows(report);
    rows.insert(rows.end(), r.begin(), r.end());
    auto arc = open_output(config, "arc_" + setting_file_tag(setting) + ".csv");
    write_arc_csv(arc, arc_rows(report));
  }
  {
    auto out = open_output(config, "report.csv");
    write_report_csv(out, rows);
  }
  {
    auto out = open_output(config, "pick_best.csv");
    write_pick_best_csv(out, pick_best_summary(scores, names));
  }
  log << "evaluated " << scores.size() << " questions in " << settings.size() << " settings\n";
}

void cmd_calibrate(const RunConfig& config, std::ostream& log) {
  validate_hyper(config.hyper);
  HyperGrid grid;
  if (!config.temperatures.empty()) grid.temperatures = config.temperatures;
  if (!config.ecc_thresholds.empty()) grid.ecc_thresholds = config.ecc_thresholds;
  grid.objective = parse_objective(config.objective);
  if (config.calibration_setting) grid.setting = EvalSetting::parse(*config.calibration_setting);
  grid.validate();

  TrialOptions options;
  options.trials = config.trials;
  options.calib_size = config.calib_size;
  options.seed = config.seed;
  options.base = config.hyper;
  options.eval.correctness_cutoff = config.correctness_cutoff;
  options.eval.workers = config.workers;
  options.settings.clear();
  for (const auto& s : config.settings) options.settings.push_back(EvalSetting::parse(s));

  auto prepared = prepare(config, log);
  if (options.calib_size >= prepared.questions.size()) {
    throw ValidationError("--calib-size must be smaller than the dataset (" +
                          std::to_string(prepared.questions.size()) + " questions)");
  }
  const auto summary = run_trials(prepared.questions, prepared.measures, grid, options);
  const auto names = measure_names(prepared.measures);
  {
    auto out = open_output(config, "trial_summary.csv");
    write_report_csv(out, report_rows(summary));
  }
  {
    auto out = open_output(config, "trials.csv");
    write_trials_csv(out, summary, names);
  }
  {
    auto out = open_output(config, "hyperparameters.json");
    out << hyperparameters_json(summary, config.hyper);
  }
  log << "ran " << summary.trials.size() << " trials\n";
}

CacheStats cmd_cache_nli(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const auto records = load_truncated(config);
  NliSession session(config, true);

  std::vector<PairText> pairs;
  std::set<std::string> keys;
  for (const auto& r : records) {
    for (auto& p : pair_requests(r, dedup_pairs(r.responses))) {
      if (keys.insert(pair_key(p)).second) pairs.push_back(std::move(p));
    }
  }
  CacheStats stats;
  stats.pairs = pairs.size();
  for (const auto& k : keys) stats.cache_hits += session.cache().contains(k);
  const std::size_t before = session.client().endpoint_calls();
  session.client().classify_batch(pairs);
  session.flush();
  stats.requests = session.client().endpoint_calls() - before;
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "cache-nli: " << stats.pairs << " pairs, " << stats.cache_hits << " cache hits, " << stats.requests
      << " requests, " << stats.wall_seconds << " s\n";
  return stats;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Black-box uncertainty and confidence scores for sampled LLM responses"};
  app.require_subcommand(1);
  RunConfig config;
  if (const char* env = std::getenv("NLI_ENDPOINT_URL")) config.nli_url = env;
  config.workers = default_workers();
  std::string class_order = config.nli_class_order;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--dataset", config.dataset, "JSONL dataset")->required();
    sub->add_option("--measure", config.kernels, "similarity kernel(s): jaccard, nli_entail, nli_contra, rouge_l")
        ->delimiter(',');
    sub->add_option("--measures", config.measures, "explicit measure names, e.g. Deg(E),EigV(J),NumSet")
        ->delimiter(',');
    sub->add_option("--nli-url", config.nli_url, "NLI endpoint base URL (default $NLI_ENDPOINT_URL)");
    sub->add_option("--nli-temperature", config.hyper.temperature, "softmax temperature for NLI logits");
    sub->add_option("--nli-class-order", config.nli_class_order, "wire order of the endpoint's logits");
    sub->add_option("--nli-timeout-ms", config.nli_timeout_ms, "per-request timeout");
    sub->add_option("--max-in-flight", config.max_in_flight, "concurrent NLI requests");
    sub->add_option("--cache-dir", config.cache_dir, "directory of the NLI logit cache");
    sub->add_option("--ecc-threshold", config.hyper.ecc_threshold, "eigenvalue cut-off for Ecc embeddings");
    sub->add_option("--hyperparams", config.hyperparams, "hyper-parameter JSON written by calibrate");
    sub->add_option("--out-dir", config.out_dir, "output directory");
    sub->add_option("--workers", config.workers, "worker threads");
    sub->add_option("--num-generations", config.num_generations, "use only the first m responses (0 = all)");
    sub->add_option("--correctness-cutoff", config.correctness_cutoff, "accuracy above this counts as correct");
    sub->add_option("--seed", config.seed, "random seed");
  };

  auto* score = app.add_subcommand("score", "write per-question U and per-response C scores");
  common(score);
  score->add_flag("--export-embeddings", config.export_embeddings, "also write Ecc spectral embeddings");
  score->add_option("--embedding-measure", config.embedding_measure, "Ecc measure to export, e.g. Ecc(E)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "AUROC / AUARC reports and ARC dumps");
  common(evaluate_cmd);
  evaluate_cmd->add_option("--settings", config.settings, "U+EA, C+IA, U+IA")->delimiter(',');
  evaluate_cmd->add_option("--scores", config.scores, "evaluate a score CSV instead of recomputing");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "grid-search hyper-parameters over repeated splits");
  common(calibrate_cmd);
  calibrate_cmd->add_option("--trials", config.trials, "number of random splits");
  calibrate_cmd->add_option("--calib-size", config.calib_size, "calibration questions per split");
  calibrate_cmd->add_option("--objective", config.objective, "auarc or auroc");
  calibrate_cmd->add_option("--calibration-setting", config.calibration_setting, "override the tuning setting");
  calibrate_cmd->add_option("--temperatures", config.temperatures, "temperature grid")->delimiter(',');
  calibrate_cmd->add_option("--ecc-thresholds", config.ecc_thresholds, "Ecc threshold grid")->delimiter(',');
  calibrate_cmd->add_option("--settings", config.settings, "settings reported on the test splits")->delimiter(',');

  auto* cache_cmd = app.add_subcommand("cache-nli", "pre-fill the NLI logit cache");
  common(cache_cmd);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  if (config.workers == 0) config.workers = default_workers();

  try {
    if (*score) cmd_score(config, err);
    else if (*evaluate_cmd) cmd_evaluate(config, err);
    else if (*calibrate_cmd) cmd_calibrate(config, err);
    else if (*cache_cmd) {
      const auto stats = cmd_cache_nli(config, err);
      out << "{\"pairs\": " << stats.pairs << ", \"cache_hits\": " << stats.cache_hits
          << ", \"requests\": " << stats.requests << ", \"wall_seconds\": " << stats.wall_seconds << "}\n";
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace specuq::cli
