#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specuq/calibrate.hpp"
#include "specuq/pipeline.hpp"

namespace specuq::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kRuntimeError = 2 };

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> scores;  // evaluate: read scores instead of computing them
  std::vector<std::string> kernels{"jaccard"};
  std::vector<std::string> measures;  // explicit names; empty means default_measures(kernels)
  std::string nli_url;
  std::string nli_class_order = "entail,neutral,contra";
  int nli_timeout_ms = 30000;
  std::size_t max_in_flight = 8;
  std::optional<std::filesystem::path> cache_dir;
  Hyperparameters hyper;  // --nli-temperature / --ecc-threshold
  std::optional<std::filesystem::path> hyperparams;
  std::filesystem::path out_dir = ".";
  std::size_t workers = 1;
  std::size_t num_generations = 0;
  double correctness_cutoff = 0.7;
  std::uint64_t seed = 0;
  std::vector<std::string> settings{"U+EA", "C+IA", "U+IA"};
  bool export_embeddings = false;
  std::optional<std::string> embedding_measure;
  // calibrate
  std::size_t trials = 10;
  std::size_t calib_size = 1000;
  std::string objective = "auarc";
  std::optional<std::string> calibration_setting;
  std::vector<double> temperatures;
  std::vector<double> ecc_thresholds;
};

std::vector<MeasureSpec> resolve_measures(const RunConfig& config);

struct CacheStats {
  std::size_t pairs = 0;       // unique ordered distinct-text pairs in the dataset
  std::size_t cache_hits = 0;  // of those, already cached
  std::size_t requests = 0;    // endpoint calls issued
  double wall_seconds = 0.0;
};

// Each command writes into config.out_dir and throws specuq errors on failure.
void cmd_score(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_calibrate(const RunConfig& config, std::ostream& log);
CacheStats cmd_cache_nli(const RunConfig& config, std::ostream& log);

// Parses argv-style arguments (without the program name) and runs the chosen
// subcommand. Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace specuq::cli
