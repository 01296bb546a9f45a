#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specuq/ingest.hpp"
#include "specuq/numeric.hpp"
#include "specuq/random.hpp"

namespace specuq::testing {

ResponseSet make_record(std::string id, std::vector<std::string> responses, std::vector<double> accuracy = {});

// Text corpus where a random share of each question's responses repeats a
// paraphrase of the right answer and the rest are scattered wrong answers.
std::vector<ResponseSet> text_corpus(std::size_t questions, std::size_t m, std::uint64_t seed);

// Similarity graph with a planted correct cluster: within-cluster entries
// near `within`, everything else near `across`, each perturbed by a uniform
// jitter. Wrong responses fall into random small clusters of their own.
struct PlantedQuestion {
  Matrix w;
  std::vector<double> accuracy;
};

PlantedQuestion planted_question(Rng& rng, std::size_t m, double correct_share = 0.7, double within = 0.9,
                                 double across = 0.1, double jitter = 0.05);

// Random symmetric matrix with unit diagonal and off-diagonal entries in [0,1].
Matrix random_similarity(Rng& rng, std::size_t m);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
void write_corpus(const std::filesystem::path& path, const std::vector<ResponseSet>& records);

}  // namespace specuq::testing
