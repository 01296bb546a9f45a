#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specuq {

// One question with its m sampled responses. Index j into `responses` is the
// response identity and is preserved by every downstream stage.
struct ResponseSet {
  std::string question_id;
  std::string question;
  std::optional<std::string> reference_answer;
  std::vector<std::string> responses;
  // acc_{i,j} in [0,1], one per response when present.
  std::optional<std::vector<double>> accuracy;

  std::size_t size() const noexcept { return responses.size(); }

  friend bool operator==(const ResponseSet&, const ResponseSet&) = default;
};

enum class DatasetFormat { jsonl };

// Throws ValidationError if the record cannot be scored (m < 2, accuracy of
// the wrong length or outside [0,1]).
void validate_record(const ResponseSet& record);

ResponseSet parse_record(std::string_view line, std::size_t line_number);
std::string serialize_record(const ResponseSet& record);

// Records come back in file order. Malformed lines raise ParseError with the
// line number; records with fewer than two responses are collected and
// reported together in a single ValidationError.
std::vector<ResponseSet> read_dataset(std::istream& in);
std::vector<ResponseSet> load_dataset(const std::filesystem::path& path,
                                      DatasetFormat format = DatasetFormat::jsonl);
void write_dataset(std::ostream& out, std::span<const ResponseSet> records);

// Keeps the first m responses (and labels). m >= 2.
ResponseSet truncate_responses(const ResponseSet& record, std::size_t m);

// Maps each response index to the smallest index holding a byte-identical text.
struct DedupMap {
  std::vector<std::size_t> representative;

  std::size_t size() const noexcept { return representative.size(); }
  bool is_representative(std::size_t j) const { return representative[j] == j; }
  // Representative indices in ascending order.
  std::vector<std::size_t> representatives() const;
  std::size_t distinct_count() const;
  // Ordered pairs of distinct texts that need an NLI judgment: k(k-1).
  std::size_t ordered_pair_count() const;
};

DedupMap dedup_pairs(std::span<const std::string> responses);

struct SplitIndices {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> test;
};

struct DatasetSplit {
  std::vector<ResponseSet> calibration;
  std::vector<ResponseSet> test;
  std::uint64_t seed = 0;
  std::size_t trial_index = 0;
};

// Draws calib_size of n indices uniformly without replacement from a stream
// seeded by (seed, trial_index). Both lists come back in ascending order.
SplitIndices split_indices(std::size_t n, std::size_t calib_size, std::uint64_t seed,
                           std::size_t trial_index);

std::vector<DatasetSplit> split_trials(std::span<const ResponseSet> dataset,
                                       std::size_t calib_size, std::size_t trials,
                                       std::uint64_t seed);

}  // namespace specuq
