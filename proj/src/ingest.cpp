#include "specuq/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "specuq/error.hpp"
#include "specuq/random.hpp"

namespace specuq {

using nlohmann::json;

namespace {

const json& require_field(const json& obj, const char* name, std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(line, std::string("missing field \"") + name + "\"");
  return *it;
}

std::string require_string(const json& value, const char* name, std::size_t line) {
  if (!value.is_string()) throw ParseError(line, std::string("field \"") + name + "\" must be a string");
  return value.get<std::string>();
}

}  // namespace

void validate_record(const ResponseSet& record) {
  if (record.size() < 2) {
    throw ValidationError("record " + record.question_id + ": m<2 (got " +
                          std::to_string(record.size()) + " responses)");
  }
  if (record.accuracy) {
    if (record.accuracy->size() != record.size()) {
      throw ValidationError("record " + record.question_id + ": accuracy has " +
                            std::to_string(record.accuracy->size()) + " entries for " +
                            std::to_string(record.size()) + " responses");
    }
    for (double a : *record.accuracy) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ValidationError("record " + record.question_id + ": accuracy outside [0,1]");
      }
    }
  }
}

ResponseSet parse_record(std::string_view line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_number, "record must be a JSON object");

  ResponseSet record;
  record.question_id = require_string(require_field(obj, "question_id", line_number), "question_id", line_number);
  record.question = require_string(require_field(obj, "question", line_number), "question", line_number);
  if (auto it = obj.find("reference_answer"); it != obj.end() && !it->is_null()) {
    record.reference_answer = require_string(*it, "reference_answer", line_number);
  }

  const json& responses = require_field(obj, "responses", line_number);
  if (!responses.is_array()) throw ParseError(line_number, "field \"responses\" must be an array");
  record.responses.reserve(responses.size());
  for (const auto& r : responses) record.responses.push_back(require_string(r, "responses", line_number));

  if (auto it = obj.find("accuracy"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line_number, "field \"accuracy\" must be an array");
    std::vector<double> acc;
    acc.reserve(it->size());
    for (const auto& a : *it) {
      if (!a.is_number()) throw ParseError(line_number, "accuracy entries must be numbers");
      acc.push_back(a.get<double>());
    }
    record.accuracy = std::move(acc);
  }
  return record;
}

std::string serialize_record(const ResponseSet& record) {
  json obj;
  obj["question_id"] = record.question_id;
  obj["question"] = record.question;
  if (record.reference_answer) obj["reference_answer"] = *record.reference_answer;
  obj["responses"] = record.responses;
  if (record.accuracy) obj["accuracy"] = *record.accuracy;
  return obj.dump();
}

std::vector<ResponseSet> read_dataset(std::istream& in) {
  std::vector<ResponseSet> records;
  std::vector<std::string> too_small;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ResponseSet record = parse_record(line, line_number);
    if (record.size() < 2) {
      too_small.push_back(record.question_id);
      continue;
    }
    try {
      validate_record(record);
    } catch (const ValidationError& e) {
      throw ParseError(line_number, e.what());
    }
    records.push_back(std::move(record));
  }
  if (!too_small.empty()) {
    std::string ids;
    for (const auto& id : too_small) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("m<2 for " + std::to_string(too_small.size()) + " record(s): " + ids);
  }
  return records;
}

std::vector<ResponseSet> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  if (format != DatasetFormat::jsonl) throw ValidationError("unsupported dataset format");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, std::span<const ResponseSet> records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

ResponseSet truncate_responses(const ResponseSet& record, std::size_t m) {
  if (m < 2) throw ValidationError("number of generations must be at least 2");
  ResponseSet out = record;
  if (out.responses.size() > m) out.responses.resize(m);
  if (out.accuracy && out.accuracy->size() > m) out.accuracy->resize(m);
  return out;
}

std::vector<std::size_t> DedupMap::representatives() const {
  std::vector<std::size_t> reps;
  for (std::size_t j = 0; j < representative.size(); ++j) {
    if (representative[j] == j) reps.push_back(j);
  }
  return reps;
}

std::size_t DedupMap::distinct_count() const {
  std::size_t k = 0;
  for (std::size_t j = 0; j < representative.size(); ++j) k += representative[j] == j;
  return k;
}

std::size_t DedupMap::ordered_pair_count() const {
  const std::size_t k = distinct_count();
  return k * (k == 0 ? 0 : k - 1);
}

DedupMap dedup_pairs(std::span<const std::string> responses) {
  DedupMap map;
  map.representative.resize(responses.size());
  std::unordered_map<std::string_view, std::size_t> first;
  for (std::size_t j = 0; j < responses.size(); ++j) {
    auto [it, inserted] = first.emplace(responses[j], j);
    map.representative[j] = it->second;
  }
  return map;
}

SplitIndices split_indices(std::size_t n, std::size_t calib_size, std::uint64_t seed,
                           std::size_t trial_index) {
  if (calib_size >= n) {
    throw ValidationError("calibration size " + std::to_string(calib_size) +
                          " must be smaller than the dataset size " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, trial_index);
  // Partial Fisher-Yates: the first calib_size slots are the sample.
  for (std::size_t i = 0; i < calib_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  SplitIndices split;
  split.calibration.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(calib_size));
  std::sort(split.calibration.begin(), split.calibration.end());
  std::vector<bool> in_calib(n, false);
  for (auto i : split.calibration) in_calib[i] = true;
  split.test.reserve(n - calib_size);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_calib[i]) split.test.push_back(i);
  }
  return split;
}

std::vector<DatasetSplit> split_trials(std::span<const ResponseSet> dataset, std::size_t calib_size,
                                       std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  std::vector<DatasetSplit> splits;
  splits.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const SplitIndices idx = split_indices(dataset.size(), calib_size, seed, t);
    DatasetSplit split;
    split.seed = seed;
    split.trial_index = t;
    for (auto i : idx.calibration) split.calibration.push_back(dataset[i]);
    for (auto i : idx.test) split.test.push_back(dataset[i]);
    splits.push_back(std::move(split));
  }
  return splits;
}

}  // namespace specuq
