#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specuq/ingest.hpp"

namespace specuq {

// Raw class logits of one ordered (premise, hypothesis) judgment.
struct NliLogits {
  double entail = 0.0;
  double neutral = 0.0;
  double contra = 0.0;

  friend bool operator==(const NliLogits&, const NliLogits&) = default;
};

struct NliProbabilities {
  double p_entail = 0.0;
  double p_neutral = 0.0;
  double p_contra = 0.0;
  double temperature = 1.0;
};

// Softmax of logits / temperature with max-logit subtraction.
// Throws ValidationError unless temperature > 0 and the logits are finite.
NliProbabilities to_probabilities(const NliLogits& logits, double temperature);

struct PairText {
  std::string premise;
  std::string hypothesis;
};

// "<question> <answer1>" / "<question> <answer2>"; the endpoint's two fields
// play the role of the separator token.
PairText format_pair(std::string_view question, std::string_view answer1, std::string_view answer2);

// Hex SHA-256 over a length-prefixed encoding of (premise, hypothesis).
std::string pair_key(const PairText& pair);

// Position of each class in the wire "logits" array. The default wire order
// is [entail, neutral, contra].
struct ClassOrder {
  std::size_t entail = 0;
  std::size_t neutral = 1;
  std::size_t contra = 2;

  // Accepts a comma-separated permutation of entail,neutral,contra.
  static ClassOrder parse(std::string_view spec);
};

NliLogits parse_classify_response(std::string_view body, const ClassOrder& order,
                                  const std::string& key = {});

class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual NliLogits classify(const PairText& pair) = 0;
};

struct HttpBackendOptions {
  ClassOrder class_order;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds timeout{30000};
};

// POST <url>/classify with {"premise": ..., "hypothesis": ...}; expects
// {"logits": [..3 numbers..]}. Transport failures and 5xx replies are retried
// with exponential backoff.
class HttpNliBackend final : public NliBackend {
 public:
  explicit HttpNliBackend(std::string url, HttpBackendOptions options = {});
  NliLogits classify(const PairText& pair) override;

  const std::string& url() const noexcept { return url_; }

 private:
  std::string url_;
  std::string base_;
  std::string path_;
  HttpBackendOptions options_;
};

// Persistent logit cache. The file is JSONL of
// {"key", "premise", "hypothesis", "logits": [entail, neutral, contra]} and is
// rewritten atomically (temp file + rename) on flush, sorted by key.
class NliCache {
 public:
  NliCache() = default;
  explicit NliCache(std::filesystem::path file);

  static std::filesystem::path file_in(const std::filesystem::path& dir) {
    return dir / "nli_cache.jsonl";
  }

  std::optional<NliLogits> lookup(const std::string& key) const;
  void store(const std::string& key, const PairText& pair, const NliLogits& logits);
  bool contains(const std::string& key) const;
  std::size_t size() const;
  void flush();

 private:
  struct Entry {
    std::string premise;
    std::string hypothesis;
    NliLogits logits;
  };

  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::optional<std::filesystem::path> file_;
  bool dirty_ = false;
};

// Anything that can judge a batch of ordered pairs. Results align with input.
class PairClassifier {
 public:
  virtual ~PairClassifier() = default;
  virtual std::vector<NliLogits> classify_batch(std::span<const PairText> pairs) = 0;
};

// Cache-first NLI client. Misses go to the backend concurrently, bounded by
// max_in_flight across all callers; results are assembled by input position.
class NliClient final : public PairClassifier {
 public:
  static constexpr std::size_t kDefaultMaxInFlight = 8;

  NliClient(NliCache& cache, std::shared_ptr<NliBackend> backend,
            std::size_t max_in_flight = kDefaultMaxInFlight);

  NliLogits classify(const PairText& pair);
  std::vector<NliLogits> classify_batch(std::span<const PairText> pairs) override;

  bool has_backend() const noexcept { return backend_ != nullptr; }
  bool covers(std::span<const PairText> pairs) const;

  std::size_t endpoint_calls() const noexcept { return endpoint_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  NliLogits call_backend(const PairText& pair, const std::string& key);

  NliCache& cache_;
  std::shared_ptr<NliBackend> backend_;
  std::size_t max_in_flight_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> endpoint_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Logits for all ordered pairs of distinct texts of one question.
struct PairLogits {
  std::vector<std::size_t> slot;  // response index -> distinct-text slot
  std::size_t distinct = 0;
  std::vector<NliLogits> table;  // distinct x distinct, row = premise; diagonal unused

  std::size_t size() const noexcept { return slot.size(); }
  bool same_text(std::size_t j1, std::size_t j2) const { return slot[j1] == slot[j2]; }
  const NliLogits& at(std::size_t premise, std::size_t hypothesis) const {
    return table[slot[premise] * distinct + slot[hypothesis]];
  }
};

// Requests in row-major slot order, skipping same-slot pairs.
std::vector<PairText> pair_requests(const ResponseSet& record, const DedupMap& dedup);

PairLogits fetch_pair_logits(const ResponseSet& record, const DedupMap& dedup,
                             PairClassifier& classifier);

}  // namespace specuq
