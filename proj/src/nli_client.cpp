#include "specuq/nli_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "specuq/error.hpp"
#include "specuq/parallel.hpp"

namespace specuq {

using nlohmann::json;

NliProbabilities to_probabilities(const NliLogits& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("softmax temperature must be a positive finite number");
  }
  if (!std::isfinite(logits.entail) || !std::isfinite(logits.neutral) || !std::isfinite(logits.contra)) {
    throw ValidationError("NLI logits must be finite");
  }
  const double top = std::max({logits.entail, logits.neutral, logits.contra});
  const double e = std::exp((logits.entail - top) / temperature);
  const double n = std::exp((logits.neutral - top) / temperature);
  const double c = std::exp((logits.contra - top) / temperature);
  const double z = e + n + c;
  return {e / z, n / z, c / z, temperature};
}

PairText format_pair(std::string_view question, std::string_view answer1, std::string_view answer2) {
  auto join = [&](std::string_view answer) {
    std::string out(question);
    if (!out.empty() && !answer.empty()) out += ' ';
    out += answer;
    return out;
  };
  return {join(answer1), join(answer2)};
}

std::string pair_key(const PairText& pair) {
  const std::string material =
      std::to_string(pair.premise.size()) + ':' + pair.premise + pair.hypothesis;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

ClassOrder ClassOrder::parse(std::string_view spec) {
  std::vector<std::string> names;
  std::string current;
  for (char ch : spec) {
    if (ch == ',') {
      names.push_back(current);
      current.clear();
    } else if (ch != ' ') {
      current += ch;
    }
  }
  names.push_back(current);
  if (names.size() != 3) throw ValidationError("class order must list entail, neutral, contra");
  ClassOrder order;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 3; ++i) {
    if (names[i] == "entail") order.entail = i;
    else if (names[i] == "neutral") order.neutral = i;
    else if (names[i] == "contra") order.contra = i;
    else throw ValidationError("unknown NLI class \"" + names[i] + "\"");
    seen.insert(names[i]);
  }
  if (seen.size() != 3) throw ValidationError("class order must be a permutation of entail,neutral,contra");
  return order;
}

NliLogits parse_classify_response(std::string_view body, const ClassOrder& order, const std::string& key) {
  auto excerpt = [&] {
    std::string s(body.substr(0, 120));
    if (body.size() > 120) s += "...";
    return s;
  };
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProtocolError("NLI endpoint returned invalid JSON: " + excerpt(), key);
  }
  const auto it = doc.is_object() ? doc.find("logits") : doc.end();
  if (it == doc.end() || !it->is_array() || it->size() != 3 ||
      !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_number(); })) {
    throw ProtocolError("NLI endpoint response lacks a 3-number \"logits\" array: " + excerpt(), key);
  }
  NliLogits logits{(*it)[order.entail].get<double>(), (*it)[order.neutral].get<double>(),
                   (*it)[order.contra].get<double>()};
  if (!std::isfinite(logits.entail) || !std::isfinite(logits.neutral) || !std::isfinite(logits.contra)) {
    throw ProtocolError("NLI endpoint returned non-finite logits: " + excerpt(), key);
  }
  return logits;
}

HttpNliBackend::HttpNliBackend(std::string url, HttpBackendOptions options)
    : url_(std::move(url)), options_(options) {
  const auto scheme = url_.find("://");
  if (scheme == std::string::npos) throw ValidationError("NLI endpoint URL needs a scheme: " + url_);
  if (url_.compare(0, scheme, "http") != 0) {
    throw ValidationError("only http:// NLI endpoints are supported: " + url_);
  }
  const auto path_start = url_.find('/', scheme + 3);
  base_ = url_.substr(0, path_start);
  path_ = path_start == std::string::npos ? std::string() : url_.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/classify";
  if (options_.attempts < 1) options_.attempts = 1;
}

NliLogits HttpNliBackend::classify(const PairText& pair) {
  const std::string key = pair_key(pair);
  const std::string body = json{{"premise", pair.premise}, {"hypothesis", pair.hypothesis}}.dump();
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);

  std::string last_failure;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    httplib::Client client(base_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(path_, body, "application/json");
    if (res && res->status == 200) return parse_classify_response(res->body, options_.class_order, key);
    if (res && res->status < 500) {
      throw EndpointError("NLI endpoint answered HTTP " + std::to_string(res->status) + " for pair " + key, key);
    }
    last_failure = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < options_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw EndpointError("NLI endpoint failed after " + std::to_string(options_.attempts) +
                          " attempts (" + last_failure + ") for pair " + key,
                      key);
}

NliCache::NliCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const json doc = json::parse(line);
      const auto& l = doc.at("logits");
      Entry entry{doc.at("premise").get<std::string>(), doc.at("hypothesis").get<std::string>(),
                  {l.at(0).get<double>(), l.at(1).get<double>(), l.at(2).get<double>()}};
      entries_.insert_or_assign(doc.at("key").get<std::string>(), std::move(entry));
    } catch (const json::exception& e) {
      throw ParseError(line_number, "corrupt NLI cache " + file_->string() + ": " + e.what());
    }
  }
}

std::optional<NliLogits> NliCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.logits;
}

bool NliCache::contains(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(key);
}

void NliCache::store(const std::string& key, const PairText& pair, const NliLogits& logits) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key, Entry{pair.premise, pair.hypothesis, logits});
  dirty_ = true;
}

std::size_t NliCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void NliCache::flush() {
  std::lock_guard lock(mutex_);
  if (!file_ || !dirty_) return;
  if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
  auto tmp = *file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write NLI cache " + tmp.string());
    for (const auto& [key, e] : entries_) {
      json doc{{"key", key},
               {"premise", e.premise},
               {"hypothesis", e.hypothesis},
               {"logits", {e.logits.entail, e.logits.neutral, e.logits.contra}}};
      out << doc.dump() << '\n';
    }
    if (!out.flush()) throw Error("cannot write NLI cache " + tmp.string());
  }
  std::filesystem::rename(tmp, *file_);
  dirty_ = false;
}

NliClient::NliClient(NliCache& cache, std::shared_ptr<NliBackend> backend, std::size_t max_in_flight)
    : cache_(cache),
      backend_(std::move(backend)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      in_flight_(static_cast<std::ptrdiff_t>(max_in_flight_)) {}

NliLogits NliClient::call_backend(const PairText& pair, const std::string& key) {
  if (!backend_) throw EndpointError("no NLI endpoint configured and pair " + key + " is not cached", key);
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{in_flight_};
  ++endpoint_calls_;
  NliLogits logits = backend_->classify(pair);
  cache_.store(key, pair, logits);
  return logits;
}

NliLogits NliClient::classify(const PairText& pair) {
  const std::string key = pair_key(pair);
  if (auto hit = cache_.lookup(key)) {
    ++cache_hits_;
    return *hit;
  }
  return call_backend(pair, key);
}

std::vector<NliLogits> NliClient::classify_batch(std::span<const PairText> pairs) {
  std::vector<NliLogits> out(pairs.size());
  std::vector<std::string> keys(pairs.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    keys[i] = pair_key(pairs[i]);
    if (auto hit = cache_.lookup(keys[i])) {
      ++cache_hits_;
      out[i] = *hit;
    } else {
      misses.push_back(i);
    }
  }
  parallel_for(misses.size(), max_in_flight_, [&](std::size_t k) {
    const std::size_t i = misses[k];
    out[i] = call_backend(pairs[i], keys[i]);
  });
  return out;
}

bool NliClient::covers(std::span<const PairText> pairs) const {
  return std::all_of(pairs.begin(), pairs.end(),
                     [&](const PairText& p) { return cache_.contains(pair_key(p)); });
}

std::vector<PairText> pair_requests(const ResponseSet& record, const DedupMap& dedup) {
  const auto reps = dedup.representatives();
  std::vector<PairText> requests;
  requests.reserve(reps.size() * (reps.empty() ? 0 : reps.size() - 1));
  for (auto a : reps) {
    for (auto b : reps) {
      if (a == b) continue;
      requests.push_back(format_pair(record.question, record.responses[a], record.responses[b]));
    }
  }
  return requests;
}

PairLogits fetch_pair_logits(const ResponseSet& record, const DedupMap& dedup, PairClassifier& classifier) {
  const auto reps = dedup.representatives();
  PairLogits out;
  out.distinct = reps.size();
  out.slot.resize(record.size());
  std::vector<std::size_t> slot_of_rep(record.size());
  for (std::size_t s = 0; s < reps.size(); ++s) slot_of_rep[reps[s]] = s;
  for (std::size_t j = 0; j < record.size(); ++j) out.slot[j] = slot_of_rep[dedup.representative[j]];
  out.table.assign(out.distinct * out.distinct, NliLogits{});

  const auto requests = pair_requests(record, dedup);
  std::vector<NliLogits> logits;
  try {
    logits = classifier.classify_batch(requests);
  } catch (const EndpointError& e) {
    for (std::size_t a = 0, i = 0; a < reps.size(); ++a) {
      for (std::size_t b = 0; b < reps.size(); ++b) {
        if (a == b) continue;
        if (pair_key(requests[i++]) == e.pair_key()) {
          throw EndpointError("question " + record.question_id + ", pair (" + std::to_string(reps[a]) +
                                  ", " + std::to_string(reps[b]) + "): " + e.what(),
                              e.pair_key());
        }
      }
    }
    throw;
  }
  if (logits.size() != requests.size()) throw Error("classifier returned a short batch");
  for (std::size_t a = 0, i = 0; a < out.distinct; ++a) {
    for (std::size_t b = 0; b < out.distinct; ++b) {
      if (a != b) out.table[a * out.distinct + b] = logits[i++];
    }
  }
  return out;
}

}  // namespace specuq
