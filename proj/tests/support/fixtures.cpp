#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace specuq::testing {

ResponseSet make_record(std::string id, std::vector<std::string> responses, std::vector<double> accuracy) {
  ResponseSet r;
  r.question_id = std::move(id);
  r.question = "Question " + r.question_id + "?";
  r.responses = std::move(responses);
  if (!accuracy.empty()) r.accuracy = std::move(accuracy);
  return r;
}

std::vector<ResponseSet> text_corpus(std::size_t questions, std::size_t m, std::uint64_t seed) {
  static const std::vector<std::string> kWords{"paris", "london", "rome",   "madrid", "berlin", "vienna",
                                               "oslo",  "lima",   "quito",  "cairo",  "delhi",  "tokyo",
                                               "seoul", "hanoi",  "dublin", "prague", "athens", "sofia"};
  static const std::vector<std::string> kFrames{"{}", "it is {}", "the answer is {}", "{} of course",
                                                "I think {}"};
  auto fill = [](const std::string& frame, const std::string& word) {
    std::string out = frame;
    out.replace(out.find("{}"), 2, word);
    return out;
  };
  Rng rng(seed);
  std::vector<ResponseSet> out;
  for (std::size_t i = 0; i < questions; ++i) {
    const std::string right = kWords[rng.below(kWords.size())];
    const double share = rng.uniform(0.2, 1.0);
    std::vector<std::string> responses;
    std::vector<double> acc;
    for (std::size_t j = 0; j < m; ++j) {
      if (rng.uniform() < share) {
        responses.push_back(fill(kFrames[rng.below(kFrames.size())], right));
        acc.push_back(1.0);
      } else {
        std::string wrong = kWords[rng.below(kWords.size())];
        if (wrong == right) wrong += " perhaps";
        responses.push_back(fill(kFrames[rng.below(kFrames.size())], wrong));
        acc.push_back(rng.uniform() < 0.1 ? 0.8 : 0.0);
      }
    }
    out.push_back(make_record("q" + std::to_string(i), std::move(responses), std::move(acc)));
  }
  return out;
}

PlantedQuestion planted_question(Rng& rng, std::size_t m, double correct_share, double within, double across,
                                 double jitter) {
  const auto n_correct = static_cast<std::size_t>(correct_share * static_cast<double>(m) + 0.5);
  std::vector<std::size_t> label(m);
  std::size_t next_cluster = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (j < n_correct) {
      label[j] = 0;
    } else if (j == n_correct || rng.below(2) == 0) {
      label[j] = next_cluster++;
    } else {
      label[j] = next_cluster - 1;
    }
  }
  for (std::size_t j = m; j > 1; --j) std::swap(label[j - 1], label[rng.below(j)]);

  PlantedQuestion q;
  q.w = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    q.accuracy.push_back(label[a] == 0 ? 1.0 : 0.0);
    for (std::size_t b = a + 1; b < m; ++b) {
      const double base = label[a] == label[b] ? within : across;
      const double v = std::clamp(base + rng.uniform(-jitter, jitter), 0.0, 1.0);
      q.w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      q.w(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return q;
}

Matrix random_similarity(Rng& rng, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  Matrix w = Matrix::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      w(a, b) = w(b, a) = rng.uniform();
    }
  }
  return w;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("specuq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

void write_corpus(const std::filesystem::path& path, const std::vector<ResponseSet>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write_dataset(out, records);
}

}  // namespace specuq::testing
