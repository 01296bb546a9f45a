// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "specuq/calibrate.hpp"
#include "specuq/cli.hpp"
#include "specuq/eval.hpp"
#include "specuq/semantic_sets.hpp"
#include "specuq/spectral.hpp"
#include "stub_nli.hpp"

using namespace specuq;
namespace st = specuq::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Clique blocks: zero eigenvalue multiplicity and EigV equal the block count.
Outcome clique_blocks() {
  std::size_t cases = 0;
  for (int m = 1; m <= 7; ++m) {
    for (unsigned cuts = 0; cuts < (1u << (m - 1)); ++cuts) {
      std::vector<int> sizes{1};
      for (int i = 0; i < m - 1; ++i) {
        if (cuts >> i & 1) sizes.push_back(1);
        else ++sizes.back();
      }
      Matrix w = Matrix::Zero(m, m);
      int at = 0;
      for (int s : sizes) {
        w.block(at, at, s, s).setOnes();
        at += s;
      }
      const auto spectrum = eigen_decompose(laplacian(w));
      const auto zeros = (spectrum.eigenvalues.array() <= 1e-8).count();
      const double u = u_eigv(spectrum).u;
      const auto blocks = static_cast<double>(sizes.size());
      if (zeros != static_cast<Eigen::Index>(sizes.size())) return fail("zero multiplicity mismatch at m=" + std::to_string(m));
      if (std::abs(u - blocks) > 1e-6) return fail("U_EigV off by " + fmt("%.3g", u - blocks));
      ++cases;
    }
  }
  return {true, std::to_string(cases) + " compositions"};
}

// 2. Jacobi eigenpairs on random similarity graphs.
Outcome eigensolver() {
  Rng rng(20240101);
  double worst_residual = 0;
  double worst_ortho = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = 2 + rng.below(19);
    const auto l = laplacian(st::random_similarity(rng, m));
    const auto raw = jacobi_eigen(l.l);
    if (raw.eigenvalues.minCoeff() < -1e-9 || raw.eigenvalues.maxCoeff() > 2 + 1e-9) {
      return fail("eigenvalue outside [0,2] before clamping");
    }
    const auto s = eigen_decompose(l);
    const double tol = 1e-8 * static_cast<double>(m);
    for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
      const double r = (l.l * s.eigenvectors.col(k) - s.eigenvalues[k] * s.eigenvectors.col(k)).norm();
      worst_residual = std::max(worst_residual, r / static_cast<double>(m));
      if (r > tol) return fail("residual " + fmt("%.3g", r));
    }
    const Matrix gram = s.eigenvectors.transpose() * s.eigenvectors;
    const double ortho = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    worst_ortho = std::max(worst_ortho, ortho);
    if (ortho > 1e-8) return fail("orthonormality " + fmt("%.3g", ortho));
    if (s.eigenvalues.minCoeff() < -1e-9 || s.eigenvalues.maxCoeff() > 2 + 1e-9) return fail("range");
  }
  return {true, "max residual/m " + fmt("%.2g", worst_residual) + ", max ortho " + fmt("%.2g", worst_ortho)};
}

// 3. Rank AUROC against the pairwise definition, every instance N <= 8.
Outcome auroc_oracle() {
  const double grid[4] = {0.0, 0.25, 0.5, 1.0};
  std::size_t instances = 0;
  double worst = 0;
  std::vector<double> scores;
  std::vector<int> labels;
  for (int n = 2; n <= 8; ++n) {
    scores.assign(n, 0);
    labels.assign(n, 0);
    std::size_t score_codes = 1;
    for (int i = 0; i < n; ++i) score_codes *= 4;
    for (std::size_t code = 0; code < score_codes; ++code) {
      std::size_t c = code;
      for (int i = 0; i < n; ++i, c /= 4) scores[i] = grid[c % 4];
      for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(mask >> i & 1);
        double wins = 0;
        double pairs = 0;
        for (int a = 0; a < n; ++a) {
          if (!labels[a]) continue;
          for (int b = 0; b < n; ++b) {
            if (labels[b]) continue;
            pairs += 1;
            wins += scores[a] > scores[b] ? 1.0 : (scores[a] == scores[b] ? 0.5 : 0.0);
          }
        }
        const double err = std::abs(auroc(scores, labels) - wins / pairs);
        worst = std::max(worst, err);
        if (err > 1e-12) return fail("N=" + std::to_string(n) + " off by " + fmt("%.3g", err));
        ++instances;
      }
    }
  }
  return {true, std::to_string(instances) + " instances, max error " + fmt("%.2g", worst)};
}

// 4. Oracle maximality, random predictor near base accuracy, all-ones targets.
Outcome auarc_laws() {
  std::size_t checked = 0;
  for (int n = 1; n <= 7; ++n) {
    std::size_t codes = 1;
    for (int i = 0; i < n; ++i) codes *= 3;
    std::vector<double> target(n);
    std::vector<double> pred(n);
    std::vector<int> perm(n);
    for (std::size_t code = 0; code < codes; ++code) {
      std::size_t c = code;
      for (int i = 0; i < n; ++i, c /= 3) target[i] = 0.5 * static_cast<double>(c % 3);
      const double best = auarc(target, target);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        for (int i = 0; i < n; ++i) pred[i] = static_cast<double>(perm[i]);
        if (auarc(pred, target) > best + 1e-15) return fail("predictor beats the oracle at N=" + std::to_string(n));
        ++checked;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 4);
    const double p = rng.uniform(0.2, 0.8);
    std::vector<double> target(10000), pred(10000);
    for (std::size_t i = 0; i < target.size(); ++i) {
      target[i] = rng.uniform() < p ? 1.0 : 0.0;
      pred[i] = rng.uniform();
    }
    const double base = std::accumulate(target.begin(), target.end(), 0.0) / 10000.0;
    const double gap = std::abs(auarc(pred, target) - base);
    worst = std::max(worst, gap);
    if (gap > 0.02) return fail("random predictor gap " + fmt("%.4f", gap));
    const std::vector<double> ones(10000, 1.0);
    if (auarc(pred, ones) != 1.0) return fail("all-ones targets did not give exactly 1");
  }
  return {true, std::to_string(checked) + " oracle comparisons, max random gap " + fmt("%.4f", worst)};
}

// 5. U_Deg equals one minus the mean similarity.
Outcome deg_identity() {
  Rng rng(5150);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t m = 2 + rng.below(29);
    const auto w = st::random_similarity(rng, m);
    double total = 0;
    for (Eigen::Index a = 0; a < w.rows(); ++a) {
      for (Eigen::Index b = 0; b < w.cols(); ++b) total += w(a, b);
    }
    const double expected = 1.0 - total / static_cast<double>(m * m);
    const double err = std::abs(deg_scores(laplacian(w)).u - expected);
    worst = std::max(worst, err);
    if (err > 1e-12) return fail("off by " + fmt("%.3g", err));
  }
  return {true, "max error " + fmt("%.2g", worst)};
}

// 6. Planted correct cluster: C_Deg separates correct from wrong responses.
Outcome synthetic_end_to_end() {
  double min_auroc = 1.0;
  double min_lift = 1.0;
  const std::vector<std::string> names{"Deg"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 6);
    std::vector<QuestionScores> scored(500);
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto q = st::planted_question(rng, 10);
      const auto d = deg_scores(laplacian(q.w));
      scored[i].question_id = "s" + std::to_string(i);
      scored[i].accuracy = q.accuracy;
      scored[i].scores.push_back({"Deg", d.u, d.c});
    }
    const auto report = evaluate(scored, EvalSetting::c_ia(), names);
    const auto& row = report.measures.front();
    if (!row.auroc) return fail("AUROC undefined");
    min_auroc = std::min(min_auroc, *row.auroc);
    min_lift = std::min(min_lift, row.auarc - report.base_accuracy);
    if (*row.auroc < 0.95) return fail("seed " + std::to_string(seed) + " AUROC " + fmt("%.4f", *row.auroc));
    if (!(row.auarc > report.base_accuracy + 0.05)) return fail("seed " + std::to_string(seed) + " AUARC lift too small");
  }
  return {true, "min AUROC " + fmt("%.4f", min_auroc) + ", min AUARC lift " + fmt("%.4f", min_lift)};
}

// 7. Union-find partition against BFS components.
Outcome numset_oracle() {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + rng.below(6);
    const double density = rng.uniform();
    std::vector<std::vector<bool>> edge(m, std::vector<bool>(m, false));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) edge[a][b] = edge[b][a] = rng.uniform() < density;
    }
    const auto p = partition_by_merge_rule(m, [&](std::size_t a, std::size_t b) { return bool(edge[a][b]); });
    std::vector<long> comp(m, -1);
    long next = 0;
    for (std::size_t s = 0; s < m; ++s) {
      if (comp[s] >= 0) continue;
      std::queue<std::size_t> q;
      q.push(s);
      comp[s] = next;
      while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (std::size_t v = 0; v < m; ++v) {
          if (edge[u][v] && comp[v] < 0) {
            comp[v] = next;
            q.push(v);
          }
        }
      }
      ++next;
    }
    if (p.num_sets != static_cast<std::size_t>(next)) return fail("set count mismatch");
    for (std::size_t j = 0; j < m; ++j) {
      if (p.assignment[j] != static_cast<std::size_t>(comp[j])) return fail("assignment mismatch");
    }
  }
  return {true, "1000 predicates"};
}

// 8. 20 distinct responses cost 380 endpoint calls once, then none.
Outcome dedup_economy() {
  st::StubNliServer server;
  st::TempDir dir;
  std::vector<std::string> responses;
  for (int i = 0; i < 20; ++i) responses.push_back("response number " + std::to_string(i));
  const auto record = st::make_record("q", responses);
  auto backend = std::make_shared<HttpNliBackend>(server.url());
  {
    NliCache cache(NliCache::file_in(dir.path()));
    NliClient client(cache, backend);
    prepare_question(record, 0, &client);
    cache.flush();
  }
  const auto first = server.calls();
  {
    NliCache cache(NliCache::file_in(dir.path()));
    NliClient client(cache, backend);
    prepare_question(record, 0, &client);
  }
  const auto second = server.calls() - first;
  if (first != 380 || second != 0) {
    return fail("calls " + std::to_string(first) + " then " + std::to_string(second));
  }
  return {true, "380 calls, rerun 0"};
}

// 9. Two score+evaluate runs over a warm cache write identical bytes.
Outcome determinism() {
  st::TempDir dir;
  st::write_corpus(dir / "data.jsonl", st::text_corpus(40, 6, 2024));
  st::StubNliServer server;
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  const std::string data = (dir / "data.jsonl").string();
  const std::string cache = (dir / "cache").string();
  if (cli({"cache-nli", "--dataset", data, "--nli-url", server.url(), "--cache-dir", cache}) != 0) {
    return fail("cache-nli failed: " + sink.str());
  }
  const std::vector<std::string> files{"scores.csv", "embeddings.csv", "report.csv", "arc_u_ea.csv",
                                       "arc_c_ia.csv", "arc_u_ia.csv", "pick_best.csv"};
  std::vector<std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    const std::string out = (dir / ("run" + std::to_string(r))).string();
    const std::string workers = r == 0 ? "1" : "4";
    const std::vector<std::string> common{"--dataset", data, "--measure", "jaccard", "--measure", "nli_entail",
                                          "--measure", "nli_contra", "--cache-dir", cache, "--seed", "3",
                                          "--workers", workers, "--out-dir", out};
    auto score = common;
    score.insert(score.begin(), "score");
    score.push_back("--export-embeddings");
    auto evaluate_args = common;
    evaluate_args.insert(evaluate_args.begin(), "evaluate");
    if (cli(score) != 0 || cli(evaluate_args) != 0) return fail("run failed: " + sink.str());
    for (const auto& f : files) runs[r].push_back(st::read_file(out + "/" + f));
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (runs[0][i] != runs[1][i]) return fail(files[i] + " differs");
  }
  if (server.calls() == 0) return fail("cache was never filled");
  return {true, std::to_string(files.size()) + " files identical"};
}

// 10. The grid-search objective only ever sees calibration questions.
Outcome calibration_hygiene() {
  auto backend = std::make_shared<st::CountingBackend>();
  NliCache cache;
  NliClient client(cache, backend);
  const auto dataset = prepare_dataset(st::text_corpus(80, 5, 10), 0, &client, 1);
  const std::vector<Kernel> kernels{Kernel::jaccard, Kernel::nli_entail, Kernel::nli_contra};
  const auto measures = default_measures(kernels);
  struct Call {
    std::uint64_t set;
    std::vector<std::string> ids;
  };
  std::vector<Call> calls;
  const auto inner = make_objective(HyperGrid{}, {});
  const ObjectiveFn spy = [&](const CalibrationSet& c, const MeasureSpec& m, const Hyperparameters& h) {
    Call call{c.id(), {}};
    for (const auto* q : c.questions()) call.ids.push_back(q->record.question_id);
    calls.push_back(std::move(call));
    return inner(c, m, h);
  };
  TrialOptions options;
  options.trials = 10;
  options.calib_size = 25;
  options.seed = 99;
  const std::size_t endpoint_before = backend->calls();
  const auto summary = run_trials(dataset, measures, HyperGrid{}, options, &spy);
  if (summary.trials.size() != 10) return fail("expected 10 trials");
  if (backend->calls() != endpoint_before) return fail("endpoint touched during calibration");

  std::vector<std::uint64_t> set_ids;
  for (const auto& c : calls) {
    if (set_ids.empty() || set_ids.back() != c.set) set_ids.push_back(c.set);
  }
  if (set_ids.size() != 10) return fail("objective saw " + std::to_string(set_ids.size()) + " calibration sets");
  std::size_t trial = 0;
  std::uint64_t current = calls.front().set;
  for (const auto& c : calls) {
    if (c.set != current) {
      current = c.set;
      ++trial;
    }
    const auto split = split_indices(dataset.size(), options.calib_size, options.seed, trial);
    std::set<std::string> test_ids;
    for (auto i : split.test) test_ids.insert(dataset[i].record.question_id);
    const std::set<std::string> calib_ids(summary.trials[trial].calibration_ids.begin(),
                                          summary.trials[trial].calibration_ids.end());
    for (const auto& id : c.ids) {
      if (test_ids.count(id)) return fail("trial " + std::to_string(trial) + " evaluated test question " + id);
      if (!calib_ids.count(id)) return fail("unknown question " + id);
    }
  }
  return {true, std::to_string(calls.size()) + " objective calls over 10 trials"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"clique block spectra", clique_blocks, 5.0},
      {"eigensolver oracle", eigensolver, 10.0},
      {"auroc oracle", auroc_oracle, 0.0},
      {"auarc laws", auarc_laws, 0.0},
      {"deg identity", deg_identity, 0.0},
      {"synthetic end-to-end", synthetic_end_to_end, 30.0},
      {"numset oracle", numset_oracle, 0.0},
      {"dedup economy", dedup_economy, 0.0},
      {"determinism", determinism, 0.0},
      {"calibration hygiene", calibration_hygiene, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.pass && c.budget_seconds > 0 && seconds >= c.budget_seconds) {
      outcome = fail("took " + fmt("%.2f", seconds) + " s, budget " + fmt("%.0f", c.budget_seconds) + " s");
    }
    failures += !outcome.pass;
    std::printf("%s %2zu %-26s %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", i + 1, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
