#include "specuq/pipeline.hpp"

#include "specuq/error.hpp"
#include "specuq/parallel.hpp"
#include "specuq/semantic_sets.hpp"

namespace specuq {

std::string MeasureSpec::name() const {
  std::string out(method_name(method));
  if (kernel) {
    out += '(';
    out += kernel_suffix(*kernel);
    out += ')';
  }
  return out;
}

MeasureSpec MeasureSpec::parse(std::string_view name) {
  if (name == "NumSet") return {Method::num_set, std::nullopt};
  if (name == "LexiSim") return {Method::lexi_sim, std::nullopt};
  const auto open = name.find('(');
  if (open == std::string_view::npos || name.size() != open + 3 || name.back() != ')') {
    throw ValidationError("unknown measure \"" + std::string(name) + "\"");
  }
  const auto base = name.substr(0, open);
  MeasureSpec spec;
  if (base == "EigV") spec.method = Method::eig_v;
  else if (base == "Deg") spec.method = Method::deg;
  else if (base == "Ecc") spec.method = Method::ecc;
  else throw ValidationError("unknown measure \"" + std::string(name) + "\"");
  spec.kernel = parse_kernel(name.substr(open + 1, 1));
  return spec;
}

std::vector<MeasureSpec> default_measures(std::span<const Kernel> kernels) {
  std::vector<MeasureSpec> out;
  bool any_nli = false;
  for (Kernel k : kernels) {
    for (Method m : {Method::eig_v, Method::ecc, Method::deg}) out.push_back({m, k});
    any_nli = any_nli || is_nli(k);
  }
  out.push_back({Method::lexi_sim, std::nullopt});
  if (any_nli) out.push_back({Method::num_set, std::nullopt});
  return out;
}

std::vector<std::string> measure_names(std::span<const MeasureSpec> measures) {
  std::vector<std::string> names;
  names.reserve(measures.size());
  for (const auto& m : measures) names.push_back(m.name());
  return names;
}

PreparedQuestion prepare_question(const ResponseSet& record, std::size_t num_generations,
                                  PairClassifier* classifier) {
  PreparedQuestion q;
  q.record = num_generations == 0 ? record : truncate_responses(record, num_generations);
  validate_record(q.record);
  q.dedup = dedup_pairs(q.record.responses);
  if (classifier != nullptr) q.logits = fetch_pair_logits(q.record, q.dedup, *classifier);
  return q;
}

std::vector<PreparedQuestion> prepare_dataset(std::span<const ResponseSet> records, std::size_t num_generations,
                                              PairClassifier* classifier, std::size_t workers) {
  std::vector<PreparedQuestion> out(records.size());
  parallel_for(records.size(), workers,
               [&](std::size_t i) { out[i] = prepare_question(records[i], num_generations, classifier); });
  return out;
}

SimilarityMatrix similarity_for(const PreparedQuestion& question, Kernel kernel, double temperature) {
  if (!is_nli(kernel)) return lexical_similarity_matrix(question.record, kernel);
  if (!question.logits) {
    throw ValidationError("question " + question.record.question_id + " has no NLI logits for " +
                          std::string(kernel_name(kernel)));
  }
  return nli_similarity_matrix(*question.logits, kernel, temperature);
}

SpectralState spectral_state(const SimilarityMatrix& similarity) {
  SpectralState state{laplacian(similarity.w()), {}};
  state.spectrum = eigen_decompose(state.laplacian);
  return state;
}

MeasureScores spectral_measure(const SpectralState& state, Method method, const Hyperparameters& hyper) {
  switch (method) {
    case Method::eig_v: return u_eigv(state.spectrum);
    case Method::deg: return deg_scores(state.laplacian);
    case Method::ecc: return ecc_scores(ecc_embed(state.spectrum, hyper.ecc_threshold));
    default: throw ValidationError("not a spectral measure: " + std::string(method_name(method)));
  }
}

namespace {

SemanticPartition partition_of(const PreparedQuestion& question) {
  if (!question.logits) {
    throw ValidationError("question " + question.record.question_id + " has no NLI logits for NumSet");
  }
  return cluster_semantic_sets(*question.logits, 1.0);
}

}  // namespace

MeasureScores score_measure(const PreparedQuestion& question, const MeasureSpec& measure,
                            const Hyperparameters& hyper) {
  switch (measure.method) {
    case Method::num_set: return {Method::num_set, num_set_uncertainty(partition_of(question)), std::nullopt};
    case Method::lexi_sim:
      return {Method::lexi_sim,
              lexi_sim_uncertainty(lexical_similarity_matrix(question.record, Kernel::rouge_l).a()),
              std::nullopt};
    default: break;
  }
  if (!measure.kernel) throw ValidationError(measure.name() + " needs a similarity kernel");
  const auto state = spectral_state(similarity_for(question, *measure.kernel, hyper.temperature));
  return spectral_measure(state, measure.method, hyper);
}

QuestionScores score_question(const PreparedQuestion& question, std::span<const MeasureSpec> measures,
                              const HyperTable& hyper) {
  QuestionScores out;
  out.question_id = question.record.question_id;
  out.accuracy = question.record.accuracy;

  struct Memo {
    Kernel kernel;
    double temperature;
    SpectralState state;
  };
  std::vector<Memo> memo;
  auto state_for = [&](Kernel kernel, double temperature) -> const SpectralState& {
    const double t = is_nli(kernel) ? temperature : 0.0;
    for (const auto& entry : memo) {
      if (entry.kernel == kernel && entry.temperature == t) return entry.state;
    }
    memo.push_back({kernel, t, spectral_state(similarity_for(question, kernel, temperature))});
    return memo.back().state;
  };

  for (const auto& measure : measures) {
    const Hyperparameters h = hyper.lookup(measure);
    auto s = [&]() -> MeasureScores {
      if (measure.method == Method::num_set) {
        out.partition = partition_of(question);
        return {Method::num_set, num_set_uncertainty(*out.partition), std::nullopt};
      }
      if (measure.method == Method::lexi_sim || !measure.kernel) return score_measure(question, measure, h);
      return spectral_measure(state_for(*measure.kernel, h.temperature), measure.method, h);
    }();
    out.scores.push_back({measure.name(), s.u, std::move(s.c)});
  }
  return out;
}

std::vector<QuestionScores> score_dataset(std::span<const PreparedQuestion* const> questions,
                                          std::span<const MeasureSpec> measures, const HyperTable& hyper,
                                          std::size_t workers) {
  std::vector<QuestionScores> out(questions.size());
  parallel_for(questions.size(), workers,
               [&](std::size_t i) { out[i] = score_question(*questions[i], measures, hyper); });
  return out;
}

std::vector<QuestionScores> score_dataset(std::span<const PreparedQuestion> questions,
                                          std::span<const MeasureSpec> measures, const HyperTable& hyper,
                                          std::size_t workers) {
  std::vector<const PreparedQuestion*> ptrs;
  ptrs.reserve(questions.size());
  for (const auto& q : questions) ptrs.push_back(&q);
  return score_dataset(std::span<const PreparedQuestion* const>(ptrs), measures, hyper, workers);
}

}  // namespace specuq
