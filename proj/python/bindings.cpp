#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "specuq/cli.hpp"
#include "specuq/error.hpp"
#include "specuq/eval.hpp"
#include "specuq/ingest.hpp"
#include "specuq/pipeline.hpp"
#include "specuq/semantic_sets.hpp"
#include "specuq/similarity.hpp"
#include "specuq/spectral.hpp"

namespace py = pybind11;
using namespace specuq;

namespace {

py::tuple scores_tuple(const MeasureScores& s) {
  if (s.c) return py::make_tuple(s.u, *s.c);
  return py::make_tuple(s.u, py::none());
}

std::vector<QuestionScores> score_records(const std::vector<ResponseSet>& records,
                                          const std::vector<std::string>& measures, double temperature,
                                          double ecc_threshold, std::optional<std::filesystem::path> cache_dir,
                                          const std::string& nli_url, std::size_t workers) {
  std::vector<MeasureSpec> specs;
  bool nli = false;
  for (const auto& name : measures) {
    specs.push_back(MeasureSpec::parse(name));
    nli = nli || specs.back().needs_nli();
  }
  HyperTable table;
  table.defaults = {temperature, ecc_threshold};
  if (!nli) {
    const auto prepared = prepare_dataset(records, 0, nullptr, workers);
    return score_dataset(prepared, specs, table, workers);
  }
  NliCache cache = cache_dir ? NliCache(NliCache::file_in(*cache_dir)) : NliCache();
  std::shared_ptr<NliBackend> backend;
  if (!nli_url.empty()) backend = std::make_shared<HttpNliBackend>(nli_url, HttpBackendOptions{});
  NliClient client(cache, backend);
  std::vector<QuestionScores> out;
  try {
    const auto prepared = prepare_dataset(records, 0, &client, workers);
    out = score_dataset(prepared, specs, table, workers);
  } catch (...) {
    cache.flush();
    throw;
  }
  cache.flush();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral uncertainty and confidence measures for sampled LLM responses";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  static py::exception<EndpointError> endpoint(m, "EndpointError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const EndpointError& e) {
      py::set_error(endpoint, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<ResponseSet>(m, "ResponseSet")
      .def(py::init([](std::string question_id, std::string question, std::vector<std::string> responses,
                       std::optional<std::vector<double>> accuracy, std::optional<std::string> reference) {
             ResponseSet r{std::move(question_id), std::move(question), std::move(reference),
                           std::move(responses), std::move(accuracy)};
             validate_record(r);
             return r;
           }),
           py::arg("question_id"), py::arg("question"), py::arg("responses"), py::arg("accuracy") = py::none(),
           py::arg("reference_answer") = py::none())
      .def_readwrite("question_id", &ResponseSet::question_id)
      .def_readwrite("question", &ResponseSet::question)
      .def_readwrite("reference_answer", &ResponseSet::reference_answer)
      .def_readwrite("responses", &ResponseSet::responses)
      .def_readwrite("accuracy", &ResponseSet::accuracy)
      .def("__len__", &ResponseSet::size)
      .def("__repr__", [](const ResponseSet& r) { return "<ResponseSet " + r.question_id + ">"; });

  m.def("load_dataset", [](const std::filesystem::path& path) { return load_dataset(path); }, py::arg("path"));
  m.def("read_dataset", [](const std::string& text) {
    std::istringstream in(text);
    return read_dataset(in);
  });

  m.def("tokenize", &tokenize);
  m.def("jaccard", &jaccard_similarity, py::arg("a"), py::arg("b"));
  m.def("rouge_l", py::overload_cast<std::string_view, std::string_view>(&rouge_l), py::arg("a"), py::arg("b"));

  m.def(
      "to_probabilities",
      [](double entail, double neutral, double contra, double temperature) {
        const auto p = to_probabilities({entail, neutral, contra}, temperature);
        return py::make_tuple(p.p_entail, p.p_neutral, p.p_contra);
      },
      py::arg("entail"), py::arg("neutral"), py::arg("contra"), py::arg("temperature") = 1.0);

  m.def(
      "similarity_matrix",
      [](const ResponseSet& record, const std::string& kernel) {
        return lexical_similarity_matrix(record, parse_kernel(kernel)).w();
      },
      py::arg("record"), py::arg("kernel") = "jaccard", "Symmetric W for a lexical kernel");
  m.def(
      "symmetrize",
      [](Matrix a) { return SimilarityMatrix::from_directed(std::move(a), Kernel::nli_entail).w(); },
      py::arg("a"));

  m.def(
      "laplacian",
      [](const Matrix& w) {
        auto l = laplacian(w);
        return py::make_tuple(l.l, l.degrees);
      },
      py::arg("w"));
  m.def(
      "eigen_decompose",
      [](const Matrix& w) {
        const auto s = eigen_decompose(laplacian(w));
        return py::make_tuple(s.eigenvalues, s.eigenvectors);
      },
      py::arg("w"), "Ascending eigenpairs of the normalized Laplacian of W");
  m.def("u_eigv", [](const Matrix& w) { return u_eigv(eigen_decompose(laplacian(w))).u; }, py::arg("w"));
  m.def("deg", [](const Matrix& w) { return scores_tuple(deg_scores(laplacian(w))); }, py::arg("w"));
  m.def(
      "ecc_embed",
      [](const Matrix& w, double threshold) { return ecc_embed(eigen_decompose(laplacian(w)), threshold); },
      py::arg("w"), py::arg("threshold") = 0.9);
  m.def(
      "ecc",
      [](const Matrix& w, double threshold) {
        return scores_tuple(ecc_scores(ecc_embed(eigen_decompose(laplacian(w)), threshold)));
      },
      py::arg("w"), py::arg("threshold") = 0.9);
  m.def("lexi_sim", py::overload_cast<const ResponseSet&>(&lexi_sim_uncertainty), py::arg("record"));

  m.def(
      "partition",
      [](std::size_t n, const std::function<bool(std::size_t, std::size_t)>& merge) {
        return partition_by_merge_rule(n, merge).assignment;
      },
      py::arg("n"), py::arg("merge"), "Semantic set ids from a pairwise merge predicate");

  m.def("auroc", [](std::vector<double> scores, std::vector<int> labels) { return auroc(scores, labels); },
        py::arg("scores"), py::arg("labels"));
  m.def("auarc", [](std::vector<double> p, std::vector<double> t) { return auarc(p, t); }, py::arg("predictor"),
        py::arg("targets"));
  m.def(
      "arc_points",
      [](std::vector<double> p, std::vector<double> t) {
        std::vector<std::pair<double, double>> out;
        for (const auto& a : arc_points(p, t)) out.emplace_back(a.keep_fraction, a.mean_target);
        return out;
      },
      py::arg("predictor"), py::arg("targets"));
  m.def("pick_best", [](std::vector<double> c, std::vector<double> a) { return pick_best(c, a); },
        py::arg("confidence"), py::arg("accuracy"));

  m.def(
      "score",
      [](const std::vector<ResponseSet>& records, const std::vector<std::string>& measures, double temperature,
         double ecc_threshold, std::optional<std::filesystem::path> cache_dir, const std::string& nli_url,
         std::size_t workers) {
        py::list out;
        for (const auto& q : score_records(records, measures, temperature, ecc_threshold, cache_dir, nli_url,
                                           workers)) {
          py::dict row;
          for (const auto& s : q.scores) {
            row[py::str(s.measure)] = scores_tuple({Method::deg, s.u, s.c});
          }
          out.append(py::make_tuple(q.question_id, row));
        }
        return out;
      },
      py::arg("records"), py::arg("measures"), py::arg("temperature") = 1.0, py::arg("ecc_threshold") = 0.9,
      py::arg("cache_dir") = py::none(), py::arg("nli_url") = "", py::arg("workers") = 1,
      "List of (question_id, {measure: (U, C or None)})");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process: (exit code, stdout, stderr)");

#ifdef SPECUQ_VERSION
  m.attr("__version__") = SPECUQ_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
