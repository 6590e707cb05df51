// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "specrec/analysis.hpp"
#include "specrec/config.hpp"
#include "specrec/dataset.hpp"
#include "specrec/embedding.hpp"
#include "specrec/errors.hpp"
#include "specrec/evaluate.hpp"
#include "specrec/glpf.hpp"
#include "specrec/graph.hpp"
#include "specrec/spectral.hpp"
#include "specrec/tfm.hpp"

namespace py = pybind11;
using namespace specrec;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InputError("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Phase parse_phase(const std::string& s) {
  if (s == "valid") return Phase::kValid;
  if (s == "test") return Phase::kTest;
  throw InputError("phase must be 'valid' or 'test'");
}

}  // namespace

PYBIND11_MODULE(_specrec, m) {
  m.doc() = "Graph and temporal low-pass filtering for sequential recommendation";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<SplitDataset>(m, "SplitDataset")
      .def_property_readonly("n_users", &SplitDataset::n_users)
      .def_property_readonly("n_items", &SplitDataset::n_items)
      .def_property_readonly("item_tokens", &SplitDataset::item_tokens)
      .def("train", [](const SplitDataset& s, std::size_t u) {
        const auto t = s.train(u);
        return std::vector<std::size_t>(t.begin(), t.end());
      })
      .def("target", [](const SplitDataset& s, std::size_t u, const std::string& phase) {
        return s.target(u, parse_phase(phase));
      })
      .def("summary", [](const SplitDataset& s) { return to_py(s.summary_json()); })
      .def("fingerprint", &SplitDataset::fingerprint);

  m.def("synthesize_log", [](const std::filesystem::path& out, std::size_t users, std::size_t items, double mean_length,
                             double rho, std::uint64_t seed) {
        SynthConfig c{users, items, mean_length, rho, seed, true};
        write_log_tsv(synthesize(c).log, out);
      },
      py::arg("out"), py::arg("users") = 200, py::arg("items") = 100, py::arg("mean_length") = 20.0,
      py::arg("rho") = 0.5, py::arg("seed") = 1, "Write a locality-synthetic interaction log as TSV.");

  m.def("load_split", [](const std::filesystem::path& log, const std::string& format, std::size_t min_interactions,
                         std::size_t max_seq_len) {
        return build_split(ingest(log, parse_log_format(format)), min_interactions, max_seq_len);
      },
      py::arg("log"), py::arg("format") = "tsv", py::arg("min_interactions") = 5, py::arg("max_seq_len") = 50,
      "Ingest a log, apply the k-core filter and split leave-one-out.");

  m.def("split_from_sequences", [](std::vector<std::vector<std::size_t>> seqs, std::size_t n_items) {
        return SplitDataset::from_sequences(std::move(seqs), n_items);
      },
      py::arg("sequences"), py::arg("n_items"));

  py::class_<CooccurrenceGraph>(m, "CooccurrenceGraph")
      .def_property_readonly("n_items", &CooccurrenceGraph::n_items)
      .def_property_readonly("nnz", &CooccurrenceGraph::nnz)
      .def_property_readonly("degrees", &CooccurrenceGraph::degrees)
      .def("dense_adjacency", [](const CooccurrenceGraph& g) { return to_array(g.dense_adjacency()); })
      .def("dense_laplacian", [](const CooccurrenceGraph& g) { return to_array(g.dense_laplacian()); })
      .def("apply_laplacian", [](const CooccurrenceGraph& g, const Array& e) {
        return to_array(g.apply_laplacian(to_matrix(e)));
      });

  m.def("build_cooccurrence", &build_cooccurrence, py::arg("split"), py::arg("binarize") = true);
  m.def("graph_from_adjacency", [](const Array& w) { return CooccurrenceGraph::from_dense(to_matrix(w)); });

  m.def("polynomial_filter", [](const CooccurrenceGraph& g, std::vector<double> theta, const Array& e,
                                std::size_t workers) {
        return to_array(polynomial_filter(g, PolyFilterSpec{std::move(theta)}, to_matrix(e), workers));
      },
      py::arg("graph"), py::arg("theta"), py::arg("embeddings"), py::arg("workers") = 1,
      "Apply sum_k theta_k L^k to the rows of an embedding table.");

  m.def("glpf", [](const CooccurrenceGraph& g, double alpha, const Array& e) {
        return to_array(polynomial_filter(g, PolyFilterSpec::first_order(alpha), to_matrix(e)));
      },
      py::arg("graph"), py::arg("alpha"), py::arg("embeddings"), "First-order filter (I - alpha L) E.");

  m.def("spectral_oracle_filter", [](const CooccurrenceGraph& g, const std::function<double(double)>& h,
                                     const Array& e) {
        return to_array(spectral_oracle_filter(g, [&](double lam, std::size_t, std::size_t) { return h(lam); },
                                               to_matrix(e)));
      },
      py::arg("graph"), py::arg("response"), py::arg("embeddings"));

  m.def("spectral_basis", [](const Array& l) {
        const auto b = spectral_basis(to_matrix(l));
        return py::make_tuple(b.eigenvalues, to_array(b.eigenvectors));
      },
      py::arg("laplacian"), "Ascending eigenvalues and orthonormal eigenvectors.");

  m.def("ring_graph_basis", [](std::size_t t) {
        const auto b = ring_graph_basis(t);
        return py::make_tuple(b.eigenvalues, to_array(b.eigenvectors));
      },
      py::arg("t"));

  m.def("butterworth_gains", [](double cutoff, int order, std::size_t t) {
        return butterworth_gains({cutoff, order}, t);
      },
      py::arg("cutoff"), py::arg("order"), py::arg("t"));

  m.def("tfm_apply", [](const Array& h, double cutoff, int order) {
        return to_array(tfm_apply(to_matrix(h), {cutoff, order}));
      },
      py::arg("hidden"), py::arg("cutoff") = 0.3, py::arg("order") = 2,
      "Zero-phase Butterworth low-pass along the rows of a T x d matrix.");

  m.def("rayleigh_quotient", [](const Array& l, const Array& f) {
        return rayleigh_quotient(to_matrix(l), to_matrix(f));
      });

  m.def("rank_metrics", [](std::vector<double> scores, std::size_t truth_index, std::size_t k) {
        const auto r = rank_metrics(scores, truth_index, k);
        return py::make_tuple(r.rank, r.ndcg, r.recall);
      },
      py::arg("scores"), py::arg("truth_index"), py::arg("k") = 10, "Returns (rank, ndcg, recall).");

  m.def("evaluate_baseline", [](const SplitDataset& split, const std::string& which, const std::string& phase,
                                std::uint64_t seed) {
        EvalConfig c;
        c.seed = seed;
        Scorer s;
        if (which == "random") {
          s = random_scorer(seed);
        } else if (which == "popularity") {
          s = popularity_scorer(split);
        } else {
          throw InputError("baseline must be 'random' or 'popularity'");
        }
        return to_py(evaluate(split, parse_phase(phase), s, c, which).to_json());
      },
      py::arg("split"), py::arg("baseline") = "random", py::arg("phase") = "test", py::arg("seed") = 2024);

  m.def("theorem_probe", [](const std::string& family, double rho, std::size_t trials, std::uint64_t seed,
                            double cutoff, int order) {
        ProbeConfig c;
        c.family = parse_graph_family(family);
        c.rho = rho;
        c.trials = trials;
        c.seed = seed;
        c.filter = {cutoff, order};
        return to_py(smoothing_probe(c).to_json());
      },
      py::arg("family") = "locality", py::arg("rho") = 0.5, py::arg("trials") = 1000, py::arg("seed") = 1,
      py::arg("cutoff") = 0.3, py::arg("order") = 2);

  m.def("default_config", [] { return to_py(RunConfig::defaults()); });
  m.def("config_hash", [](const py::object& overrides) { return RunConfig::from_json(from_py(overrides)).hash(); },
        py::arg("overrides") = py::dict());
}
