#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ses/census.hpp"
#include "ses/cli.hpp"
#include "ses/corpus.hpp"
#include "ses/eval.hpp"
#include "ses/homeloc.hpp"
#include "ses/occupation.hpp"
#include "ses/semantics.hpp"

namespace py = pybind11;
using namespace ses;

namespace {

// similarity matrix passed as a nested list; returns word -> 1-based topic id
std::map<std::string, int> cluster_topics(const std::vector<std::vector<double>>& similarity,
                                          const std::vector<std::string>& words, std::size_t k,
                                          std::uint64_t seed) {
  Mat m(similarity.size(), similarity.empty() ? 0 : similarity[0].size());
  for (std::size_t i = 0; i < similarity.size(); ++i)
    for (std::size_t j = 0; j < similarity[i].size(); ++j) m.at(i, j) = similarity[i][j];
  semantics::SpectralParams params;
  params.k = k;
  params.seed = seed;
  const auto model = semantics::spectral_cluster(m, words, params);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < words.size(); ++i) out[words[i]] = model.topic_of_word[i] + 1;
  return out;
}

int run_stage(const std::string& stage, const std::string& config_path,
              const std::vector<std::string>& overrides) {
  const auto config = cli::load_config(config_path, overrides, std::nullopt);
  std::ostringstream log;
  const int code = cli::run_checked(stage, config, log);
  if (code != 0) py::print(log.str());
  return code;
}

}  // namespace

PYBIND11_MODULE(sesinfer, m) {
  m.doc() = "socioeconomic status inference pipeline (C++ core bindings)";

  m.def("clean_text", &corpus::clean_text, py::arg("raw"),
        "strip urls/mentions/hashtags/emoticons, lowercase, drop punctuation");
  m.def("tokenize", &corpus::tokenize, py::arg("cleaned"));

  m.def(
      "haversine_km",
      [](double lat1, double lon1, double lat2, double lon2) {
        return homeloc::haversine_km({lat1, lon1}, {lat2, lon2});
      },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));

  m.def("gini", &census::gini, py::arg("incomes"));
  m.def("lorenz_curve", &census::lorenz_curve, py::arg("incomes"));

  m.def("seq_similarity", &occupation::seq_similarity, py::arg("a"), py::arg("b"));

  m.def("auc", &eval::auc, py::arg("scores"), py::arg("labels"));
  m.def(
      "agreement",
      [](const std::vector<int>& a, const std::vector<int>& b) {
        const auto s = eval::agreement(a, b);
        return py::make_tuple(s.percent_agreement, s.kappa);
      },
      py::arg("a"), py::arg("b"), "returns (percent_agreement, kappa)");

  m.def("cluster_topics", &cluster_topics, py::arg("similarity"), py::arg("words"), py::arg("k"),
        py::arg("seed") = 0, "spectral clustering on a word similarity matrix");

  m.def("run_stage", &run_stage, py::arg("stage"), py::arg("config_path"),
        py::arg("overrides") = std::vector<std::string>{},
        "run one pipeline stage; returns the process-style exit code");
}
