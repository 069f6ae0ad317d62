#include "mkkm/cluster.hpp"
#include "mkkm/error.hpp"
#include "mkkm/kernels.hpp"
#include "mkkm/metrics.hpp"
#include "mkkm/relations.hpp"
#include "mkkm/simplex_qp.hpp"
#include "mkkm/spectral.hpp"
#include "mkkm/stats.hpp"
#include "mkkm/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using Eigen::MatrixXd;

namespace {

mkkm::KernelBank to_bank(const std::vector<MatrixXd>& kernels) {
  mkkm::KernelBank bank;
  for (const auto& K : kernels) {
    mkkm::GramMatrix g;
    g.values = K;
    bank.kernels.push_back(std::move(g));
  }
  return bank;
}

py::dict result_dict(const mkkm::KcdResult& r) {
  py::dict d;
  d["labels"] = r.partition.labels;
  d["weights"] = r.weights;
  if (r.representation.size() > 0) d["representation"] = r.representation;
  d["embedding"] = r.embedding.vectors;
  d["objective_trace"] = r.objective_trace;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["warnings"] = r.warnings;
  return d;
}

mkkm::AlternatingOptions alternating(int k, std::uint64_t seed, int max_outer_iters, std::optional<double> epsilon) {
  mkkm::AlternatingOptions o;
  o.k = k;
  o.seed = seed;
  o.max_outer_iters = max_outer_iters;
  o.epsilon = epsilon;
  return o;
}

}  // namespace

PYBIND11_MODULE(kcdmkkm, m) {
  m.doc() = "Multiple kernel k-means with kernel correlation and dissimilarity";
  py::register_exception<mkkm::Error>(m, "Error", PyExc_ValueError);

  // Samples are rows on the Python side, columns in the library.
  m.def(
      "standard_bank",
      [](const MatrixXd& X, bool normalize, bool scale) {
        const mkkm::KernelBank bank = mkkm::standard_bank(X.transpose(), normalize, scale);
        std::vector<MatrixXd> kernels;
        std::vector<std::string> names;
        for (const auto& g : bank.kernels) {
          kernels.push_back(g.values);
          names.push_back(g.spec.label());
        }
        return py::make_tuple(kernels, names);
      },
      py::arg("X"), py::arg("normalize") = true, py::arg("scale") = true,
      "12-kernel bank of an (n, d) sample matrix. Returns (kernels, names).");
  m.def(
      "gaussian_gram", [](const MatrixXd& X, double c) { return mkkm::gaussian_gram(X.transpose(), c).values; },
      py::arg("X"), py::arg("c"));

  m.def(
      "relations",
      [](const std::vector<MatrixXd>& kernels) {
        const auto r = mkkm::compute_relations(to_bank(kernels));
        return py::make_tuple(r.correlation, r.dissimilarity);
      },
      py::arg("kernels"), "Returns (M, D): Frobenius correlation and Manhattan dissimilarity.");

  m.def(
      "top_k_eigs",
      [](const MatrixXd& S, Eigen::Index k) {
        const auto e = mkkm::top_k_eigs(S, k);
        return py::make_tuple(e.values, e.vectors);
      },
      py::arg("S"), py::arg("k"), "Returns (values, vectors) of the k largest eigenpairs.");

  m.def("project_simplex", &mkkm::project_simplex, py::arg("v"));
  m.def(
      "solve_weight_qp", [](const MatrixXd& A) { return mkkm::solve_weight_qp(A); }, py::arg("A"));
  m.def(
      "solve_y_qp",
      [](const MatrixXd& A, const MatrixXd& D, double beta) {
        mkkm::QpProblem p;
        p.quadratic = A;
        p.linear = D;
        p.beta = beta;
        const auto s = mkkm::solve_y_qp(p);
        return py::make_tuple(s.x, s.objective);
      },
      py::arg("A"), py::arg("D"), py::arg("beta"), "Returns (Y, objective).");

  m.def(
      "kmeans",
      [](const MatrixXd& points, int k, std::uint64_t seed) { return mkkm::kmeans(points, k, seed).labels; },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "kkm",
      [](const MatrixXd& K, int k, std::uint64_t seed) {
        mkkm::GramMatrix g;
        g.values = K;
        return mkkm::kkm(g, k, seed).labels;
      },
      py::arg("K"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "a_mkkm",
      [](const std::vector<MatrixXd>& kernels, int k, std::uint64_t seed) {
        return mkkm::a_mkkm(to_bank(kernels), k, seed).labels;
      },
      py::arg("kernels"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "mkkm",
      [](const std::vector<MatrixXd>& kernels, int k, std::uint64_t seed, int max_outer_iters,
         std::optional<double> epsilon) {
        return result_dict(mkkm::mkkm(to_bank(kernels), alternating(k, seed, max_outer_iters, epsilon)));
      },
      py::arg("kernels"), py::arg("k"), py::arg("seed") = 0, py::arg("max_outer_iters") = 50,
      py::arg("epsilon") = py::none());
  m.def(
      "mkkm_mr",
      [](const std::vector<MatrixXd>& kernels, int k, double lam, std::uint64_t seed, int max_outer_iters,
         std::optional<double> epsilon) {
        const mkkm::KernelBank bank = to_bank(kernels);
        return result_dict(mkkm::mkkm_mr(bank, mkkm::correlation_matrix(bank), lam,
                                         alternating(k, seed, max_outer_iters, epsilon)));
      },
      py::arg("kernels"), py::arg("k"), py::arg("lam"), py::arg("seed") = 0, py::arg("max_outer_iters") = 50,
      py::arg("epsilon") = py::none());
  m.def(
      "kcd_mkkm",
      [](const std::vector<MatrixXd>& kernels, int k, double alpha, double beta, std::uint64_t seed,
         int max_outer_iters, std::optional<double> epsilon) {
        const mkkm::KernelBank bank = to_bank(kernels);
        mkkm::KcdConfig cfg;
        static_cast<mkkm::AlternatingOptions&>(cfg) = alternating(k, seed, max_outer_iters, epsilon);
        cfg.alpha = alpha;
        cfg.beta = beta;
        return result_dict(mkkm::kcd_mkkm(bank, mkkm::compute_relations(bank), cfg));
      },
      py::arg("kernels"), py::arg("k"), py::arg("alpha") = 0.5, py::arg("beta") = 1.0 / 256.0, py::arg("seed") = 0,
      py::arg("max_outer_iters") = 50, py::arg("epsilon") = py::none());

  m.def("accuracy", &mkkm::accuracy, py::arg("pred"), py::arg("truth"));
  m.def("nmi", &mkkm::nmi, py::arg("pred"), py::arg("truth"));
  m.def("purity", &mkkm::purity, py::arg("pred"), py::arg("truth"));
  m.def("ari", &mkkm::ari, py::arg("pred"), py::arg("truth"));
  m.def(
      "evaluate",
      [](const std::vector<int>& pred, const std::vector<int>& truth) {
        const auto v = mkkm::evaluate(pred, truth);
        py::dict d;
        d["acc"] = v.acc;
        d["nmi"] = v.nmi;
        d["pur"] = v.pur;
        d["ari"] = v.ari;
        return d;
      },
      py::arg("pred"), py::arg("truth"));

  m.def("nemenyi_cd", &mkkm::nemenyi_cd, py::arg("k"), py::arg("n"), py::arg("q") = mkkm::kQ005For8);
  m.def(
      "friedman",
      [](const MatrixXd& scores, bool higher_is_better) {
        const auto t = mkkm::rank_table(scores, higher_is_better);
        const auto f = mkkm::friedman(t);
        return py::make_tuple(f.chi2, f.f, t.mean_ranks);
      },
      py::arg("scores"), py::arg("higher_is_better") = true,
      "Scores are (datasets, algorithms). Returns (tau_chi2, tau_F, mean_ranks).");

  m.def(
      "three_blob_fixture",
      [](std::uint64_t seed) {
        const auto d = mkkm::three_blob_fixture(seed);
        return py::make_tuple(MatrixXd(d.X.transpose()), d.labels);
      },
      py::arg("seed") = 7, "Returns (X, labels) with X of shape (150, 2).");
}
