// Python module pairstab._core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "pairstab/analysis/bound.hpp"
#include "pairstab/analysis/risk.hpp"
#include "pairstab/analysis/stability.hpp"
#include "pairstab/commands.hpp"
#include "pairstab/data.hpp"
#include "pairstab/optim.hpp"
#include "pairstab/report.hpp"
#include "pairstab/sampling.hpp"

namespace py = pybind11;
using namespace pairstab;

namespace {

py::dict coefficients_dict(const StabilityCoefficients& c) {
  py::dict d;
  d["c1"] = c.c1;
  d["c2"] = c.c2;
  d["exp_factor"] = c.exp_factor;
  d["alt_c1"] = c.alt_c1;
  d["alt_c2"] = c.alt_c2;
  return d;
}

py::dict bound_dict(const BoundReport& b) {
  py::dict d;
  d["lambda"] = b.lambda;
  d["lambda_stability"] = b.lambda_stability;
  d["lambda_moment"] = b.lambda_moment;
  d["main_term"] = b.main_term;
  d["residual_term"] = b.residual_term;
  d["total"] = b.total;
  return d;
}

StepDistribution table_distribution(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw Error(ErrorCode::invalid_parameter, "weight table must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return StepDistribution::from_weights(n, std::move(flat));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stability and PAC-Bayes tools for pairwise SGD and SGDA";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "PairstabError", PyExc_RuntimeError)); });
  // args are (code, message); code is the ErrorCode name.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), std::string(e.what()));
      PyErr_SetObject(error_type.get_stored().ptr(), args.ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("n", &Dataset::size)
      .def_property_readonly("d", &Dataset::dim)
      .def_property_readonly("feature_bound", &Dataset::feature_bound)
      .def_property_readonly("features",
                             [](const Dataset& S) {
                               Eigen::MatrixXd X(S.size(), S.dim());
                               for (std::size_t i = 0; i < S.size(); ++i) X.row(i) = S[i].features.transpose();
                               return X;
                             })
      .def_property_readonly("labels",
                             [](const Dataset& S) {
                               Eigen::VectorXd y(S.size());
                               for (std::size_t i = 0; i < S.size(); ++i) y[i] = S[i].label;
                               return y;
                             })
      .def("save", [](const Dataset& S, const std::string& path) { save_dataset(S, path); });

  m.def(
      "make_synthetic",
      [](const std::string& kind, std::size_t n, std::size_t d, double noise, std::uint64_t seed) {
        return make_synthetic(parse_generator_kind(kind), n, d, noise, seed);
      },
      py::arg("kind"), py::arg("n"), py::arg("d"), py::arg("noise"), py::arg("seed"));
  m.def("load_dataset", &load_dataset, py::arg("path"));

  m.def(
      "recipe",
      [](const std::string& algorithm, const std::string& regime, std::size_t n, double scale_c) {
        const auto r = recipe(parse_algorithm(algorithm), parse_regime(regime), n, scale_c);
        return py::make_tuple(r.T, r.eta);
      },
      py::arg("algorithm"), py::arg("regime"), py::arg("n"), py::arg("scale_c") = 1.0);

  m.def(
      "kl_step",
      [](const std::vector<std::vector<double>>& Q, const std::optional<std::vector<std::vector<double>>>& P) {
        const auto q = table_distribution(Q);
        return kl_step(q, P ? table_distribution(*P) : uniform_prior(q.n()));
      },
      py::arg("Q"), py::arg("P") = py::none(),
      "KL between two n x n pair-weight tables (normalised here); P defaults to uniform.");
  m.def(
      "renyi_moment6",
      [](const std::vector<std::vector<double>>& Q, const std::optional<std::vector<std::vector<double>>>& P) {
        const auto q = table_distribution(Q);
        const std::vector<StepDistribution> qs{q};
        const std::vector<StepDistribution> ps{P ? table_distribution(*P) : uniform_prior(q.n())};
        return renyi_moment6(qs, ps).value();
      },
      py::arg("Q"), py::arg("P") = py::none());
  m.def(
      "sample_trajectory",
      [](std::size_t n, std::size_t T, std::uint64_t seed) {
        const auto traj = sample_trajectory(uniform_prior(n), T, seed);
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& s : traj.steps) out.emplace_back(s.i + 1, s.j + 1);
        return out;
      },
      py::arg("n"), py::arg("T"), py::arg("seed"), "Uniform pairs, 1-based.");
  m.def("chernoff_occupancy_bound", &chernoff_occupancy_bound, py::arg("t"), py::arg("n"), py::arg("delta"));

  m.def(
      "stability_coefficients",
      [](const std::string& kind, double L, std::optional<double> alpha, double eta, std::size_t t, std::size_t n) {
        return coefficients_dict(stability_coefficients(parse_stability_case(kind), L, alpha, eta, t, n));
      },
      py::arg("case"), py::arg("L"), py::arg("alpha") = py::none(), py::arg("eta"), py::arg("t"), py::arg("n"));

  m.def(
      "pacbayes_bound",
      [](double kl, double log_renyi6, double delta, double delta_prime, double c1, double c2, std::size_t n,
         double M, double K1) {
        BoundInputs in;
        in.kl = kl;
        in.renyi6.log_value = log_renyi6;
        in.delta = delta;
        in.delta_prime = delta_prime;
        in.c1 = c1;
        in.c2 = c2;
        in.n = n;
        in.M = M;
        in.K1 = K1;
        return bound_dict(pacbayes_bound(in));
      },
      py::arg("kl"), py::arg("log_renyi6"), py::arg("delta"), py::arg("delta_prime"), py::arg("c1"), py::arg("c2"),
      py::arg("n"), py::arg("M") = 1.0, py::arg("K1") = 1.0);

  m.def(
      "u_statistic",
      [](const Eigen::MatrixXd& table) {
        if (table.rows() != table.cols()) throw Error(ErrorCode::invalid_parameter, "kernel table must be square");
        return u_statistic(static_cast<std::size_t>(table.rows()),
                           [&](std::size_t i, std::size_t j) { return table(i, j); });
      },
      py::arg("table"));
  m.def(
      "block_risk_identity_check",
      [](const Eigen::MatrixXd& table) {
        if (table.rows() != table.cols()) throw Error(ErrorCode::invalid_parameter, "kernel table must be square");
        return block_risk_identity_check(static_cast<std::size_t>(table.rows()),
                                         [&](std::size_t i, std::size_t j) { return table(i, j); });
      },
      py::arg("table"));

  // Same entry points as the CLI subcommands.
  m.def(
      "run_command",
      [](const std::string& name, const std::string& config_text, const std::map<std::string, std::string>& overrides,
         std::optional<std::string> run_path, std::optional<std::string> report_path) {
        CommandOptions opts;
        opts.config = Config::parse(config_text, "<python>");
        for (const auto& [key, value] : overrides) opts.config.set(key, value);
        opts.out_dir = opts.config.get_string("out");
        const auto jobs = opts.config.get_int("jobs");
        if (jobs < 1) throw Error(ErrorCode::config_error, "jobs must be >= 1");
        opts.jobs = static_cast<unsigned>(jobs);
        opts.run_path = std::move(run_path);
        opts.report_path = std::move(report_path);
        CommandResult res;
        {
          py::gil_scoped_release release;
          if (name == "gen-data") res = cmd_gen_data(opts);
          else if (name == "train") res = cmd_train(opts);
          else if (name == "stability") res = cmd_stability(opts);
          else if (name == "bound") res = cmd_bound(opts);
          else if (name == "sweep") res = cmd_sweep(opts);
          else if (name == "chernoff") res = cmd_chernoff(opts);
          else throw Error(ErrorCode::config_error, "unknown command '" + name + "'");
        }
        py::dict d;
        d["status"] = res.status;
        d["lines"] = res.lines;
        d["files"] = res.files;
        d["config_hash"] = hex_hash(opts.config.hash());
        return d;
      },
      py::arg("name"), py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("run") = py::none(), py::arg("report") = py::none(),
      "Runs a subcommand on config text; returns status, lines, files and config_hash.");
}
