#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ddetc/controller_synthesis.hpp"
#include "ddetc/data_window.hpp"
#include "ddetc/hybrid_engine.hpp"
#include "ddetc/experiment.hpp"
#include "ddetc/lyapunov_monitor.hpp"
#include "ddetc/proximity_sets.hpp"
#include "ddetc/verify_suites.hpp"

namespace py = pybind11;
using namespace ddetc;

namespace {

SymMat sym(const Mat& m) { return SymMat(m); }

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["name"] = s.name;
  d["mode"] = s.mode;
  d["seed"] = s.seed;
  d["status"] = s.status;
  d["final_norm"] = s.final_norm;
  d["max_norm"] = s.max_norm;
  d["episodes"] = s.episodes;
  d["converged"] = s.converged;
  d["bound_ok"] = s.bound_ok;
  d["databased_dominates"] = s.databased_dominates;
  d["corollary"] = s.corollary ? py::cast(*s.corollary) : py::none();
  d["solver_breakdown"] = s.breakdown;
  return d;
}

py::dict outcome_dict(const ScenarioOutcome& o) {
  py::dict d = summary_dict(o.summary);
  const auto& recs = o.traj.records;
  const auto n = static_cast<Eigen::Index>(recs.size());
  Mat x(n, o.traj.nx);
  Eigen::VectorXi k(n), j(n);
  Vec v(n), pi_exact(n), pi_data(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = recs[static_cast<std::size_t>(r)];
    x.row(r) = rec.q.x.transpose();
    k(r) = static_cast<int>(rec.t.k);
    j(r) = rec.t.j;
    v(r) = rec.V;
    pi_exact(r) = o.diag.exact.pi[static_cast<std::size_t>(r)];
    pi_data(r) = o.diag.databased.pi[static_cast<std::size_t>(r)];
  }
  d["k"] = k;
  d["j"] = j;
  d["x"] = x;
  d["V"] = v;
  d["pi_exact"] = pi_exact;
  d["pi_databased"] = pi_data;
  d["warnings"] = o.traj.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ddetc, m) {
  m.doc() = "Data-driven event-triggered control of LTV plants";
  m.attr("__version__") = DDETC_VERSION;

  static py::exception<Error> base(m, "Error");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", base.ptr());
  py::register_exception<SolverBreakdown>(m, "SolverBreakdown", base.ptr());
  py::register_exception<InternalError>(m, "InternalError", base.ptr());

  // Dense kernels.
  m.def("sym_eig", [](const Mat& s) {
    const auto e = sym_eig(sym(s));
    return py::make_tuple(e.values, e.vectors);
  }, py::arg("S"), "Ascending eigenvalues and orthonormal eigenvectors.");
  m.def("gen_eig_max", [](const Mat& a, const Mat& b) {
    return gen_eig_max(sym(a), sym(b));
  }, py::arg("A"), py::arg("B"));
  m.def("gen_eig_min", [](const Mat& a, const Mat& b) {
    return gen_eig_min(sym(a), sym(b));
  }, py::arg("A"), py::arg("B"));
  m.def("pinv", [](const Mat& a, std::optional<double> tol) { return pinv(a, tol); },
        py::arg("M"), py::arg("tol") = py::none());
  m.def("n_map", &n_map, py::arg("Z"));
  m.def("shift_append", &shift_append, py::arg("M"), py::arg("col"));

  // MAXDET: constraints given as (constant, [coefficients]) pairs.
  m.def("solve_maxdet",
        [](const std::vector<std::pair<Mat, std::vector<Mat>>>& constraints,
           int num_vars, std::optional<std::size_t> det_block,
           const std::vector<std::pair<int, double>>& lower_bounds,
           double strict_margin) {
          SdpProblem p;
          p.num_vars = num_vars;
          for (const auto& [c, coeffs] : constraints) {
            AffineMatFn f{sym(c), {}};
            for (const auto& a : coeffs) f.coefficients.push_back(sym(a));
            p.constraints.push_back(std::move(f));
          }
          p.det_block = det_block;
          for (const auto& [i, b] : lower_bounds) p.var_bounds.push_back({i, b});
          SolverOptions opts;
          opts.strict_margin = strict_margin;
          const auto sol = det_block ? solve_maxdet(p, opts) : solve_feasibility(p, opts);
          py::dict d;
          d["x"] = sol.x;
          d["status"] = std::string(to_string(sol.status));
          d["logdet"] = sol.logdet_value ? py::cast(*sol.logdet_value) : py::none();
          d["min_margins"] = sol.min_margins;
          d["iterations"] = sol.iterations;
          return d;
        },
        py::arg("constraints"), py::arg("num_vars"), py::arg("det_block") = py::none(),
        py::arg("lower_bounds") = std::vector<std::pair<int, double>>{},
        py::arg("strict_margin") = 1e-6,
        "Feasibility when det_block is None, otherwise max logdet of that block.");

  // Plants.
  py::class_<LtvPlant>(m, "Plant")
      .def_static("switching", &LtvPlant::switching, py::arg("A0"), py::arg("B_first"),
                  py::arg("B_second"), py::arg("period"))
      .def_static("sinusoidal", &LtvPlant::sinusoidal, py::arg("A0"), py::arg("B0"),
                  py::arg("period"), py::arg("delta"))
      .def_static("vanishing", &LtvPlant::vanishing, py::arg("A0"), py::arg("B0"),
                  py::arg("period"), py::arg("t_delta"), py::arg("delta0") = 1.0)
      .def_static("constant", &LtvPlant::constant, py::arg("A"), py::arg("B"))
      .def_static("load_piecewise", &LtvPlant::load_piecewise, py::arg("path"))
      .def_property_readonly("nx", &LtvPlant::nx)
      .def_property_readonly("nu", &LtvPlant::nu)
      .def_property_readonly("kind", [](const LtvPlant& p) { return to_string(p.kind()); })
      .def("eval", [](const LtvPlant& p, long k) {
        const auto mats = p.eval(k);
        return py::make_tuple(mats.A, mats.B);
      }, py::arg("k"))
      .def("step", &LtvPlant::step, py::arg("k"), py::arg("x"), py::arg("u"));
  m.def("reference_a0", &reference_a0);
  m.def("reference_b0", &reference_b0);
  m.def("flipped_input_matrix", &flipped_input_matrix, py::arg("B0"), py::arg("ell"));

  // Data windows and proximity sets.
  py::class_<DataWindow>(m, "DataWindow")
      .def(py::init<Mat, Mat, Mat, long>(), py::arg("Xhat"), py::arg("X"), py::arg("U"),
           py::arg("kappa") = 0)
      .def_static("zeros", [](int nx, int nu, int width, long kappa0) {
        return DataWindow(nx, nu, width, kappa0);
      }, py::arg("nx"), py::arg("nu"), py::arg("width"), py::arg("kappa0") = 0)
      .def("push", &DataWindow::push, py::arg("x"), py::arg("x_plus"), py::arg("u"))
      .def_property_readonly("Xhat", &DataWindow::xhat)
      .def_property_readonly("X", &DataWindow::x)
      .def_property_readonly("U", &DataWindow::u)
      .def_property_readonly("kappa", &DataWindow::kappa)
      .def_property_readonly("Z", &DataWindow::z)
      .def("rank", [](const DataWindow& w) { return z_matrix(w).rank; });
  m.def("consistency_residual", [](const DataWindow& w, const LtvPlant& p) {
    return consistency_residual(w, p.stacked(w.kappa(), w.width()));
  }, py::arg("window"), py::arg("plant"));
  m.def("contains", [](const DataWindow& w, const Mat& f, const Mat& ma, const Mat& mb) {
    return contains(w, sym(f), ma, mb);
  }, py::arg("window"), py::arg("F"), py::arg("MA"), py::arg("MB"));
  m.def("min_inflation", [](const DataWindow& w, const Mat& f, const Mat& s,
                            const Mat& a, const Mat& b) {
    return min_inflation(w, sym(f), sym(s), a, b);
  }, py::arg("window"), py::arg("F"), py::arg("S"), py::arg("A_true"), py::arg("B_true"));

  // Synthesis.
  py::class_<ControllerBundle>(m, "ControllerBundle")
      .def_property_readonly("K", [](const ControllerBundle& b) { return b.K; })
      .def_property_readonly("S", [](const ControllerBundle& b) { return b.S.mat(); })
      .def_property_readonly("F", [](const ControllerBundle& b) { return b.F.mat(); })
      .def_property_readonly("H", [](const ControllerBundle& b) { return b.H.mat(); })
      .def_property_readonly("Y", [](const ControllerBundle& b) { return b.Y; })
      .def_readonly("a1", &ControllerBundle::a1)
      .def_readonly("a2", &ControllerBundle::a2)
      .def_readonly("a", &ControllerBundle::a)
      .def_readonly("varsigma", &ControllerBundle::varsigma)
      .def_readonly("eps_F", &ControllerBundle::eps_F)
      .def("decay_rate_bound", &decay_rate_bound, py::arg("eps"))
      .def("__repr__", [](const ControllerBundle& b) {
        std::ostringstream s;
        s << "<ControllerBundle a1=" << b.a1 << " a2=" << b.a2 << ">";
        return s.str();
      });
  m.def("synthesize",
        [](const DataWindow& w, double eps_f, bool normalize_data, double strict_margin) {
          SynthesisOptions opts;
          opts.eps_F = eps_f;
          opts.normalize_data = normalize_data;
          opts.solver.strict_margin = strict_margin;
          return synthesize(w, opts);
        },
        py::arg("window"), py::arg("eps_F") = 0.1, py::arg("normalize_data") = false,
        py::arg("strict_margin") = 1e-6, "Controller bundle, or None when the map is empty.");
  m.def("verify_property",
        [](const ControllerBundle& b, const DataWindow& w, int n, std::uint64_t seed) {
          const auto r = verify_property(b, w, n, seed);
          py::dict d;
          d["samples"] = r.samples;
          d["violations"] = r.violations;
          d["worst_slack"] = r.worst_slack;
          d["membership_failures"] = r.membership_failures;
          d["vacuous_eps"] = r.vacuous_eps;
          return d;
        },
        py::arg("bundle"), py::arg("window"), py::arg("num_samples") = 500,
        py::arg("seed") = 0);

  // Lyapunov quantities.
  m.def("nu_d", [](const Mat& s, const Mat& s_next) { return nu_d(sym(s), sym(s_next)); },
        py::arg("S"), py::arg("S_next"));
  m.def("theta_exact", [](const Mat& a, const Mat& b, const Mat& k, const Mat& s) {
    return theta_exact(a, b, k, sym(s));
  }, py::arg("A"), py::arg("B"), py::arg("K"), py::arg("S"));
  m.def("sigma", &sigma, py::arg("a1"), py::arg("c_sigma"));

  // Experiments.
  m.def("simulate",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed,
           std::optional<std::filesystem::path> out_dir) {
          auto cfg = load_config(config);
          if (seed) cfg.run.seed = *seed;
          ScenarioOutcome o;
          {
            py::gil_scoped_release release;
            o = simulate_scenario(cfg);
            if (out_dir) write_outputs(o, *out_dir);
          }
          return outcome_dict(o);
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("out_dir") = py::none(),
        "Run one scenario file; returns the summary plus per-record arrays.");
  m.def("simulate_text",
        [](const std::string& text, std::optional<std::uint64_t> seed) {
          std::istringstream in(text);
          auto cfg = parse_config(in);
          if (seed) cfg.run.seed = *seed;
          ScenarioOutcome o;
          {
            py::gil_scoped_release release;
            o = simulate_scenario(cfg);
          }
          return outcome_dict(o);
        },
        py::arg("text"), py::arg("seed") = py::none());
  m.def("suite_names", &suite_names);
  m.def("run_suite",
        [](const std::string& name, std::uint64_t seed, int samples) {
          SuiteOptions opts;
          opts.seed = seed;
          opts.samples = samples;
          SuiteResult r;
          {
            py::gil_scoped_release release;
            r = run_suite(name, opts);
          }
          return py::make_tuple(r.passed, r.lines);
        },
        py::arg("name"), py::arg("seed") = 42, py::arg("samples") = 500);
}
