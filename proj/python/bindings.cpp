#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridcq/errors.hpp"
#include "hybridcq/harness.hpp"

namespace py = pybind11;
using namespace hybridcq;

namespace {

DualVector dual(const Vector& v) { return DualVector(v); }

py::dict record_dict(const IterationRecord& r) {
    py::dict d;
    d["n"] = r.n;
    d["x"] = r.x;
    d["y"] = r.y;
    d["z"] = r.z;
    d["phi_step"] = r.phi_step;
    d["step_to_y"] = r.step_to_y;
    d["residual"] = r.residual;
    d["dist_to_target"] = r.dist_to_target;
    d["cn_slack_pref"] = r.cn_slack_pref;
    d["qn_slack_pref"] = r.qn_slack_pref;
    return d;
}

py::dict summary_dict(const Summary& s) {
    py::dict d;
    d["converged"] = s.converged;
    d["iterations"] = s.iterations;
    d["final_distance_to_target"] = s.final_distance_to_target;
    d["max_invariant_violation"] = s.max_invariant_violation;
    d["wall_time_seconds"] = s.wall_time_seconds;
    d["terminated_by"] = std::string(to_string(s.terminated_by));
    d["error"] = s.error;
    return d;
}

Scheme scheme_arg(const std::string& s) {
    auto v = scheme_from_string(s);
    if (!v) throw ConfigurationError("unknown scheme '" + s + "'");
    return *v;
}

} // namespace

PYBIND11_MODULE(_hybridcq, m) {
    m.doc() = "Hybrid projection fixed-point solvers";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    // Registered after Error so the more specific translator wins.
    py::register_exception<ValidationError>(m, "ValidationError", error.ptr());

    py::class_<SpaceGeometry>(m, "SpaceGeometry")
        .def_static("euclidean", &SpaceGeometry::euclidean, py::arg("dim"))
        .def_static("p_norm", &SpaceGeometry::p_norm, py::arg("dim"), py::arg("p"))
        .def_property_readonly("dim", &SpaceGeometry::dim)
        .def_property_readonly("p", &SpaceGeometry::p)
        .def_property_readonly("q", &SpaceGeometry::q)
        .def_property_readonly("is_euclidean", &SpaceGeometry::is_euclidean)
        .def("norm", &SpaceGeometry::norm)
        .def("dual_norm", [](const SpaceGeometry& g, const Vector& f) { return g.dual_norm(dual(f)); })
        .def("duality_map", [](const SpaceGeometry& g, const Vector& x) { return g.duality_map(x).coords; })
        .def("inverse_duality_map",
             [](const SpaceGeometry& g, const Vector& f) { return g.inverse_duality_map(dual(f)); })
        .def("lyapunov", &SpaceGeometry::lyapunov, py::arg("x"), py::arg("y"))
        .def("__repr__", [](const SpaceGeometry& g) {
            return g.is_euclidean() ? "SpaceGeometry.euclidean(" + std::to_string(g.dim()) + ")"
                                    : "SpaceGeometry.p_norm(" + std::to_string(g.dim()) + ", " +
                                          std::to_string(g.p()) + ")";
        });

    py::class_<ConvexSet>(m, "ConvexSet")
        .def_static("box", [](const Vector& lo, const Vector& hi) { return ConvexSet(Box{lo, hi}); },
                    py::arg("lower"), py::arg("upper"))
        .def_static("ball", [](const Vector& c, double r) { return ConvexSet(Ball{c, r}); }, py::arg("center"),
                    py::arg("radius"))
        .def_static("halfspace",
                    [](const Vector& a, double b) { return ConvexSet(DualHalfSpace{dual(a), b}); },
                    py::arg("normal"), py::arg("offset"))
        .def_static("intersection",
                    [](std::vector<ConvexSet> parts) { return ConvexSet(Intersection{std::move(parts)}); })
        .def_static("singleton", &ConvexSet::singleton)
        .def_property_readonly("dim", &ConvexSet::dim)
        .def_property_readonly("is_bounded", &ConvexSet::is_bounded)
        .def("contains", [](const ConvexSet& s, const Vector& x, double tol) { return contains(s, x, tol); },
             py::arg("x"), py::arg("tol") = 1e-9)
        .def("violation", [](const ConvexSet& s, const Vector& x) { return violation(s, x); })
        .def("__repr__", &ConvexSet::describe);

    m.def("metric_project", [](const ConvexSet& s, const Vector& x) { return metric_project(s, x).point; },
          py::arg("set"), py::arg("x"));
    m.def("generalized_project",
          [](const SpaceGeometry& g, const ConvexSet& s, const Vector& x) {
              return generalized_project(g, s, x).point;
          },
          py::arg("geometry"), py::arg("set"), py::arg("x"));

    py::class_<BruteForceOptions>(m, "BruteForceOptions")
        .def(py::init<>())
        .def_readwrite("starts", &BruteForceOptions::starts)
        .def_readwrite("iterations", &BruteForceOptions::iterations)
        .def_readwrite("seed", &BruteForceOptions::seed);
    m.def("brute_force_project", &brute_force_project, py::arg("geometry"), py::arg("set"), py::arg("x"),
          py::arg("options") = BruteForceOptions{});

    py::class_<KSchedule>(m, "KSchedule")
        .def_static("constant", &KSchedule::constant, py::arg("value") = 1.0)
        .def_static("inverse_square", &KSchedule::inverse_square)
        .def("at", &KSchedule::at);

    py::class_<MappingSpec>(m, "MappingSpec")
        .def_static("rotation", &MappingSpec::rotation, py::arg("angle"))
        .def_static("contraction", &MappingSpec::contraction, py::arg("factor"), py::arg("center"))
        .def_static("metric_projection", &MappingSpec::metric_projection, py::arg("set"))
        .def_static("generalized_projection", &MappingSpec::generalized_projection, py::arg("geometry"),
                    py::arg("set"))
        .def_static("averaged", &MappingSpec::averaged, py::arg("inner"), py::arg("weight"))
        .def_static("goebel_kirk", py::overload_cast<int>(&MappingSpec::goebel_kirk), py::arg("dim"))
        .def_property_readonly("dim", &MappingSpec::dim)
        .def_property_readonly("domain", &MappingSpec::domain)
        .def("k", &MappingSpec::k)
        .def("with_k_schedule", &MappingSpec::with_k_schedule)
        .def("with_domain", &MappingSpec::with_domain)
        .def("apply", &MappingSpec::apply)
        .def("apply_power", &MappingSpec::apply_power)
        .def("fixed_set_projection", [](const MappingSpec& s, const Vector& x) { return s.fixed_set().project(x); })
        .def("__repr__", &MappingSpec::describe);

    py::class_<StepRule>(m, "StepRule")
        .def_static("constant", &StepRule::constant)
        .def_static("one_minus_inv", &StepRule::one_minus_inv)
        .def_static("inv", &StepRule::inv)
        .def_static("inv_square", &StepRule::inv_square)
        .def("at", &StepRule::at)
        .def("__repr__", &StepRule::describe);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_property(
            "scheme", [](const SolverConfig& c) { return std::string(to_string(c.scheme)); },
            [](SolverConfig& c, const std::string& s) { c.scheme = scheme_arg(s); })
        .def_property(
            "alpha", [](const SolverConfig& c) { return c.schedule.alpha; },
            [](SolverConfig& c, const StepRule& r) { c.schedule.alpha = r; })
        .def_property(
            "beta", [](const SolverConfig& c) { return c.schedule.beta; },
            [](SolverConfig& c, const StepRule& r) { c.schedule.beta = r; })
        .def_readwrite("M", &SolverConfig::M)
        .def_readwrite("diam_C", &SolverConfig::diam_C)
        .def_readwrite("x0", &SolverConfig::x0)
        .def_readwrite("max_iter", &SolverConfig::max_iter)
        .def_readwrite("stop_tol", &SolverConfig::stop_tol)
        .def_readwrite("residual_tol", &SolverConfig::residual_tol)
        .def_readwrite("projection_tol", &SolverConfig::projection_tol)
        .def_readwrite("target", &SolverConfig::target);

    py::class_<IterationTrace>(m, "IterationTrace")
        .def_property_readonly("records",
                               [](const IterationTrace& t) {
                                   py::list out;
                                   for (const auto& r : t.records) out.append(record_dict(r));
                                   return out;
                               })
        .def_property_readonly("iterations", [](const IterationTrace& t) { return t.records.size(); })
        .def_property_readonly("terminated_by",
                               [](const IterationTrace& t) { return std::string(to_string(t.terminated_by)); })
        .def_readonly("final_point", &IterationTrace::final_point)
        .def_readonly("error", &IterationTrace::error)
        .def_readonly("M", &IterationTrace::M);

    m.def("run_scheme", &run_scheme, py::arg("mapping"), py::arg("geometry"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("name", &ExperimentConfig::name)
        .def_readonly("geometry", &ExperimentConfig::geometry)
        .def_readonly("mapping", &ExperimentConfig::mapping)
        .def_readonly("solver", &ExperimentConfig::solver)
        .def_readonly("seed", &ExperimentConfig::seed);

    m.def("parse_config", &parse_config, py::arg("text"), py::arg("origin") = "<string>");
    m.def("run_experiment", [](const ExperimentConfig& cfg) {
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(cfg);
        }
        return py::make_tuple(r.trace, summary_dict(r.summary), r.reference);
    });
    m.def("trace_csv", &trace_csv);
    m.def("run_selftest", [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_selftest(seed)) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
    }, py::arg("seed") = 7);
}
