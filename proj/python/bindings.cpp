#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lrfree/harness.hpp"
#include "lrfree/invariants.hpp"
#include "lrfree/objectives.hpp"
#include "lrfree/optimizers.hpp"
#include "lrfree/scaling.hpp"
#include "lrfree/schedule.hpp"

namespace py = pybind11;

// ParamVec <-> list of floats (any sequence on the way in)
namespace pybind11::detail {
template <>
struct type_caster<lrfree::ParamVec> {
    PYBIND11_TYPE_CASTER(lrfree::ParamVec, const_name("list[float]"));

    bool load(handle src, bool convert) {
        list_caster<std::vector<double>, double> inner;
        if (!inner.load(src, convert)) return false;
        value = lrfree::ParamVec(std::move(static_cast<std::vector<double>&>(inner)));
        return true;
    }

    static handle cast(const lrfree::ParamVec& v, return_value_policy, handle) {
        py::list out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = py::float_(v[i]);
        return out.release();
    }
};
}  // namespace pybind11::detail

namespace {

using namespace lrfree;

// ObjectivePtr holds a const object, which pybind11 holders do not accept.
struct PyObjective {
    ObjectivePtr ptr;
};

py::dict report_dict(const StepReport& r) {
    py::dict d;
    d["eta"] = r.eta;
    d["d"] = r.d ? py::cast(*r.d) : py::none();
    d["skipped"] = r.skipped;
    d["alpha_min"] = r.alpha_min;
    d["alpha_max"] = r.alpha_max;
    for (const auto& [k, v] : r.extras) d[py::str(k)] = v;
    return d;
}

py::tuple step_tuple(const StepResult& r) { return py::make_tuple(r.w, report_dict(r.report)); }

py::object opt_float(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict run_config(const std::string& text) {
    const ExperimentConfig cfg = parse_config_text(text);
    const ExperimentResult res = execute_experiment(cfg);
    py::dict out;
    out["summary"] = py::module_::import("json").attr("loads")(to_json(res.summary).dump());
    py::list trace;
    for (const auto& r : res.trajectory.records) {
        py::dict row;
        row["step"] = r.step;
        row["loss"] = r.loss;
        row["lr"] = r.lr;
        row["d"] = opt_float(r.d);
        row["grad_norm"] = r.grad_norm;
        row["alpha_min"] = r.alpha_min;
        row["alpha_max"] = r.alpha_max;
        trace.append(row);
    }
    out["trace"] = trace;
    out["final_w"] = res.trajectory.final_w;
    return out;
}

}  // namespace

PYBIND11_MODULE(_lrfree, m) {
    m.doc() = "Parameter-scaled Polyak and D-Adaptation optimizers";

    // later registrations are tried first, so the subclass goes last
    py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
    auto usage = py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", usage.ptr());

    m.def("ew_mul", &ew_mul);
    m.def("ew_div", &ew_div);
    m.def("ew_inv", &ew_inv);
    m.def("ew_max", &ew_max);
    m.def("inner", &inner);
    m.def("norm2", &norm2);

    py::class_<ScalingState>(m, "ScalingState")
        .def_static("identity", &ScalingState::identity, py::arg("dim"))
        .def_static("constant", &ScalingState::constant, py::arg("alpha"))
        .def_static("adam", &ScalingState::adam, py::arg("dim"),
                    py::arg("beta2") = ScalingState::kDefaultBeta2,
                    py::arg("epsilon") = ScalingState::kDefaultEpsilon)
        .def_static("amsgrad", &ScalingState::amsgrad, py::arg("dim"),
                    py::arg("beta2") = ScalingState::kDefaultBeta2,
                    py::arg("epsilon") = ScalingState::kDefaultEpsilon)
        .def("update_and_get_alpha", &ScalingState::update_and_get_alpha, py::arg("g"))
        .def_property_readonly("rule", [](const ScalingState& s) { return std::string(to_string(s.rule())); })
        .def_property_readonly("dim", &ScalingState::dim)
        .def_property_readonly("step", &ScalingState::step)
        .def_property_readonly("v", &ScalingState::v)
        .def_property_readonly("v_max", &ScalingState::v_max);
    m.def("effective_preconditioner", &effective_preconditioner, py::arg("alpha"));

    m.def(
        "sps_lr",
        [](double f_val, double f_star, double c, const ParamVec& g) {
            return sps_lr(f_val, SpsState(c, f_star), g);
        },
        py::arg("f_val"), py::arg("f_star"), py::arg("c"), py::arg("g"),
        "Polyak step size, or None when the gradient is zero.");
    m.def(
        "ps_sps_step",
        [](const ParamVec& w, const ParamVec& g, double f_val, const ParamVec& alpha, double f_star,
           double c) { return step_tuple(ps_sps_step(w, g, f_val, SpsState(c, f_star), alpha)); },
        py::arg("w"), py::arg("g"), py::arg("f_val"), py::arg("alpha"), py::arg("f_star") = 0.0,
        py::arg("c") = 0.5);
    m.def(
        "naive_scaled_sps_step",
        [](const ParamVec& w, const ParamVec& g, double f_val, const ParamVec& alpha, double f_star,
           double c) { return step_tuple(naive_scaled_sps_step(w, g, f_val, SpsState(c, f_star), alpha)); },
        py::arg("w"), py::arg("g"), py::arg("f_val"), py::arg("alpha"), py::arg("f_star") = 0.0,
        py::arg("c") = 0.5);

    py::class_<PsDaState>(m, "PsDaState")
        .def(py::init(&PsDaState::init), py::arg("w0"), py::arg("d0") = kDefaultD0,
             py::arg("momentum") = 0.0)
        .def_readonly("d", &PsDaState::d)
        .def_readonly("m", &PsDaState::m)
        .def_readonly("s", &PsDaState::s)
        .def_readonly("g_max", &PsDaState::g_max)
        .def_readonly("alpha_max", &PsDaState::alpha_max)
        .def_readonly("z", &PsDaState::z)
        .def_readonly("k", &PsDaState::k);
    m.def(
        "ps_da_sgd_step",
        [](const ParamVec& w, const ParamVec& g, PsDaState& state, const ParamVec& alpha, double gamma) {
            return step_tuple(ps_da_sgd_step(w, g, state, alpha, gamma));
        },
        py::arg("w"), py::arg("g"), py::arg("state"), py::arg("alpha"), py::arg("gamma") = 1.0);

    py::class_<PyObjective>(m, "Objective")
        .def_property_readonly("name", [](const PyObjective& o) { return o.ptr->name(); })
        .def_property_readonly("dim", [](const PyObjective& o) { return o.ptr->dim(); })
        .def_property_readonly("f_star", [](const PyObjective& o) { return opt_float(o.ptr->f_star); })
        .def_property_readonly("w_star", [](const PyObjective& o) { return o.ptr->w_star; })
        .def("value", [](const PyObjective& o, const ParamVec& w) { return o.ptr->value(w); })
        .def("gradient", [](const PyObjective& o, const ParamVec& w) { return o.ptr->gradient(w); })
        .def("initial_point", [](const PyObjective& o) { return o.ptr->initial_point(); });

    m.def("quadratic", [](ParamVec diag, ParamVec w_star) { return PyObjective{quadratic(diag, w_star)}; },
          py::arg("diag"), py::arg("w_star"));
    m.def("l1", [](ParamVec w_star) { return PyObjective{l1_lipschitz(w_star)}; }, py::arg("w_star"));
    m.def(
        "logistic",
        [](std::size_t samples, std::size_t features, double noise, std::uint64_t seed) {
            DatasetSpec spec;
            spec.samples = samples;
            spec.features = features;
            spec.noise = noise;
            spec.seed = seed;
            return PyObjective{logistic_regression(make_dataset(spec))};
        },
        py::arg("samples") = 1000, py::arg("features") = 20, py::arg("noise") = 0.5, py::arg("seed") = 0);

    m.def(
        "gamma",
        [](const std::string& kind, std::size_t k, std::size_t total_steps) {
            Schedule s;
            s.kind = parse_schedule_kind(kind);
            s.total_steps = total_steps;
            return gamma(s, k);
        },
        py::arg("kind"), py::arg("k"), py::arg("total_steps") = 0);

    m.def("run_config", &run_config, py::arg("config_json"),
          "Run an experiment config (JSON text) in memory. Returns summary, trace and final_w.");
    m.def("invariant_suites", &invariant_suites);
    m.def(
        "check_invariants",
        [](const std::string& suite) {
            const InvariantReport r = check_invariants(suite);
            py::list checks;
            for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
            return py::make_tuple(r.passed(), checks);
        },
        py::arg("suite") = "all");
}
