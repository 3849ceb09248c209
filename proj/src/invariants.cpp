#include "lrfree/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lrfree/harness.hpp"
#include "lrfree/objectives.hpp"
#include "lrfree/run.hpp"
#include "lrfree/scaling.hpp"

namespace lrfree {

bool InvariantReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

void InvariantReport::add(std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

double rel_diff(const ParamVec& a, const ParamVec& b) {
    const double scale = std::max({norm2(a), norm2(b), 1e-300});
    return norm2(sub(a, b)) / scale;
}

ObjectivePtr random_quadratic(Rng& rng, std::size_t dim) {
    return quadratic(rng.uniform_vec(dim, 0.5, 5.0), rng.normal_vec(dim));
}

// Worst per-step relative deviation between PS-DA-SGD with constant scalar
// alpha = kappa and the unscaled method on f(w' / kappa).
double ps_da_scalar_equivalence(Rng& rng, double kappa, std::size_t steps) {
    const std::size_t dim = 5;
    const ObjectivePtr f = random_quadratic(rng, dim);
    const ParamVec w0 = rng.normal_vec(dim);
    const ParamVec kappa_vec(dim, kappa);
    const ObjectivePtr f_scaled = reparametrized(f, kappa_vec);

    PsDaState a = PsDaState::init(w0);
    PsDaState b = PsDaState::init(ew_mul(w0, kappa_vec));
    const ParamVec ones(dim, 1.0);
    ParamVec wa = w0;
    ParamVec wb = b.w0;
    double worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        wa = ps_da_sgd_step(wa, f->gradient(wa), a, kappa_vec, 1.0).w;
        wb = ps_da_sgd_step(wb, f_scaled->gradient(wb), b, ones, 1.0).w;
        worst = std::max(worst, rel_diff(wa, ew_div(wb, kappa_vec)));
    }
    return worst;
}

void suite_scale_equivalence(InvariantReport& report) {
    const InvariantReport sps = check_scale_equivalence(ps_sps_step);
    report.checks.insert(report.checks.end(), sps.checks.begin(), sps.checks.end());

    Rng rng(11);
    double worst = 0.0;
    for (double kappa : {0.25, 0.5, 3.0, 10.0}) worst = std::max(worst, ps_da_scalar_equivalence(rng, kappa, 200));
    report.add("ps_da_sgd scalar-alpha trajectory equivalence", worst <= 1e-10,
               "max relative deviation " + fmt(worst));
}

void suite_naive_sps(InvariantReport& report) {
    Rng rng(5);
    const SpsState sps(0.5, 0.0);
    double naive_err = 0.0;
    double ps_err = 0.0;
    for (double alpha : {0.5, 2.0, 10.0}) {
        for (int trial = 0; trial < 20; ++trial) {
            const ObjectivePtr f = random_quadratic(rng, 4);
            const ParamVec w = rng.normal_vec(4);
            const ParamVec g = f->gradient(w);
            const double fv = f->value(w);
            const ParamVec alpha_vec(4, alpha);
            const double base = norm2(sub(sps_step(w, g, fv, sps).w, w));
            const double naive = norm2(sub(naive_scaled_sps_step(w, g, fv, sps, alpha_vec).w, w));
            const double ps = norm2(sub(ps_sps_step(w, g, fv, sps, alpha_vec).w, w));
            naive_err = std::max(naive_err, std::abs(naive / base - alpha * alpha) / (alpha * alpha));
            ps_err = std::max(ps_err, std::abs(ps / base - 1.0));
        }
    }
    report.add("naive scaled SPS displacement ratio equals alpha^2", naive_err <= 1e-12,
               "max relative error " + fmt(naive_err));
    report.add("ps_sps displacement ratio equals 1", ps_err <= 1e-12, "max error " + fmt(ps_err));
}

void suite_d_adaptation(InvariantReport& report) {
    Rng rng(21);
    const std::size_t dim = 10;
    const ParamVec w_star = rng.uniform_vec(dim, -1.0, 1.0);
    const ObjectivePtr f = l1_lipschitz(w_star);
    const ParamVec w0(dim);
    const double D = norm2(sub(w0, w_star));

    for (double mu : {0.0, 0.9}) {
        ScalingState scaling = ScalingState::amsgrad(dim);
        PsDaState st = PsDaState::init(w0, kDefaultD0, mu);
        ParamVec w = w0;
        bool monotone = true, bounded = true, d_scaled_ok = true, maxima_ok = true;
        double worst_ratio = 0.0;
        for (std::size_t k = 0; k < 3000; ++k) {
            const ParamVec g = f->gradient(w);
            const ParamVec alpha = scaling.update_and_get_alpha(g);
            const double d_before = st.d;
            const ParamVec am_before = st.alpha_max;
            const ParamVec gm_before = st.g_max;
            const StepResult r = ps_da_sgd_step(w, g, st, alpha, gamma(Schedule::poly(), k));
            monotone &= st.d >= d_before;
            const double bound = D * max_elem(alpha);
            worst_ratio = std::max(worst_ratio, st.d / bound);
            bounded &= st.d <= bound * (1.0 + 1e-9);
            if (!r.report.skipped) {
                const double ds = r.report.extras.at("d_scaled");
                d_scaled_ok &= ds > 0.0 && ds <= d_before;
            }
            for (std::size_t i = 0; i < dim; ++i)
                maxima_ok &= st.alpha_max[i] >= am_before[i] && st.g_max[i] >= gm_before[i];
            w = r.w;
        }
        const std::string tag = " (l1, amsgrad, momentum " + fmt(mu) + ")";
        report.add("d non-decreasing" + tag, monotone);
        report.add("d <= D * max(alpha)" + tag, bounded, "max d / bound " + fmt(worst_ratio));
        report.add("0 < d' <= d" + tag, d_scaled_ok);
        report.add("alpha_M and g_M non-decreasing" + tag, maxima_ok);
    }
}

void suite_contraction(InvariantReport& report) {
    Rng rng(31);
    const std::size_t dim = 10;
    const SpsState sps(1.0, 0.0);
    const std::vector<ObjectivePtr> problems = {l1_lipschitz(rng.uniform_vec(dim, -1.0, 1.0)),
                                                random_quadratic(rng, dim)};
    for (const auto& f : problems) {
        ScalingState scaling = ScalingState::amsgrad(dim);
        ParamVec w(dim);
        bool ok = true;
        double worst = 0.0;
        for (std::size_t k = 0; k < 2000; ++k) {
            const ParamVec g = f->gradient(w);
            const ParamVec alpha = scaling.update_and_get_alpha(g);
            const StepResult r = ps_sps_step(w, g, f->value(w), sps, alpha);
            if (r.report.skipped) break;
            const double before = norm2_squared(ew_mul(sub(w, *f->w_star), alpha));
            const double after = norm2_squared(ew_mul(sub(r.w, *f->w_star), alpha));
            const double gap = f->value(w);
            const double decrease = gap * gap / norm2_squared(ew_div(g, alpha));
            const double slack = after - (before - decrease);
            const double floor = distance_rounding_bound(w, *f->w_star, alpha) +
                                 distance_rounding_bound(r.w, *f->w_star, alpha);
            const double allowed = 1e-12 * (before + decrease) + floor;
            worst = std::max(worst, slack / std::max(allowed, 1e-300));
            ok &= slack <= allowed;
            w = r.w;
        }
        report.add("ps_sps scaled-distance contraction (" + f->name() + ", c=1, amsgrad)", ok,
                   "max slack / tolerance " + fmt(worst));
    }
}

void suite_scaling(InvariantReport& report) {
    Rng rng(41);
    bool monotone = true, positive = true;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng.below(8);
        for (auto make : {&ScalingState::adam, &ScalingState::amsgrad}) {
            ScalingState s = make(dim, 0.999, 1e-8);
            ParamVec prev(dim, 0.0);
            for (int k = 0; k < 200; ++k) {
                ParamVec g = rng.normal_vec(dim, std::pow(10.0, rng.uniform(-6.0, 3.0)));
                if (rng.uniform() < 0.2) g = ParamVec(dim);
                const ParamVec a = s.update_and_get_alpha(g);
                positive &= min_elem(a) >= std::sqrt(1e-8) * (1.0 - 1e-12);
                if (s.rule() == ScalingRule::AMSGrad)
                    for (std::size_t i = 0; i < dim; ++i) monotone &= a[i] >= prev[i];
                prev = a;
            }
        }
    }
    report.add("amsgrad alpha non-decreasing", monotone);
    report.add("alpha >= sqrt(eps) for adam and amsgrad", positive);
}

void suite_gradients(InvariantReport& report) {
    Rng rng(51);
    DatasetSpec ds;
    ds.samples = 60;
    ds.features = 5;
    ds.seed = 3;
    const SyntheticDataset data = make_dataset(ds);
    const std::vector<ObjectivePtr> problems = {
        random_quadratic(rng, 6), l1_lipschitz(rng.normal_vec(6)), logistic_regression(data),
        tiny_mlp(data, 4, 9)};
    for (const auto& f : problems) {
        double worst = 0.0;
        for (int p = 0; p < 10; ++p) {
            ParamVec w = rng.normal_vec(f->dim());
            if (f->w_star && f->name() == "l1")
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (std::abs(w[i] - (*f->w_star)[i]) < 1e-3) w[i] += 0.01;
            worst = std::max(worst, rel_diff(f->gradient(w), finite_diff_grad(*f, w, 1e-5)));
        }
        report.add("analytic gradient matches central differences (" + f->name() + ")", worst <= 1e-5,
                   "max relative error " + fmt(worst));
    }
}

void suite_skip_safety(InvariantReport& report) {
    const ParamVec center{1.0, -2.0, 0.5};
    const ObjectivePtr f = quadratic(ParamVec{1.0, 10.0, 100.0}, center);
    for (auto kind : {OptimizerKind::Sgd, OptimizerKind::Adam, OptimizerKind::Sps,
                      OptimizerKind::NaiveScaledSps, OptimizerKind::PsSps, OptimizerKind::DaSgd,
                      OptimizerKind::PsDaSgd}) {
        OptimizerConfig oc;
        oc.kind = kind;
        oc.momentum = 0.9;
        auto opt = make_optimizer(oc, ScalingConfig{}, 3, 0.0);
        Rng rng(0);
        RunOptions options;
        options.w0 = center;
        const Trajectory t = run(*opt, *f, 20, Schedule::constant(), rng, options);
        bool ok = !t.failure && t.final_w == center;
        for (const auto& r : t.records)
            ok &= std::isfinite(r.lr) && (!r.d || std::isfinite(*r.d));
        report.add("zero gradient at optimum leaves " + std::string(to_string(kind)) + " finite and still", ok);
    }
}

void suite_determinism(InvariantReport& report) {
    ExperimentConfig cfg;
    cfg.objective.kind = "logistic";
    cfg.objective.dataset.samples = 200;
    cfg.objective.dataset.features = 5;
    cfg.objective.seed = 4;
    cfg.optimizer.kind = OptimizerKind::PsDaSgd;
    cfg.optimizer.momentum = 0.9;
    cfg.batch_size = 16;
    cfg.steps = 300;
    auto trace = [&] {
        std::ostringstream os;
        write_trace_csv(os, execute_experiment(cfg).trajectory.records);
        return os.str();
    };
    report.add("identical configs give identical traces", trace() == trace());
}

}  // namespace

InvariantReport check_scale_equivalence(const ScaledSpsStep& step) {
    InvariantReport report{"scale-equivalence", {}};
    Rng rng(1);
    const SpsState sps(0.5, 0.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 1 + rng.below(6);
        const ObjectivePtr f = random_quadratic(rng, dim);
        const ParamVec alpha = rng.uniform_vec(dim, 0.1, 10.0);
        const ObjectivePtr f_scaled = reparametrized(f, alpha);
        ParamVec w = rng.normal_vec(dim);
        ParamVec w_scaled = ew_mul(w, alpha);
        for (int k = 0; k < 20; ++k) {
            const StepResult a = step(w, f->gradient(w), f->value(w), sps, alpha);
            const StepResult b = sps_step(w_scaled, f_scaled->gradient(w_scaled),
                                          f_scaled->value(w_scaled), sps);
            if (a.report.skipped || b.report.skipped) break;
            w = a.w;
            w_scaled = b.w;
            worst = std::max(worst, rel_diff(w, ew_div(w_scaled, alpha)));
        }
    }
    report.add("scaled SPS trajectory matches SPS on reparametrized objective", worst <= 1e-10,
               "max relative deviation " + fmt(worst));
    return report;
}

std::vector<std::string> invariant_suites() {
    return {"scale-equivalence", "naive-sps", "d-adaptation", "contraction",
            "scaling",           "gradients", "skip-safety",  "determinism"};
}

InvariantReport check_invariants(std::string_view suite) {
    if (suite == "all") {
        InvariantReport all{"all", {}};
        for (const auto& id : invariant_suites()) {
            InvariantReport r = check_invariants(id);
            for (auto& c : r.checks) all.checks.push_back({id + ": " + c.name, c.passed, c.detail});
        }
        return all;
    }
    InvariantReport report{std::string(suite), {}};
    if (suite == "scale-equivalence") suite_scale_equivalence(report);
    else if (suite == "naive-sps") suite_naive_sps(report);
    else if (suite == "d-adaptation") suite_d_adaptation(report);
    else if (suite == "contraction") suite_contraction(report);
    else if (suite == "scaling") suite_scaling(report);
    else if (suite == "gradients") suite_gradients(report);
    else if (suite == "skip-safety") suite_skip_safety(report);
    else if (suite == "determinism") suite_determinism(report);
    else throw UsageError("unknown invariant suite '" + std::string(suite) + "'");
    return report;
}

double distance_rounding_bound(const ParamVec& w, const ParamVec& w_star, const ParamVec& alpha) {
    require_same_length(w, w_star, "distance_rounding_bound");
    require_same_length(w, alpha, "distance_rounding_bound");
    constexpr double u = 0x1p-53;
    double bound = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double delta = 8.0 * u * (std::abs(w[i]) + std::abs(w_star[i]));
        const double r = std::abs(w[i] - w_star[i]);
        bound += alpha[i] * alpha[i] * (2.0 * r * delta + delta * delta);
    }
    return bound;
}

void print_report(std::ostream& os, const InvariantReport& report) {
    for (const auto& c : report.checks) {
        os << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << '\n';
    }
    os << report.suite << ": " << (report.passed() ? "all checks passed" : "FAILED") << '\n';
}

}  // namespace lrfree
