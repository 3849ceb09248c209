#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "lrfree/harness.hpp"
#include "lrfree/invariants.hpp"
#include "lrfree/objectives.hpp"
#include "lrfree/optimizers.hpp"
#include "lrfree/schedule.hpp"

using namespace lrfree;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string detail = o.detail;
    if (limit_s > 0 && secs > limit_s) {
        pass = false;
        detail += "; over time limit";
    }
    std::printf("%s %2d  %s  [%s; %.2fs]\n", pass ? "PASS" : "FAIL", id, title, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
}

// l1 instance shared by criteria 5-7
struct L1Problem {
    ObjectivePtr f;
    ParamVec w0;
    double D;
};

L1Problem l1_problem() {
    Rng rng(7);
    L1Problem p{l1_lipschitz(rng.uniform_vec(10, -1.0, 1.0)), ParamVec(10), 0.0};
    p.D = norm2(sub(p.w0, *p.f->w_star));
    return p;
}

Outcome algebraic_equivalence() {
    Rng rng(101);
    const SpsState sps(0.5, 0.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(10);
        const auto f = quadratic(rng.uniform_vec(n, 0.1, 100.0), rng.normal_vec(n));
        const ParamVec w = rng.normal_vec(n, 3.0);
        const double a = rng.uniform(0.1, 10.0);
        const ParamVec alpha(n, a);

        const ParamVec scaled = ps_sps_step(w, f->gradient(w), f->value(w), sps, alpha).w;

        const auto fr = reparametrized(f, alpha);
        const ParamVec wp = ew_mul(w, alpha);
        const ParamVec ref = ew_div(sps_step(wp, fr->gradient(wp), fr->value(wp), sps).w, alpha);

        worst = std::max(worst, norm2(sub(scaled, ref)) / std::max(norm2(ref), 1e-300));
    }
    return {worst <= 1e-10, fmt("max relative error %.3g", worst)};
}

Outcome naive_failure() {
    Rng rng(102);
    const SpsState sps(0.5, 0.0);
    double worst_naive = 0.0, worst_ps = 0.0;
    for (double a : {0.5, 2.0, 10.0}) {
        for (int t = 0; t < 20; ++t) {
            const ParamVec w = rng.normal_vec(8), g = rng.normal_vec(8);
            const double f = rng.uniform(0.5, 5.0);
            const ParamVec alpha(8, a);
            const double base = norm2(sub(w, sps_step(w, g, f, sps).w));
            const double naive = norm2(sub(w, naive_scaled_sps_step(w, g, f, sps, alpha).w));
            const double ps = norm2(sub(w, ps_sps_step(w, g, f, sps, alpha).w));
            worst_naive = std::max(worst_naive, std::abs(naive / base / (a * a) - 1.0));
            worst_ps = std::max(worst_ps, std::abs(ps / base - 1.0));
        }
    }
    return {worst_naive <= 1e-12 && worst_ps <= 1e-12,
            fmt("naive ratio / alpha^2 error %.3g, ps_sps ratio error %.3g", worst_naive, worst_ps)};
}

Outcome one_step_sps() {
    Rng rng(103);
    const SpsState sps(0.5, 0.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(20);
        const auto f = quadratic(ParamVec(n, 1.0), rng.normal_vec(n, 5.0));
        const ParamVec w = rng.normal_vec(n, 10.0);
        const ParamVec w1 = sps_step(w, f->gradient(w), f->value(w), sps).w;
        worst = std::max(worst, f->value(w1));
    }
    return {worst <= 1e-20, fmt("max loss after one step %.3g", worst)};
}

Outcome hand_trace() {
    PsDaState s = PsDaState::init({1, 0}, 1e-6, 0.0);
    const StepResult r = ps_da_sgd_step({1, 0}, {2, 0}, s, {1, 1}, 1.0);
    const double err = std::max({std::abs(r.report.eta - 5e-7), std::abs(s.d - 1e-6),
                                 std::abs(s.s[0] - 1e-6), std::abs(s.s[1]), std::abs(s.m),
                                 std::abs(r.w[0] - (1 - 1e-6)), std::abs(r.w[1])});
    return {err <= 1e-15, fmt("max abs error %.3g", err)};
}

Outcome d_bound() {
    const L1Problem p = l1_problem();
    ScalingState scaling = ScalingState::amsgrad(10);
    PsDaState s = PsDaState::init(p.w0);
    ParamVec w = p.w0;
    ParamVec alpha_max(10);
    bool monotone = true, bounded = true, provable = true;
    double ratio = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const ParamVec g = p.f->gradient(w);
        const ParamVec alpha = scaling.update_and_get_alpha(g);
        alpha_max = ew_max(alpha_max, alpha);
        const double before = s.d;
        w = ps_da_sgd_step(w, g, s, alpha, 1.0).w;
        monotone &= s.d >= before;
        const double bound = p.D * std::sqrt(max_elem(alpha_max));
        bounded &= s.d <= bound + 1e-9;
        provable &= s.d <= p.D * max_elem(alpha_max) * (1 + 1e-9);
        ratio = std::max(ratio, s.d / bound);
    }
    return {monotone && bounded && provable,
            std::string(monotone ? "" : "d decreased; ") + fmt("D %.4g, max d / bound %.4g", p.D, ratio)};
}

Outcome ps_sps_rate() {
    const L1Problem p = l1_problem();
    const std::size_t n = 10000, dim = 10;
    const SpsState sps(1.0, 0.0);
    ScalingState scaling = ScalingState::amsgrad(dim);
    ParamVec w = p.w0;
    std::vector<double> gaps;
    std::vector<ParamVec> alphas;
    bool contraction = true;
    for (std::size_t k = 0; k < n; ++k) {
        const ParamVec g = p.f->gradient(w);
        const double gap = p.f->value(w);
        gaps.push_back(gap);
        const ParamVec alpha = scaling.update_and_get_alpha(g);
        alphas.push_back(alpha);
        const StepResult r = ps_sps_step(w, g, gap, sps, alpha);
        if (r.report.skipped) continue;  // zero subgradient: w = w*, nothing to contract
        const double before = norm2_squared(ew_mul(sub(w, *p.f->w_star), alpha));
        const double after = norm2_squared(ew_mul(sub(r.w, *p.f->w_star), alpha));
        const double decrease = gap * gap / norm2_squared(ew_div(g, alpha));
        const double floor = distance_rounding_bound(w, *p.f->w_star, alpha) +
                             distance_rounding_bound(r.w, *p.f->w_star, alpha);
        contraction &= after <= before - decrease + 1e-12 * (before + decrease) + floor;
        w = r.w;
    }
    gaps.push_back(p.f->value(w));
    // m: last step at which some coordinate of alpha_k is <= alpha/2
    const std::size_t last = alphas.size() - 1;
    const ParamVec& alpha = alphas[last];
    std::size_t m = 0;
    for (std::size_t k = 0; k <= last; ++k)
        for (std::size_t i = 0; i < dim; ++i)
            if (!(alphas[k][i] > alpha[i] / 2)) m = k;
    double log_beta_n = 0, log_beta_m = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        log_beta_n += std::log(alpha[i]);
        log_beta_m += std::log(alphas[std::min(m, last)][i]);
    }
    const double A = std::exp(0.5 * (log_beta_n - log_beta_m));
    const double G = *p.f->lipschitz_G;
    const double bound = 2 * A * p.D * std::pow(G, 1.5) / min_elem(alpha) / std::sqrt(double(n - m - 1));
    double min_gap = INFINITY;
    std::size_t first_min = 0;
    for (std::size_t k = m + 1; k < gaps.size(); ++k)
        if (gaps[k] < min_gap) min_gap = gaps[k], first_min = k;
    return {contraction && min_gap <= bound,
            std::string(contraction ? "" : "contraction violated; ") +
                fmt("min gap %.3g (first at step ", min_gap) + std::to_string(first_min) +
                fmt(") vs bound %.3g, A %.6g", bound, A) + ", m " + std::to_string(m)};
}

Outcome ps_da_convergence() {
    const L1Problem p = l1_problem();
    std::string detail;
    bool pass = true;
    for (double mu : {0.0, 0.9}) {
        ScalingState scaling = ScalingState::amsgrad(10);
        PsDaState s = PsDaState::init(p.w0, 1e-6, mu);
        ParamVec w = p.w0;
        const double initial = p.f->value(w);
        double min_gap = initial;
        for (std::size_t k = 0; k < 100000; ++k) {
            const ParamVec g = p.f->gradient(w);
            w = ps_da_sgd_step(w, g, s, scaling.update_and_get_alpha(g), gamma(Schedule::poly(), k)).w;
            min_gap = std::min(min_gap, p.f->value(w));
        }
        pass &= min_gap <= 1e-2 * initial;
        detail += fmt("momentum %.1f: min gap / initial %.3g; ", mu, min_gap / initial);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

std::size_t steps_to_target(Optimizer& opt, const Objective& f, std::size_t cap, double target) {
    ParamVec w = f.initial_point();
    for (std::size_t k = 0; k < cap; ++k) {
        const double v = f.value(w);
        if (v <= target) return k;
        w = opt.step(w, f.gradient(w), v, 1.0).w;
        if (!all_finite(w)) return cap;
    }
    return f.value(w) <= target ? cap : cap + 1;
}

Outcome adaptive_advantage() {
    const std::size_t cap = 100000;
    Rng rng(3);
    const auto f = ill_conditioned_quadratic(10, 1e4, rng.normal_vec(10));
    OptimizerConfig ps;
    ps.kind = OptimizerKind::PsDaSgd;
    ps.momentum = 0.9;
    ScalingConfig adam;
    adam.rule = ScalingRule::Adam;
    auto ps_opt = make_optimizer(ps, adam, 10, f->f_star);
    const std::size_t ps_steps = steps_to_target(*ps_opt, *f, cap, 1e-6);

    bool pass = ps_steps <= cap;
    std::string detail = "ps_da_sgd " + std::to_string(ps_steps);
    for (double mu : {0.0, 0.9}) {
        OptimizerConfig base;
        base.kind = OptimizerKind::DaSgd;
        base.momentum = mu;
        auto opt = make_optimizer(base, {}, 10, f->f_star);
        const std::size_t steps = std::min(steps_to_target(*opt, *f, cap, 1e-6), cap);
        pass &= ps_steps * 10 <= steps;
        detail += ", dadapt_sgd(momentum " + fmt("%.1f", mu) + ") " + std::to_string(steps);
    }
    return {pass, detail + " steps to f <= 1e-6"};
}

Outcome tuned_parity() {
    ExperimentConfig base;
    base.objective.kind = "logistic";
    base.objective.dataset.samples = 1000;
    base.objective.dataset.features = 20;
    base.objective.seed = 42;
    base.steps = 5000;

    ExperimentConfig adam = base;
    adam.optimizer.kind = OptimizerKind::Adam;
    const TuneResult best = tune_learning_rate(adam, default_lr_grid());

    ExperimentConfig sps = base;
    sps.optimizer.kind = OptimizerKind::PsSps;
    const double l_sps = execute_experiment(sps).summary.final_loss;

    ExperimentConfig da = base;
    da.optimizer.kind = OptimizerKind::PsDaSgd;
    da.optimizer.momentum = 0.9;
    const double l_da = execute_experiment(da).summary.final_loss;

    const double r_sps = std::abs(l_sps - best.final_loss) / best.final_loss;
    const double r_da = std::abs(l_da - best.final_loss) / best.final_loss;
    std::ostringstream d;
    d.precision(10);
    d << "adam(lr " << best.lr << ") " << best.final_loss << ", ps_sps " << l_sps << " (" << r_sps * 100
      << "%), ps_da_sgd " << l_da << " (" << r_da * 100 << "%)";
    return {r_sps <= 0.05 && r_da <= 0.05, d.str()};
}

Outcome gradient_oracle() {
    Rng rng(110);
    DatasetSpec ds;
    ds.samples = 200;
    ds.features = 8;
    ds.seed = 5;
    const SyntheticDataset data = make_dataset(ds);
    const std::vector<ObjectivePtr> objs = {quadratic(rng.uniform_vec(10, 0.5, 5.0), rng.normal_vec(10)),
                                            ill_conditioned_quadratic(10, 1e4, rng.normal_vec(10)),
                                            l1_lipschitz(rng.normal_vec(10)), logistic_regression(data),
                                            tiny_mlp(data, 6, 4)};
    double worst = 0.0;
    for (const auto& f : objs) {
        for (int t = 0; t < 10; ++t) {
            ParamVec w = add(f->initial_point(), rng.normal_vec(f->dim()));
            if (f->name() == "l1")  // off the kinks
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (std::abs(w[i] - (*f->w_star)[i]) < 1e-3) w[i] += 0.01;
            const ParamVec ga = f->gradient(w), gf = finite_diff_grad(*f, w, 1e-5);
            worst = std::max(worst, norm2(sub(ga, gf)) / std::max({norm2(ga), norm2(gf), 1e-300}));
        }
    }
    return {worst <= 1e-5, fmt("max relative error %.3g over 5 objectives", worst)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "lrfree_acceptance_det";
    std::filesystem::remove_all(root);
    const char* cfg = R"({"name": "det",
        "objective": {"kind": "mlp", "samples": 200, "features": 6, "hidden": 5, "seed": 9},
        "optimizer": {"kind": "ps_da_sgd", "momentum": 0.9},
        "scaling": {"rule": "adam"}, "schedule": {"kind": "cosine"},
        "steps": 2000, "batch_size": 16, "seed": 11})";
    run_experiment(parse_config_text(cfg), root / "a");
    run_experiment(parse_config_text(cfg), root / "b");
    const std::string a = slurp(root / "a" / "det.csv"), b = slurp(root / "b" / "det.csv");
    return {!a.empty() && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
    criterion(1, "PS-SPS step equals SPS on the reparametrized objective", 1, algebraic_equivalence);
    criterion(2, "naive scaling displaces by alpha^2, PS-SPS by 1", 1, naive_failure);
    criterion(3, "SPS solves the isotropic quadratic in one step", 1, one_step_sps);
    criterion(4, "PS-DA-SGD first-step hand trace", 1, hand_trace);
    criterion(5, "d non-decreasing and bounded (l1, AMSGrad)", 10, d_bound);
    criterion(6, "PS-SPS rate bound and per-step contraction (l1, AMSGrad, c=1)", 10, ps_sps_rate);
    criterion(7, "PS-DA-SGD with polynomial schedule reaches 1% of the initial gap", 30, ps_da_convergence);
    criterion(8, "PS-DA-SGD needs <= 1/10 the steps of D-Adapt SGD (condition 1e4)", 0, adaptive_advantage);
    criterion(9, "PS-SPS and PS-DA-SGD within 5% of grid-tuned Adam (logistic)", 60, tuned_parity);
    criterion(10, "analytic gradients match central differences", 5, gradient_oracle);
    criterion(11, "identical configs give byte-identical traces", 0, determinism);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
