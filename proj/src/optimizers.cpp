#include "lrfree/optimizers.hpp"

#include <cmath>

namespace lrfree {

namespace {

void require_finite_rate(double eta, const char* op) {
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw UsageError(std::string(op) + ": step size must be finite and non-negative");
}

void require_alpha(const ParamVec& alpha, const ParamVec& g, const char* op) {
    require_same_length(alpha, g, op);
    if (!all_positive(alpha) || !all_finite(alpha))
        throw DomainError(std::string(op) + ": alpha must be finite and strictly positive");
}

void require_gradient(const ParamVec& w, const ParamVec& g, const char* op) {
    require_same_length(w, g, op);
    if (!all_finite(g)) throw DomainError(std::string(op) + ": non-finite gradient");
}

StepResult skipped(const ParamVec& w) {
    StepResult r{w, {}};
    r.report.skipped = true;
    return r;
}

void record_alpha(StepReport& report, const ParamVec& alpha) {
    report.alpha_min = min_elem(alpha);
    report.alpha_max = max_elem(alpha);
}

double polyak_numerator(double f_val, const SpsState& state) {
    return std::max(0.0, f_val - state.f_star);
}

}  // namespace

ParamVec sgd_step(const ParamVec& w, const ParamVec& g, double eta) {
    require_finite_rate(eta, "sgd_step");
    require_same_length(w, g, "sgd_step");
    ParamVec out = w;
    axpy(-eta, g, out);
    return out;
}

AdamState AdamState::init(std::size_t dim, double beta1, double beta2, double epsilon) {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw UsageError("adam: beta1 must lie in [0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw UsageError("adam: beta2 must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw UsageError("adam: epsilon must be non-negative");
    return AdamState{beta1, beta2, epsilon, ParamVec(dim), ParamVec(dim), 0};
}

ParamVec adam_step(AdamState& state, const ParamVec& w, const ParamVec& g, double eta) {
    require_finite_rate(eta, "adam_step");
    require_gradient(w, g, "adam_step");
    require_same_length(state.m, g, "adam_step");
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);
    ParamVec out = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double mhat = state.m[i] / bias1;
        const double vhat = state.v[i] / bias2;
        const double denom = std::sqrt(vhat) + state.epsilon;
        if (denom > 0.0) out[i] -= eta * mhat / denom;
    }
    return out;
}

SpsState::SpsState(double c_, double f_star_) : c(c_), f_star(f_star_) {
    if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("sps: c must be positive");
    if (!std::isfinite(f_star)) throw UsageError("sps: f* must be finite");
}

std::optional<double> sps_lr(double f_val, const SpsState& state, const ParamVec& g) {
    const double denom = state.c * norm2_squared(g);
    if (!(denom > 0.0)) return std::nullopt;
    return polyak_numerator(f_val, state) / denom;
}

StepResult sps_step(const ParamVec& w, const ParamVec& g, double f_val, const SpsState& state) {
    require_gradient(w, g, "sps_step");
    const auto eta = sps_lr(f_val, state, g);
    if (!eta) return skipped(w);
    StepResult r{sgd_step(w, g, *eta), {}};
    r.report.eta = *eta;
    return r;
}

StepResult naive_scaled_sps_step(const ParamVec& w, const ParamVec& g, double f_val,
                                 const SpsState& state, const ParamVec& alpha) {
    require_gradient(w, g, "naive_scaled_sps_step");
    require_alpha(alpha, g, "naive_scaled_sps_step");
    const ParamVec u = ew_mul(g, effective_preconditioner(alpha));
    const auto eta = sps_lr(f_val, state, u);
    if (!eta) return skipped(w);
    StepResult r{sgd_step(w, u, *eta), {}};
    r.report.eta = *eta;
    record_alpha(r.report, alpha);
    return r;
}

StepResult ps_sps_step(const ParamVec& w, const ParamVec& g, double f_val,
                       const SpsState& state, const ParamVec& alpha) {
    require_gradient(w, g, "ps_sps_step");
    require_alpha(alpha, g, "ps_sps_step");
    const ParamVec g_scaled = ew_div(g, alpha);
    const auto eta = sps_lr(f_val, state, g_scaled);
    if (!eta) {
        StepResult r = skipped(w);
        record_alpha(r.report, alpha);
        return r;
    }
    StepResult r{w, {}};
    for (std::size_t i = 0; i < w.size(); ++i) r.w[i] -= *eta * g_scaled[i] / alpha[i];
    r.report.eta = *eta;
    record_alpha(r.report, alpha);
    return r;
}

DaSgdState DaSgdState::init(const ParamVec& w0, double d0, double mu) {
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw UsageError("d-adaptation: d0 must be positive");
    if (!(mu >= 0.0 && mu < 1.0)) throw UsageError("d-adaptation: momentum must lie in [0, 1)");
    DaSgdState s;
    s.d = d0;
    s.mu = mu;
    s.s = ParamVec(w0.size());
    s.w0 = w0;
    s.displacement = ParamVec(w0.size());
    s.z = ParamVec(w0.size());
    return s;
}

StepResult da_sgd_step(const ParamVec& w, const ParamVec& g, DaSgdState& state, double gamma) {
    require_finite_rate(gamma, "da_sgd_step");
    require_gradient(w, g, "da_sgd_step");
    require_same_length(state.w0, w, "da_sgd_step");
    if (!state.g0_norm) {
        const double n = norm2(g);
        if (n == 0.0) {
            ++state.k;
            StepResult r = skipped(w);
            r.report.d = state.d;
            return r;
        }
        state.g0_norm = n;
    }

    const double eta = state.d * gamma / *state.g0_norm;
    StepResult r{w, {}};
    const double progress = -inner(g, state.displacement);  // <g, w0 - w>
    for (std::size_t i = 0; i < w.size(); ++i) {
        state.z[i] = state.mu * state.z[i] + g[i];
        r.w[i] -= eta * state.z[i];
        state.displacement[i] -= eta * state.z[i];
    }

    const double s_norm = norm2(state.s);
    const double d_hat = s_norm > 0.0 ? state.m / s_norm : state.d;
    state.d = std::max(d_hat, state.d);
    state.m += eta * progress;
    axpy(eta, g, state.s);
    ++state.k;

    r.report.eta = eta;
    r.report.d = state.d;
    r.report.extras["d_hat"] = d_hat;
    return r;
}

PsDaState PsDaState::init(const ParamVec& w0, double d0, double mu) {
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw UsageError("d-adaptation: d0 must be positive");
    if (!(mu >= 0.0 && mu < 1.0)) throw UsageError("d-adaptation: momentum must lie in [0, 1)");
    const std::size_t n = w0.size();
    PsDaState s;
    s.d = d0;
    s.mu = mu;
    s.s = ParamVec(n);
    s.g_max = ParamVec(n);
    s.alpha_max = ParamVec(n);
    s.w0 = w0;
    s.displacement = ParamVec(n);
    s.z = ParamVec(n);
    return s;
}

StepResult ps_da_sgd_step(const ParamVec& w, const ParamVec& g, PsDaState& state,
                          const ParamVec& alpha, double gamma) {
    require_finite_rate(gamma, "ps_da_sgd_step");
    require_gradient(w, g, "ps_da_sgd_step");
    require_alpha(alpha, g, "ps_da_sgd_step");
    require_same_length(state.w0, w, "ps_da_sgd_step");
    const std::size_t n = w.size();

    state.alpha_max = ew_max(state.alpha_max, alpha);
    double ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) ratio = std::max(ratio, alpha[i] / state.alpha_max[i]);
    const double d_scaled = state.d * ratio;

    state.g_max = ew_max(state.g_max, ew_abs(g));
    const double gm_norm = norm2(ew_div(state.g_max, state.alpha_max));
    if (!(gm_norm > 0.0)) {
        ++state.k;
        StepResult r = skipped(w);
        r.report.d = state.d;
        record_alpha(r.report, alpha);
        return r;
    }

    const double eta = d_scaled * gamma / gm_norm;
    // <g o alpha^-1, (w0 - w) o alpha> == <g, w0 - w>
    const double progress = -inner(g, state.displacement);
    StepResult r{w, {}};
    for (std::size_t i = 0; i < n; ++i) {
        state.z[i] = state.mu * state.z[i] + g[i] / alpha[i];
        const double delta = eta * state.z[i] / alpha[i];
        r.w[i] -= delta;
        state.displacement[i] -= delta;
    }

    const double s_norm = norm2(ew_div(state.s, alpha));
    const double d_hat = s_norm > 0.0 ? state.m / s_norm : state.d;
    state.d = std::max(d_hat, state.d);
    state.m += eta * progress;
    axpy(eta, g, state.s);
    ++state.k;

    r.report.eta = eta;
    r.report.d = state.d;
    r.report.extras["d_hat"] = d_hat;
    r.report.extras["d_scaled"] = d_scaled;
    r.report.extras["g_max_scaled_norm"] = gm_norm;
    record_alpha(r.report, alpha);
    return r;
}

// ----------------------------------------------------------------------------

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::Sps: return "sps";
        case OptimizerKind::NaiveScaledSps: return "naive_sps";
        case OptimizerKind::PsSps: return "ps_sps";
        case OptimizerKind::DaSgd: return "dadapt_sgd";
        case OptimizerKind::PsDaSgd: return "ps_da_sgd";
    }
    return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    for (auto kind : {OptimizerKind::Sgd, OptimizerKind::Adam, OptimizerKind::Sps,
                      OptimizerKind::NaiveScaledSps, OptimizerKind::PsSps, OptimizerKind::DaSgd,
                      OptimizerKind::PsDaSgd})
        if (to_string(kind) == name) return kind;
    throw UsageError("unknown optimizer '" + std::string(name) + "'");
}

bool uses_scaling(OptimizerKind kind) {
    return kind == OptimizerKind::NaiveScaledSps || kind == OptimizerKind::PsSps ||
           kind == OptimizerKind::PsDaSgd;
}

namespace {

class SgdOptimizer final : public Optimizer {
public:
    explicit SgdOptimizer(double lr) : lr_(lr) { require_finite_rate(lr, "sgd"); }
    OptimizerKind kind() const override { return OptimizerKind::Sgd; }
    StepResult step(const ParamVec& w, const ParamVec& g, double, double gamma) override {
        StepResult r{sgd_step(w, g, lr_ * gamma), {}};
        r.report.eta = lr_ * gamma;
        return r;
    }

private:
    double lr_;
};

class AdamOptimizer final : public Optimizer {
public:
    AdamOptimizer(const OptimizerConfig& c, std::size_t dim)
        : lr_(c.lr), state_(AdamState::init(dim, c.beta1, c.beta2, c.epsilon)) {
        require_finite_rate(lr_, "adam");
    }
    OptimizerKind kind() const override { return OptimizerKind::Adam; }
    StepResult step(const ParamVec& w, const ParamVec& g, double, double gamma) override {
        StepResult r{adam_step(state_, w, g, lr_ * gamma), {}};
        r.report.eta = lr_ * gamma;
        return r;
    }

private:
    double lr_;
    AdamState state_;
};

class SpsOptimizer final : public Optimizer {
public:
    SpsOptimizer(OptimizerKind kind, SpsState sps, ScalingState scaling)
        : kind_(kind), sps_(sps), scaling_(std::move(scaling)) {}
    OptimizerKind kind() const override { return kind_; }
    StepResult step(const ParamVec& w, const ParamVec& g, double f_val, double) override {
        if (kind_ == OptimizerKind::Sps) return sps_step(w, g, f_val, sps_);
        const ParamVec alpha = scaling_.update_and_get_alpha(g);
        if (kind_ == OptimizerKind::NaiveScaledSps)
            return naive_scaled_sps_step(w, g, f_val, sps_, alpha);
        return ps_sps_step(w, g, f_val, sps_, alpha);
    }

private:
    OptimizerKind kind_;
    SpsState sps_;
    ScalingState scaling_;
};

class DaSgdOptimizer final : public Optimizer {
public:
    DaSgdOptimizer(double d0, double mu) : d0_(d0), mu_(mu) {
        DaSgdState::init(ParamVec{}, d0, mu);  // validates
    }
    OptimizerKind kind() const override { return OptimizerKind::DaSgd; }
    StepResult step(const ParamVec& w, const ParamVec& g, double, double gamma) override {
        if (!state_) state_ = DaSgdState::init(w, d0_, mu_);
        return da_sgd_step(w, g, *state_, gamma);
    }

private:
    double d0_;
    double mu_;
    std::optional<DaSgdState> state_;
};

class PsDaSgdOptimizer final : public Optimizer {
public:
    PsDaSgdOptimizer(double d0, double mu, ScalingState scaling)
        : d0_(d0), mu_(mu), scaling_(std::move(scaling)) {
        PsDaState::init(ParamVec{}, d0, mu);
    }
    OptimizerKind kind() const override { return OptimizerKind::PsDaSgd; }
    StepResult step(const ParamVec& w, const ParamVec& g, double, double gamma) override {
        if (!state_) state_ = PsDaState::init(w, d0_, mu_);
        const ParamVec alpha = scaling_.update_and_get_alpha(g);
        return ps_da_sgd_step(w, g, *state_, alpha, gamma);
    }

private:
    double d0_;
    double mu_;
    ScalingState scaling_;
    std::optional<PsDaState> state_;
};

}  // namespace

ScalingState make_scaling(const ScalingConfig& config, std::size_t dim) {
    switch (config.rule) {
        case ScalingRule::Identity: return ScalingState::identity(dim);
        case ScalingRule::Constant: {
            if (config.constant.size() == 1) return ScalingState::constant(ParamVec(dim, config.constant[0]));
            if (config.constant.size() != dim)
                throw UsageError("constant scaling: expected 1 or " + std::to_string(dim) + " values");
            return ScalingState::constant(config.constant);
        }
        case ScalingRule::Adam: return ScalingState::adam(dim, config.beta2, config.epsilon);
        case ScalingRule::AMSGrad: return ScalingState::amsgrad(dim, config.beta2, config.epsilon);
    }
    throw UsageError("unknown scaling rule");
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config,
                                          const ScalingConfig& scaling, std::size_t dim,
                                          std::optional<double> f_star) {
    switch (config.kind) {
        case OptimizerKind::Sgd: return std::make_unique<SgdOptimizer>(config.lr);
        case OptimizerKind::Adam: return std::make_unique<AdamOptimizer>(config, dim);
        case OptimizerKind::Sps:
        case OptimizerKind::NaiveScaledSps:
        case OptimizerKind::PsSps: {
            if (!f_star) throw UsageError("Polyak step size requires an objective with known f*");
            ScalingState s = config.kind == OptimizerKind::Sps ? ScalingState::identity(dim)
                                                               : make_scaling(scaling, dim);
            return std::make_unique<SpsOptimizer>(config.kind, SpsState(config.c, *f_star),
                                                  std::move(s));
        }
        case OptimizerKind::DaSgd:
            return std::make_unique<DaSgdOptimizer>(config.d0, config.momentum);
        case OptimizerKind::PsDaSgd:
            return std::make_unique<PsDaSgdOptimizer>(config.d0, config.momentum,
                                                      make_scaling(scaling, dim));
    }
    throw UsageError("unknown optimizer kind");
}

}  // namespace lrfree
