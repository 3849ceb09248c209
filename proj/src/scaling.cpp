#include "lrfree/scaling.hpp"

#include <cmath>

namespace lrfree {

std::string_view to_string(ScalingRule rule) {
    switch (rule) {
        case ScalingRule::Identity: return "identity";
        case ScalingRule::Constant: return "constant";
        case ScalingRule::Adam: return "adam";
        case ScalingRule::AMSGrad: return "amsgrad";
    }
    return "unknown";
}

ScalingRule parse_scaling_rule(std::string_view name) {
    if (name == "identity") return ScalingRule::Identity;
    if (name == "constant") return ScalingRule::Constant;
    if (name == "adam") return ScalingRule::Adam;
    if (name == "amsgrad") return ScalingRule::AMSGrad;
    throw UsageError("unknown scaling rule '" + std::string(name) + "'");
}

ScalingState::ScalingState(ScalingRule rule, std::size_t dim, double beta2, double epsilon)
    : rule_(rule), dim_(dim), beta2_(beta2), epsilon_(epsilon), v_(dim), v_max_(dim) {
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw UsageError("scaling: beta2 must lie in (0, 1)");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw UsageError("scaling: epsilon must be finite and non-negative");
}

ScalingState ScalingState::identity(std::size_t dim) {
    return ScalingState(ScalingRule::Identity, dim, kDefaultBeta2, kDefaultEpsilon);
}

ScalingState ScalingState::constant(ParamVec alpha) {
    if (!all_positive(alpha) || !all_finite(alpha))
        throw DomainError("constant scaling: alpha must be finite and strictly positive");
    ScalingState s(ScalingRule::Constant, alpha.size(), kDefaultBeta2, kDefaultEpsilon);
    s.constant_ = std::move(alpha);
    return s;
}

ScalingState ScalingState::adam(std::size_t dim, double beta2, double epsilon) {
    return ScalingState(ScalingRule::Adam, dim, beta2, epsilon);
}

ScalingState ScalingState::amsgrad(std::size_t dim, double beta2, double epsilon) {
    return ScalingState(ScalingRule::AMSGrad, dim, beta2, epsilon);
}

ParamVec ScalingState::update_and_get_alpha(const ParamVec& g) {
    if (g.size() != dim_) throw UsageError("scaling: gradient length does not match state");
    if (!all_finite(g)) throw DomainError("scaling: non-finite gradient");
    ++step_;

    switch (rule_) {
        case ScalingRule::Identity: return ParamVec(dim_, 1.0);
        case ScalingRule::Constant: return constant_;
        case ScalingRule::Adam:
        case ScalingRule::AMSGrad: break;
    }

    const double bias = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    ParamVec alpha(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
        double second = v_[i] / bias;
        if (rule_ == ScalingRule::AMSGrad) {
            v_max_[i] = std::max(v_max_[i], second);
            second = v_max_[i];
        }
        alpha[i] = std::sqrt(std::sqrt(second) + epsilon_);
    }
    return alpha;
}

ParamVec effective_preconditioner(const ParamVec& alpha) {
    if (!all_positive(alpha)) throw DomainError("effective_preconditioner: alpha must be positive");
    ParamVec out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = 1.0 / (alpha[i] * alpha[i]);
    return out;
}

}  // namespace lrfree
