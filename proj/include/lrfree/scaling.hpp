#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "lrfree/numerics.hpp"

namespace lrfree {

enum class ScalingRule { Identity, Constant, Adam, AMSGrad };

std::string_view to_string(ScalingRule rule);
ScalingRule parse_scaling_rule(std::string_view name);

/// Running statistics that produce the per-coordinate scale factor alpha_k
/// used by the parameter-scaled optimizers.
///
/// Adam:    v <- b2*v + (1-b2)*g^2,  vhat = v/(1-b2^k),  alpha^2 = sqrt(vhat) + eps
/// AMSGrad: as Adam, with vhat replaced by its running element-wise maximum,
///          which makes alpha non-decreasing in k.
///
/// eps sits in the preconditioner denominator, so alpha^-2 = 1/(sqrt(vhat)+eps)
/// is exactly the conventional Adam denominator.
class ScalingState {
public:
    static constexpr double kDefaultBeta2 = 0.999;
    static constexpr double kDefaultEpsilon = 1e-8;

    static ScalingState identity(std::size_t dim);
    static ScalingState constant(ParamVec alpha);
    static ScalingState adam(std::size_t dim, double beta2 = kDefaultBeta2,
                             double epsilon = kDefaultEpsilon);
    static ScalingState amsgrad(std::size_t dim, double beta2 = kDefaultBeta2,
                                double epsilon = kDefaultEpsilon);

    /// Feeds gradient g_k and returns alpha_k. Throws DomainError on a
    /// non-finite gradient and UsageError on a length mismatch.
    ParamVec update_and_get_alpha(const ParamVec& g);

    ScalingRule rule() const noexcept { return rule_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t step() const noexcept { return step_; }
    double beta2() const noexcept { return beta2_; }
    double epsilon() const noexcept { return epsilon_; }
    const ParamVec& v() const noexcept { return v_; }
    const ParamVec& v_max() const noexcept { return v_max_; }

private:
    ScalingState(ScalingRule rule, std::size_t dim, double beta2, double epsilon);

    ScalingRule rule_;
    std::size_t dim_;
    double beta2_;
    double epsilon_;
    std::size_t step_ = 0;
    ParamVec v_;
    ParamVec v_max_;
    ParamVec constant_;
};

/// alpha^-2 element-wise: the factor a plain gradient step is multiplied by
/// when taken in the alpha-scaled parameter space and mapped back.
ParamVec effective_preconditioner(const ParamVec& alpha);

}  // namespace lrfree
