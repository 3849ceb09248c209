#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "lrfree/numerics.hpp"
#include "lrfree/scaling.hpp"

namespace lrfree {

/// Observables emitted by one optimizer step.
struct StepReport {
    double eta = 0.0;
    std::optional<double> d;
    bool skipped = false;  // zero denominator: counter advanced, parameters untouched
    double alpha_min = 1.0;
    double alpha_max = 1.0;
    std::map<std::string, double> extras;
};

struct StepResult {
    ParamVec w;
    StepReport report;
};

// ----------------------------------------------------------------------------
// Baselines

ParamVec sgd_step(const ParamVec& w, const ParamVec& g, double eta);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    ParamVec m;
    ParamVec v;
    std::size_t t = 0;

    static AdamState init(std::size_t dim, double beta1 = 0.9, double beta2 = 0.999,
                          double epsilon = 1e-8);
};

/// Bias-corrected Adam: w - eta * mhat / (sqrt(vhat) + eps).
ParamVec adam_step(AdamState& state, const ParamVec& w, const ParamVec& g, double eta);

// ----------------------------------------------------------------------------
// Polyak step size family

struct SpsState {
    double c = 0.5;
    double f_star = 0.0;

    SpsState() = default;
    SpsState(double c_, double f_star_);
};

/// max(0, f - f*) / (c ||g||^2), or nullopt when ||g|| = 0 (skip the step).
std::optional<double> sps_lr(double f_val, const SpsState& state, const ParamVec& g);

StepResult sps_step(const ParamVec& w, const ParamVec& g, double f_val, const SpsState& state);

/// Substitutes g o alpha^-2 for the gradient in the Polyak formula. The
/// resulting displacement scales with alpha^2, so this step is not invariant
/// under reparametrization. Kept as a reference failure case.
StepResult naive_scaled_sps_step(const ParamVec& w, const ParamVec& g, double f_val,
                                 const SpsState& state, const ParamVec& alpha);

/// Parameter-scaled SPS. With g' = g o alpha^-1 the Polyak step is taken in
/// the scaled coordinates w' = w o alpha and mapped back, which amounts to
/// w - eta * g o alpha^-2 with eta = max(0, f - f*) / (c ||g'||^2).
StepResult ps_sps_step(const ParamVec& w, const ParamVec& g, double f_val,
                       const SpsState& state, const ParamVec& alpha);

// ----------------------------------------------------------------------------
// D-Adaptation family

inline constexpr double kDefaultD0 = 1e-6;

/// D-Adapt SGD: eta_k = d_k gamma_k / ||g_0||.
struct DaSgdState {
    double d = kDefaultD0;
    double m = 0.0;
    double mu = 0.0;
    ParamVec s;
    ParamVec w0;
    ParamVec displacement;  // w_k - w0, accumulated from the updates
    ParamVec z;
    std::optional<double> g0_norm;
    std::size_t k = 0;

    static DaSgdState init(const ParamVec& w0, double d0 = kDefaultD0, double mu = 0.0);
};

StepResult da_sgd_step(const ParamVec& w, const ParamVec& g, DaSgdState& state, double gamma);

/// Parameter-scaled D-Adapt SGD state. `g_max` and `alpha_max` are running
/// element-wise maxima of |g| and alpha; `z` is the heavy-ball buffer on the
/// scaled gradient. `displacement` tracks w_k - w0 as a sum of steps, so the
/// step functions expect to be fed their own previous output.
struct PsDaState {
    double d = kDefaultD0;
    double m = 0.0;
    double mu = 0.0;
    ParamVec s;
    ParamVec g_max;
    ParamVec alpha_max;
    ParamVec w0;
    ParamVec displacement;
    ParamVec z;
    std::size_t k = 0;

    static PsDaState init(const ParamVec& w0, double d0 = kDefaultD0, double mu = 0.0);
};

/// One step of parameter-scaled D-Adapt SGD. In order:
///   alpha_M <- max(alpha_M, alpha)
///   d'      <- d * max(alpha / alpha_M)
///   g_M     <- max(g_M, |g|)
///   eta     <- d' gamma / ||g_M / alpha_M||
///   z       <- mu z + g / alpha;   w <- w - eta z / alpha
///   dhat    <- m / ||s / alpha||   (dhat = d when s = 0)
///   d       <- max(dhat, d)
///   m       <- m + eta <g, w0 - w>
///   s       <- s + eta g
/// The m/s/d recurrences use the raw gradient; momentum only enters the
/// parameter update. w0 - w is taken from the accumulated displacement
/// rather than by subtraction, which would lose most significant digits
/// while d is still tiny.
StepResult ps_da_sgd_step(const ParamVec& w, const ParamVec& g, PsDaState& state,
                          const ParamVec& alpha, double gamma);

// ----------------------------------------------------------------------------
// Uniform step interface

enum class OptimizerKind { Sgd, Adam, Sps, NaiveScaledSps, PsSps, DaSgd, PsDaSgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

/// Owns all mutable state of one run. `gamma` is the schedule multiplier;
/// SGD and Adam apply it to their learning rate, the Polyak methods ignore it.
class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual OptimizerKind kind() const = 0;
    virtual StepResult step(const ParamVec& w, const ParamVec& g, double f_val, double gamma) = 0;
};

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::PsDaSgd;
    double lr = 1e-3;   // SGD / Adam
    double beta1 = 0.9; // Adam
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double c = 0.5;     // Polyak family
    double d0 = kDefaultD0;
    double momentum = 0.0;
};

struct ScalingConfig {
    ScalingRule rule = ScalingRule::Adam;
    double beta2 = ScalingState::kDefaultBeta2;
    double epsilon = ScalingState::kDefaultEpsilon;
    ParamVec constant;  // Constant rule only; a length-1 vector is broadcast
};

ScalingState make_scaling(const ScalingConfig& config, std::size_t dim);

/// `f_star` is required by the Polyak family and ignored otherwise.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config,
                                          const ScalingConfig& scaling, std::size_t dim,
                                          std::optional<double> f_star);

bool uses_scaling(OptimizerKind kind);

}  // namespace lrfree
