#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrfree/numerics.hpp"

namespace lrfree {

/// Differentiable test problem. Implementations are immutable after
/// construction and safe to evaluate concurrently.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual double value(const ParamVec& w) const = 0;
    virtual ParamVec gradient(const ParamVec& w) const = 0;

    /// Number of samples available for minibatching; 0 for deterministic
    /// objectives, which ignore batches.
    virtual std::size_t num_samples() const { return 0; }
    virtual double batch_value(const ParamVec& w, std::span<const std::size_t> batch) const;
    virtual ParamVec batch_gradient(const ParamVec& w, std::span<const std::size_t> batch) const;

    /// Default starting point for runs that do not override it.
    virtual ParamVec initial_point() const { return ParamVec(dim()); }

    std::optional<double> f_star;
    std::optional<ParamVec> w_star;
    std::optional<double> lipschitz_G;  // bound on the gradient norm
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// f(w) = 1/2 sum_i diag_i (w_i - wstar_i)^2
ObjectivePtr quadratic(ParamVec diag, ParamVec w_star);
/// Diagonal quadratic whose curvatures are log-spaced from 1 to `condition`.
ObjectivePtr ill_conditioned_quadratic(std::size_t dim, double condition, ParamVec w_star);

/// f(w) = sum_i |w_i - wstar_i| with subgradient sign(w - wstar), sign(0) = 0.
ObjectivePtr l1_lipschitz(ParamVec w_star);

struct DatasetSpec {
    std::size_t samples = 1000;
    std::size_t features = 20;
    /// Standard deviation of the label noise added to the true score.
    /// Zero together with margin > 0 yields a separable set.
    double noise = 0.5;
    double margin = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const DatasetSpec&) const = default;
};

/// Gaussian features with +-1 labels, regenerated bit-exactly from the spec.
struct SyntheticDataset {
    DatasetSpec spec;
    std::vector<double> features;  // row-major, samples x features
    std::vector<double> labels;    // +1 / -1

    std::size_t samples() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return spec.features; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(features).subspan(i * spec.features, spec.features);
    }
};

SyntheticDataset make_dataset(const DatasetSpec& spec);

/// Mean logistic loss log(1 + exp(-y <x, w>)). For non-separable data the
/// optimal value is computed at construction by damped Newton iteration;
/// separable data gets f* = 0 (the infimum).
ObjectivePtr logistic_regression(SyntheticDataset dataset);

/// One tanh hidden layer followed by a two-class softmax cross-entropy.
/// Parameter layout: W1 (hidden x features, row-major), b1, W2 (2 x hidden), b2.
/// f* = 0 is used as a lower bound.
ObjectivePtr tiny_mlp(SyntheticDataset dataset, std::size_t hidden, std::uint64_t seed);

/// f'(w') = f(w' o alpha^-1): the objective seen in alpha-scaled coordinates.
ObjectivePtr reparametrized(ObjectivePtr base, ParamVec alpha);

/// Central differences (f(w + h e_i) - f(w - h e_i)) / 2h.
ParamVec finite_diff_grad(const Objective& obj, const ParamVec& w, double h);

}  // namespace lrfree
