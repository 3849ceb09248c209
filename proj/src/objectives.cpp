#include "lrfree/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrfree {

double Objective::batch_value(const ParamVec& w, std::span<const std::size_t>) const {
    return value(w);
}

ParamVec Objective::batch_gradient(const ParamVec& w, std::span<const std::size_t>) const {
    return gradient(w);
}

namespace {

void require_dim(const Objective& obj, const ParamVec& w) {
    if (w.size() != obj.dim())
        throw UsageError(obj.name() + ": expected " + std::to_string(obj.dim()) +
                         " parameters, got " + std::to_string(w.size()));
}

void require_batch(std::span<const std::size_t> batch, std::size_t samples) {
    if (batch.empty()) throw UsageError("empty batch");
    for (std::size_t i : batch)
        if (i >= samples) throw UsageError("batch index out of range");
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// 1 / (1 + exp(-x))
double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double dot(std::span<const double> a, const ParamVec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// ---------------------------------------------------------------------------

class Quadratic final : public Objective {
public:
    Quadratic(ParamVec diag, ParamVec center) : diag_(std::move(diag)) {
        require_same_length(diag_, center, "quadratic");
        if (!all_positive(diag_) || !all_finite(diag_))
            throw DomainError("quadratic: curvatures must be finite and positive");
        f_star = 0.0;
        w_star = std::move(center);
    }

    std::string name() const override { return "quadratic"; }
    std::size_t dim() const override { return diag_.size(); }

    double value(const ParamVec& w) const override {
        require_dim(*this, w);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double r = w[i] - (*w_star)[i];
            acc += diag_[i] * r * r;
        }
        return 0.5 * acc;
    }

    ParamVec gradient(const ParamVec& w) const override {
        require_dim(*this, w);
        ParamVec g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = diag_[i] * (w[i] - (*w_star)[i]);
        return g;
    }

private:
    ParamVec diag_;
};

class L1 final : public Objective {
public:
    explicit L1(ParamVec center) {
        if (center.empty()) throw UsageError("l1_lipschitz: dimension must be positive");
        f_star = 0.0;
        lipschitz_G = std::sqrt(static_cast<double>(center.size()));
        w_star = std::move(center);
    }

    std::string name() const override { return "l1"; }
    std::size_t dim() const override { return w_star->size(); }

    double value(const ParamVec& w) const override {
        require_dim(*this, w);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += std::abs(w[i] - (*w_star)[i]);
        return acc;
    }

    ParamVec gradient(const ParamVec& w) const override {
        require_dim(*this, w);
        ParamVec g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double r = w[i] - (*w_star)[i];
            g[i] = (r > 0.0) - (r < 0.0);
        }
        return g;
    }
};

// ---------------------------------------------------------------------------

class Logistic final : public Objective {
public:
    explicit Logistic(SyntheticDataset data) : data_(std::move(data)) {
        if (data_.samples() == 0 || data_.dim() == 0)
            throw UsageError("logistic_regression: dataset must be non-empty");
        all_.resize(data_.samples());
        std::iota(all_.begin(), all_.end(), std::size_t{0});
        if (separable()) f_star = 0.0;  // infimum, not attained
        else newton_minimum();
    }

    std::string name() const override { return "logistic"; }
    std::size_t dim() const override { return data_.dim(); }
    std::size_t num_samples() const override { return data_.samples(); }

    double value(const ParamVec& w) const override { return batch_value(w, all_); }
    ParamVec gradient(const ParamVec& w) const override { return batch_gradient(w, all_); }

    double batch_value(const ParamVec& w, std::span<const std::size_t> batch) const override {
        require_dim(*this, w);
        require_batch(batch, data_.samples());
        double acc = 0.0;
        for (std::size_t i : batch) acc += softplus(-data_.labels[i] * dot(data_.row(i), w));
        return acc / static_cast<double>(batch.size());
    }

    ParamVec batch_gradient(const ParamVec& w, std::span<const std::size_t> batch) const override {
        require_dim(*this, w);
        require_batch(batch, data_.samples());
        ParamVec g(dim());
        for (std::size_t i : batch) {
            const double y = data_.labels[i];
            const auto x = data_.row(i);
            const double coef = -y * sigmoid(-y * dot(x, w));
            for (std::size_t j = 0; j < x.size(); ++j) g[j] += coef * x[j];
        }
        return scale(g, 1.0 / static_cast<double>(batch.size()));
    }

private:
    bool separable() const { return data_.spec.noise == 0.0 && data_.spec.margin > 0.0; }

    // Damped Newton with backtracking; the loss is strictly convex on
    // non-separable data so this converges to machine precision.
    // Sets f_star and w_star.
    void newton_minimum() {
        const std::size_t p = dim();
        const double n = static_cast<double>(data_.samples());
        ParamVec w(p);
        double f = value(w);
        for (int iter = 0; iter < 100; ++iter) {
            const ParamVec g = gradient(w);
            if (norm2(g) < 1e-15) break;
            std::vector<double> h(p * p, 0.0);
            for (std::size_t i = 0; i < data_.samples(); ++i) {
                const auto x = data_.row(i);
                const double s = sigmoid(data_.labels[i] * dot(x, w));
                const double weight = s * (1.0 - s) / n;
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t b = 0; b <= a; ++b) h[a * p + b] += weight * x[a] * x[b];
            }
            const ParamVec step = cholesky_solve(h, g, p);
            double t = 1.0;
            ParamVec trial = w;
            double f_trial = f;
            for (int ls = 0; ls < 60; ++ls) {
                trial = w;
                axpy(-t, step, trial);
                f_trial = value(trial);
                if (f_trial <= f) break;
                t *= 0.5;
            }
            if (!(f_trial <= f)) break;
            const bool stalled = f - f_trial <= 0.0;
            w = trial;
            f = f_trial;
            if (stalled) break;
        }
        f_star = f;
        w_star = w;
    }

    // Solves H x = b for symmetric positive definite H given by its lower triangle.
    static ParamVec cholesky_solve(std::vector<double> h, const ParamVec& b, std::size_t p) {
        for (std::size_t j = 0; j < p; ++j) {
            double d = h[j * p + j];
            for (std::size_t k = 0; k < j; ++k) d -= h[j * p + k] * h[j * p + k];
            if (!(d > 0.0)) throw DomainError("logistic_regression: singular Hessian");
            d = std::sqrt(d);
            h[j * p + j] = d;
            for (std::size_t i = j + 1; i < p; ++i) {
                double s = h[i * p + j];
                for (std::size_t k = 0; k < j; ++k) s -= h[i * p + k] * h[j * p + k];
                h[i * p + j] = s / d;
            }
        }
        ParamVec y(p);
        for (std::size_t i = 0; i < p; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= h[i * p + k] * y[k];
            y[i] = s / h[i * p + i];
        }
        ParamVec x(p);
        for (std::size_t i = p; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < p; ++k) s -= h[k * p + i] * x[k];
            x[i] = s / h[i * p + i];
        }
        return x;
    }

    SyntheticDataset data_;
    std::vector<std::size_t> all_;
};

// ---------------------------------------------------------------------------

class TinyMlp final : public Objective {
public:
    static constexpr std::size_t kClasses = 2;

    TinyMlp(SyntheticDataset data, std::size_t hidden, std::uint64_t seed)
        : data_(std::move(data)), hidden_(hidden), seed_(seed) {
        if (hidden_ == 0) throw UsageError("tiny_mlp: hidden must be at least 1");
        if (data_.samples() == 0) throw UsageError("tiny_mlp: dataset must be non-empty");
        all_.resize(data_.samples());
        std::iota(all_.begin(), all_.end(), std::size_t{0});
        f_star = 0.0;
    }

    std::string name() const override { return "mlp"; }
    std::size_t dim() const override {
        const std::size_t p = data_.dim();
        return hidden_ * p + hidden_ + kClasses * hidden_ + kClasses;
    }
    std::size_t num_samples() const override { return data_.samples(); }

    ParamVec initial_point() const override {
        Rng rng(seed_);
        const std::size_t p = data_.dim();
        ParamVec w(dim());
        const double s1 = 1.0 / std::sqrt(static_cast<double>(p));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
        for (std::size_t i = 0; i < hidden_ * p; ++i) w[i] = s1 * rng.normal();
        const std::size_t w2 = hidden_ * p + hidden_;
        for (std::size_t i = 0; i < kClasses * hidden_; ++i) w[w2 + i] = s2 * rng.normal();
        return w;
    }

    double value(const ParamVec& w) const override { return batch_value(w, all_); }
    ParamVec gradient(const ParamVec& w) const override { return batch_gradient(w, all_); }

    double batch_value(const ParamVec& w, std::span<const std::size_t> batch) const override {
        return evaluate(w, batch, nullptr);
    }

    ParamVec batch_gradient(const ParamVec& w, std::span<const std::size_t> batch) const override {
        ParamVec g(dim());
        evaluate(w, batch, &g);
        return g;
    }

private:
    double evaluate(const ParamVec& w, std::span<const std::size_t> batch, ParamVec* grad) const {
        require_dim(*this, w);
        require_batch(batch, data_.samples());
        const std::size_t p = data_.dim();
        const std::size_t off_b1 = hidden_ * p;
        const std::size_t off_w2 = off_b1 + hidden_;
        const std::size_t off_b2 = off_w2 + kClasses * hidden_;
        const double inv_n = 1.0 / static_cast<double>(batch.size());

        std::vector<double> act(hidden_);
        std::vector<double> dact(hidden_);
        double loss = 0.0;
        for (std::size_t idx : batch) {
            const auto x = data_.row(idx);
            for (std::size_t j = 0; j < hidden_; ++j) {
                double a = w[off_b1 + j];
                for (std::size_t k = 0; k < p; ++k) a += w[j * p + k] * x[k];
                act[j] = std::tanh(a);
            }
            double logits[kClasses];
            for (std::size_t c = 0; c < kClasses; ++c) {
                double z = w[off_b2 + c];
                for (std::size_t j = 0; j < hidden_; ++j) z += w[off_w2 + c * hidden_ + j] * act[j];
                logits[c] = z;
            }
            const double zmax = std::max(logits[0], logits[1]);
            double denom = 0.0;
            for (double z : logits) denom += std::exp(z - zmax);
            const double lse = zmax + std::log(denom);
            const std::size_t target = data_.labels[idx] > 0.0 ? 1 : 0;
            loss += lse - logits[target];

            if (!grad) continue;
            ParamVec& g = *grad;
            double dlogit[kClasses];
            for (std::size_t c = 0; c < kClasses; ++c)
                dlogit[c] = (std::exp(logits[c] - lse) - (c == target ? 1.0 : 0.0)) * inv_n;
            for (std::size_t c = 0; c < kClasses; ++c) {
                g[off_b2 + c] += dlogit[c];
                for (std::size_t j = 0; j < hidden_; ++j)
                    g[off_w2 + c * hidden_ + j] += dlogit[c] * act[j];
            }
            for (std::size_t j = 0; j < hidden_; ++j) {
                double dh = 0.0;
                for (std::size_t c = 0; c < kClasses; ++c) dh += w[off_w2 + c * hidden_ + j] * dlogit[c];
                dact[j] = dh * (1.0 - act[j] * act[j]);
                g[off_b1 + j] += dact[j];
                for (std::size_t k = 0; k < p; ++k) g[j * p + k] += dact[j] * x[k];
            }
        }
        return loss * inv_n;
    }

    SyntheticDataset data_;
    std::size_t hidden_;
    std::uint64_t seed_;
    std::vector<std::size_t> all_;
};

// ---------------------------------------------------------------------------

class Reparametrized final : public Objective {
public:
    Reparametrized(ObjectivePtr base, ParamVec alpha)
        : base_(std::move(base)), alpha_(std::move(alpha)), inv_alpha_(ew_inv(alpha_)) {
        if (alpha_.size() != base_->dim()) throw UsageError("reparametrized: alpha length mismatch");
        f_star = base_->f_star;
        if (base_->w_star) w_star = ew_mul(*base_->w_star, alpha_);
        if (base_->lipschitz_G) lipschitz_G = *base_->lipschitz_G * max_elem(inv_alpha_);
    }

    std::string name() const override { return base_->name() + "/scaled"; }
    std::size_t dim() const override { return base_->dim(); }
    std::size_t num_samples() const override { return base_->num_samples(); }
    ParamVec initial_point() const override { return ew_mul(base_->initial_point(), alpha_); }

    double value(const ParamVec& w) const override { return base_->value(unscale(w)); }
    ParamVec gradient(const ParamVec& w) const override {
        return ew_mul(base_->gradient(unscale(w)), inv_alpha_);
    }
    double batch_value(const ParamVec& w, std::span<const std::size_t> batch) const override {
        return base_->batch_value(unscale(w), batch);
    }
    ParamVec batch_gradient(const ParamVec& w, std::span<const std::size_t> batch) const override {
        return ew_mul(base_->batch_gradient(unscale(w), batch), inv_alpha_);
    }

private:
    // Division rather than multiplication by the stored inverse keeps the
    // mapping exact for power-of-two scales.
    ParamVec unscale(const ParamVec& w) const { return ew_div(w, alpha_); }

    ObjectivePtr base_;
    ParamVec alpha_;
    ParamVec inv_alpha_;
};

}  // namespace

ObjectivePtr quadratic(ParamVec diag, ParamVec w_star) {
    return std::make_shared<Quadratic>(std::move(diag), std::move(w_star));
}

ObjectivePtr ill_conditioned_quadratic(std::size_t dim, double condition, ParamVec w_star) {
    if (dim == 0) throw UsageError("quadratic: dimension must be positive");
    if (!(condition >= 1.0)) throw UsageError("quadratic: condition number must be >= 1");
    ParamVec diag(dim, 1.0);
    for (std::size_t i = 1; i < dim; ++i)
        diag[i] = std::pow(condition, static_cast<double>(i) / static_cast<double>(dim - 1));
    if (dim > 1) diag[dim - 1] = condition;
    return quadratic(std::move(diag), std::move(w_star));
}

ObjectivePtr l1_lipschitz(ParamVec w_star) { return std::make_shared<L1>(std::move(w_star)); }

SyntheticDataset make_dataset(const DatasetSpec& spec) {
    if (spec.samples == 0 || spec.features == 0)
        throw UsageError("dataset: samples and features must be positive");
    if (spec.noise < 0.0 || spec.margin < 0.0)
        throw UsageError("dataset: noise and margin must be non-negative");
    Rng rng(spec.seed);
    ParamVec direction = rng.normal_vec(spec.features);
    direction = scale(direction, 1.0 / norm2(direction));

    SyntheticDataset data{spec, {}, {}};
    data.features.reserve(spec.samples * spec.features);
    data.labels.reserve(spec.samples);
    for (std::size_t i = 0; i < spec.samples; ++i) {
        ParamVec x = rng.normal_vec(spec.features);
        const double score = inner(x, direction);
        const double noisy = score + spec.noise * rng.normal();
        const double y = noisy >= 0.0 ? 1.0 : -1.0;
        if (spec.margin > 0.0) axpy(y * spec.margin, direction, x);
        data.features.insert(data.features.end(), x.begin(), x.end());
        data.labels.push_back(y);
    }
    return data;
}

ObjectivePtr logistic_regression(SyntheticDataset dataset) {
    return std::make_shared<Logistic>(std::move(dataset));
}

ObjectivePtr tiny_mlp(SyntheticDataset dataset, std::size_t hidden, std::uint64_t seed) {
    return std::make_shared<TinyMlp>(std::move(dataset), hidden, seed);
}

ObjectivePtr reparametrized(ObjectivePtr base, ParamVec alpha) {
    return std::make_shared<Reparametrized>(std::move(base), std::move(alpha));
}

ParamVec finite_diff_grad(const Objective& obj, const ParamVec& w, double h) {
    if (!(h > 0.0)) throw UsageError("finite_diff_grad: step must be positive");
    ParamVec g(w.size());
    ParamVec probe = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        probe[i] = w[i] + h;
        const double up = obj.value(probe);
        probe[i] = w[i] - h;
        const double down = obj.value(probe);
        probe[i] = w[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace lrfree
