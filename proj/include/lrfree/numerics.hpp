#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrfree {

/// Thrown for malformed calls: length mismatches, bad configuration values.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an input lies outside an operation's mathematical domain
/// (non-positive scale factors, non-finite gradients).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Flat vector of doubles. Holds parameters, gradients or per-coordinate
/// scale factors; the length is fixed at construction.
class ParamVec {
public:
    ParamVec() = default;
    explicit ParamVec(std::size_t n, double fill = 0.0) : values_(n, fill) {}
    ParamVec(std::initializer_list<double> init) : values_(init) {}
    explicit ParamVec(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    std::span<double> span() noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const ParamVec&) const = default;

private:
    std::vector<double> values_;
};

// Element-wise arithmetic. Binary operations throw UsageError on length mismatch.
ParamVec ew_mul(const ParamVec& a, const ParamVec& b);
ParamVec ew_div(const ParamVec& a, const ParamVec& b);
ParamVec ew_inv(const ParamVec& a);  // requires a > 0, else DomainError
ParamVec ew_max(const ParamVec& a, const ParamVec& b);
ParamVec ew_abs(const ParamVec& a);
ParamVec ew_square(const ParamVec& a);
double max_elem(const ParamVec& a);
double min_elem(const ParamVec& a);

ParamVec add(const ParamVec& a, const ParamVec& b);
ParamVec sub(const ParamVec& a, const ParamVec& b);
ParamVec scale(const ParamVec& a, double s);
/// y <- y + s*x
void axpy(double s, const ParamVec& x, ParamVec& y);

double inner(const ParamVec& a, const ParamVec& b);
double norm2(const ParamVec& a);
double norm2_squared(const ParamVec& a);

bool all_finite(const ParamVec& a) noexcept;
bool all_positive(const ParamVec& a) noexcept;

void require_same_length(const ParamVec& a, const ParamVec& b, const char* op);

/// Seeded pseudorandom source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the real-valued transforms below are
/// implemented here rather than via <random> distributions so that streams
/// agree across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller; caches the second variate.
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    ParamVec uniform_vec(std::size_t n, double lo, double hi);
    ParamVec normal_vec(std::size_t n, double stddev = 1.0);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::string to_string(const ParamVec& v);

}  // namespace lrfree
