#include "lrfree/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lrfree {

void require_same_length(const ParamVec& a, const ParamVec& b, const char* op) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << op << ": length mismatch (" << a.size() << " vs " << b.size() << ")";
        throw UsageError(msg.str());
    }
}

namespace {

template <class F>
ParamVec zip(const ParamVec& a, const ParamVec& b, const char* op, F f) {
    require_same_length(a, b, op);
    ParamVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

template <class F>
ParamVec map(const ParamVec& a, F f) {
    ParamVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

}  // namespace

ParamVec ew_mul(const ParamVec& a, const ParamVec& b) {
    return zip(a, b, "ew_mul", [](double x, double y) { return x * y; });
}

ParamVec ew_div(const ParamVec& a, const ParamVec& b) {
    if (!all_positive(b)) throw DomainError("ew_div: divisor must be strictly positive");
    return zip(a, b, "ew_div", [](double x, double y) { return x / y; });
}

ParamVec ew_inv(const ParamVec& a) {
    if (!all_positive(a)) throw DomainError("ew_inv: entries must be strictly positive");
    return map(a, [](double x) { return 1.0 / x; });
}

ParamVec ew_max(const ParamVec& a, const ParamVec& b) {
    return zip(a, b, "ew_max", [](double x, double y) { return std::max(x, y); });
}

ParamVec ew_abs(const ParamVec& a) {
    return map(a, [](double x) { return std::abs(x); });
}

ParamVec ew_square(const ParamVec& a) {
    return map(a, [](double x) { return x * x; });
}

double max_elem(const ParamVec& a) {
    if (a.empty()) throw UsageError("max_elem: empty vector");
    return *std::max_element(a.begin(), a.end());
}

double min_elem(const ParamVec& a) {
    if (a.empty()) throw UsageError("min_elem: empty vector");
    return *std::min_element(a.begin(), a.end());
}

ParamVec add(const ParamVec& a, const ParamVec& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

ParamVec sub(const ParamVec& a, const ParamVec& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

ParamVec scale(const ParamVec& a, double s) {
    return map(a, [s](double x) { return s * x; });
}

void axpy(double s, const ParamVec& x, ParamVec& y) {
    require_same_length(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

double inner(const ParamVec& a, const ParamVec& b) {
    require_same_length(a, b, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2_squared(const ParamVec& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return acc;
}

// Scaled accumulation so that tiny or huge entries neither underflow nor
// overflow when squared.
double norm2(const ParamVec& a) {
    double amax = 0.0;
    for (double x : a) amax = std::max(amax, std::abs(x));
    if (amax == 0.0 || !std::isfinite(amax)) return amax;
    double acc = 0.0;
    for (double x : a) {
        const double r = x / amax;
        acc += r * r;
    }
    return amax * std::sqrt(acc);
}

bool all_finite(const ParamVec& a) noexcept {
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

bool all_positive(const ParamVec& a) noexcept {
    return std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; });
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw UsageError("Rng::below: n must be positive");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

ParamVec Rng::uniform_vec(std::size_t n, double lo, double hi) {
    ParamVec out(n);
    for (auto& x : out) x = uniform(lo, hi);
    return out;
}

ParamVec Rng::normal_vec(std::size_t n, double stddev) {
    ParamVec out(n);
    for (auto& x : out) x = stddev * normal();
    return out;
}

std::string to_string(const ParamVec& v) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ')';
    return os.str();
}

}  // namespace lrfree
