#pragma once

#include <cstddef>
#include <string_view>

namespace lrfree {

/// Annealing multiplier gamma_k applied to D-Adaptation step sizes (and to
/// the base learning rate of SGD/Adam).
///   constant:  1
///   poly:      (k+1)^-exponent   (exponent in (1/2, 1] gives sum = inf, sum of squares < inf)
///   cosine:    (1 + cos(pi k / T)) / 2 for k < T, 0 afterwards
struct Schedule {
    enum class Kind { Constant, Poly, Cosine };

    Kind kind = Kind::Constant;
    double exponent = 0.75;
    std::size_t total_steps = 0;

    static Schedule constant() { return {}; }
    static Schedule poly(double exponent = 0.75) { return {Kind::Poly, exponent, 0}; }
    static Schedule cosine(std::size_t total) { return {Kind::Cosine, 0.75, total}; }
};

double gamma(const Schedule& schedule, std::size_t k);

std::string_view to_string(Schedule::Kind kind);
Schedule::Kind parse_schedule_kind(std::string_view name);

}  // namespace lrfree
