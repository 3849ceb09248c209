#include "lrfree/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lrfree/numerics.hpp"

namespace lrfree {

double gamma(const Schedule& schedule, std::size_t k) {
    switch (schedule.kind) {
        case Schedule::Kind::Constant: return 1.0;
        case Schedule::Kind::Poly:
            return std::pow(static_cast<double>(k) + 1.0, -schedule.exponent);
        case Schedule::Kind::Cosine: {
            if (schedule.total_steps == 0) throw UsageError("cosine schedule needs total_steps > 0");
            if (k >= schedule.total_steps) return 0.0;
            const double t = static_cast<double>(k) / static_cast<double>(schedule.total_steps);
            return 0.5 * (1.0 + std::cos(std::numbers::pi * t));
        }
    }
    throw UsageError("unknown schedule kind");
}

std::string_view to_string(Schedule::Kind kind) {
    switch (kind) {
        case Schedule::Kind::Constant: return "constant";
        case Schedule::Kind::Poly: return "poly";
        case Schedule::Kind::Cosine: return "cosine";
    }
    return "unknown";
}

Schedule::Kind parse_schedule_kind(std::string_view name) {
    if (name == "constant") return Schedule::Kind::Constant;
    if (name == "poly") return Schedule::Kind::Poly;
    if (name == "cosine") return Schedule::Kind::Cosine;
    throw UsageError("unknown schedule '" + std::string(name) + "'");
}

}  // namespace lrfree
