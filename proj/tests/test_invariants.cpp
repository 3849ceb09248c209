#include <doctest.h>

#include "lrfree/invariants.hpp"

using namespace lrfree;

TEST_SUITE("invariants") {

TEST_CASE("scale equivalence passes for ps_sps") {
    const InvariantReport r = check_scale_equivalence(ps_sps_step);
    CHECK(r.passed());
}

TEST_CASE("scale equivalence detects the naive substitution") {
    const InvariantReport r = check_scale_equivalence(naive_scaled_sps_step);
    CHECK_FALSE(r.passed());
}

TEST_CASE("every suite passes") {
    for (const auto& suite : invariant_suites()) {
        const InvariantReport r = check_invariants(suite);
        INFO(suite);
        CHECK(r.passed());
        CHECK_FALSE(r.checks.empty());
    }
    CHECK_THROWS_AS(check_invariants("bogus"), UsageError);
}

TEST_CASE("rounding bound") {
    CHECK(distance_rounding_bound({0, 0}, {0, 0}, {1, 1}) == 0.0);
    const double b = distance_rounding_bound({1, 0}, {1, 0}, {2, 1});
    CHECK(b > 0);
    CHECK(b < 1e-28);
}

}
