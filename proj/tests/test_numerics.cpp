#include <doctest.h>

#include <cmath>
#include <limits>

#include "lrfree/numerics.hpp"

using namespace lrfree;

TEST_SUITE("numerics") {

TEST_CASE("element-wise multiply") {
    CHECK(ew_mul({1, 2}, {1, 2}) == ParamVec{1, 4});
    CHECK(ew_mul({1, 2}, {1, 0.5}) == ParamVec{1, 1});
    Rng rng(1);
    const ParamVec x = rng.normal_vec(17);
    CHECK(ew_mul(x, ParamVec(17, 1.0)) == x);
    CHECK_THROWS_AS(ew_mul({1, 2}, {1}), UsageError);
}

TEST_CASE("element-wise inverse") {
    CHECK(ew_inv({1, 2}) == ParamVec{1, 0.5});
    CHECK(ew_inv({4}) == ParamVec{0.25});
    CHECK_THROWS_AS(ew_inv({1, 0}), DomainError);
    CHECK_THROWS_AS(ew_inv({-1}), DomainError);

    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const ParamVec x = rng.uniform_vec(8, 1e-3, 1e3);
        const ParamVec y = ew_inv(ew_inv(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(y[i] - x[i]) <= 2 * std::numeric_limits<double>::epsilon() * x[i]);
    }
}

TEST_CASE("max and elementwise max") {
    CHECK(ew_max({1, 5}, {3, 2}) == ParamVec{3, 5});
    CHECK(max_elem({1, 5}) == 5);
    CHECK(min_elem({1, 5}) == 1);
    const ParamVec x{-1, 0.5, 7};
    CHECK(ew_max(x, x) == x);
    CHECK_THROWS_AS(ew_max({1}, {1, 2}), UsageError);
    CHECK_THROWS(max_elem(ParamVec{}));
}

TEST_CASE("norm and inner product") {
    CHECK(norm2({3, 4}) == 5);
    CHECK(inner({1, 2}, {2, 1}) == 4);
    CHECK(norm2(ParamVec(6)) == 0);
    CHECK(norm2_squared({3, 4}) == 25);
    CHECK_THROWS_AS(inner({1}, {1, 2}), UsageError);
    // no overflow for huge entries
    CHECK(norm2({3e200, 4e200}) == doctest::Approx(5e200).epsilon(1e-15));
    CHECK(norm2({3e-200, 4e-200}) == doctest::Approx(5e-200).epsilon(1e-15));
}

TEST_CASE("inner(a, a) agrees with norm2(a)^2") {
    Rng rng(3);
    for (std::size_t n : {1u, 2u, 10u, 100u, 1000u, 10000u}) {
        for (int t = 0; t < 5; ++t) {
            const ParamVec a = rng.normal_vec(n, std::pow(10.0, rng.uniform(-5, 5)));
            const double ip = inner(a, a);
            const double nn = norm2(a) * norm2(a);
            CHECK(std::abs(ip - nn) <= 1e-12 * ip);
        }
    }
}

TEST_CASE("operations preserve length and finiteness") {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(30);
        const ParamVec a = rng.normal_vec(n, 10.0);
        const ParamVec b = rng.uniform_vec(n, 0.1, 5.0);
        for (const ParamVec& r : {ew_mul(a, b), ew_div(a, b), ew_inv(b), ew_max(a, b), ew_abs(a),
                                  ew_square(a), add(a, b), sub(a, b), scale(a, -3.0)}) {
            CHECK(r.size() == n);
            CHECK(all_finite(r));
        }
    }
}

TEST_CASE("axpy and arithmetic helpers") {
    ParamVec y{1, 1};
    axpy(2.0, {1, -1}, y);
    CHECK(y == ParamVec{3, -1});
    CHECK(sub({3, 1}, {1, 1}) == ParamVec{2, 0});
    CHECK(scale({1, -2}, 0.5) == ParamVec{0.5, -1});
    CHECK(ew_div({1, 3}, {2, 4}) == ParamVec{0.5, 0.75});
    CHECK(ew_abs({-2, 3}) == ParamVec{2, 3});
    CHECK(all_positive({1, 2}));
    CHECK_FALSE(all_positive({1, 0}));
    CHECK_FALSE(all_finite({1, std::nan("")}));
}

TEST_CASE("rng streams are reproducible") {
    Rng a(20240607), b(20240607), c(20240608);
    bool same = true;
    bool differs = false;
    for (int i = 0; i < 1000000; ++i) {
        const auto x = a.next_u64();
        same &= x == b.next_u64();
        differs |= x != c.next_u64();
    }
    CHECK(same);
    CHECK(differs);

    // the engine output is fixed by the standard: 10000th draw of the default seed
    std::mt19937_64 ref;
    ref.discard(9999);
    CHECK(ref() == 9981545732273789042ull);
}

TEST_CASE("rng transforms") {
    Rng rng(9);
    double lo = 1, hi = 0, sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);

    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK_THROWS(rng.below(0));
}

}
