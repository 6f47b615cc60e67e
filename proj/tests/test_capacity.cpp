#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semicap/capacity.hpp"
#include "semicap/errors.hpp"

using namespace semicap;

namespace {

const double kLog2Phi = std::log2((1.0 + std::sqrt(5.0)) / 2.0);

// Largest root of x^3 = x^2 + x + 1 by bisection.
double tribonacci_constant() {
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * mid * mid - mid * mid - mid - 1.0 > 0 ? hi : lo) = mid;
    }
    return lo;
}

} // namespace

TEST_SUITE("capacity") {

TEST_CASE("capacity of the k=2, p=0.05 system") {
    const auto res = capacity_1d(rll_constraint(2, 0.05));
    CHECK(std::abs(res.value - 0.976) <= 0.002);
    CHECK(std::abs(res.value - oracle::rll_capacity_dual(2, 0.05)) <= 1e-5);
    CHECK(res.converged);
}

TEST_CASE("zero-density systems match their transfer matrices") {
    const auto c1 = capacity_1d(rll_constraint(1, 0.0));
    CHECK(std::abs(c1.value - kLog2Phi) <= 1e-4);
    CHECK(std::abs(transfer_matrix_capacity(2, 2, {{1, 1}}) - kLog2Phi) <= 1e-9);

    const auto c2 = capacity_1d(rll_constraint(2, 0.0));
    const double trib = std::log2(tribonacci_constant());
    CHECK(std::abs(c2.value - trib) <= 1e-4);
    CHECK(std::abs(transfer_matrix_capacity(2, 3, {{1, 1, 1}}) - trib) <= 1e-9);
}

TEST_CASE("capacity agrees with the weighted de Bruijn dual") {
    for (int k : {1, 2, 3}) {
        for (double p : {0.01, 0.03, 0.08}) {
            const auto res = capacity_1d(rll_constraint(k, p));
            CHECK(std::abs(res.value - oracle::rll_capacity_dual(k, p)) <= 1e-5);
        }
    }
}

TEST_CASE("large p leaves the uniform measure feasible") {
    for (int k : {1, 2, 3}) {
        const double p = std::pow(2.0, -(k + 1));
        CHECK(std::abs(capacity_1d(rll_constraint(k, p)).value - 1.0) <= 1e-6);
        CHECK(std::abs(capacity_1d(rll_constraint(k, 2 * p)).value - 1.0) <= 1e-6);
    }
    CHECK(capacity_1d(rll_constraint(1, 1.0)).value == doctest::Approx(1.0));
}

TEST_CASE("capacity is nondecreasing in p") {
    double previous = 0.0;
    for (double p : {0.0, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2}) {
        const double v = capacity_1d(rll_constraint(2, p)).value;
        CHECK(v >= previous - 1e-6);
        previous = v;
    }
}

TEST_CASE("the optimizer is shift invariant and inside Gamma") {
    const auto g = rll_constraint(2, 0.05);
    const auto res = capacity_1d(g);
    const auto shift = shift_invariant_equations(3, Alphabet::binary());
    CHECK(shift.equations.size() == 4);
    CHECK(shift.residual(res.optimizer.probs()) <= 1e-9);
    CHECK(g.contains(res.optimizer));
    CHECK(conditional_entropy_rate(res.optimizer.probs(), 2) == doctest::Approx(res.value).epsilon(1e-9));
}

TEST_CASE("the two objective forms agree on shift-invariant measures") {
    // Binary Markov chains give shift-invariant pair distributions.
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 30; ++trial) {
        const double a = u(rng), b = u(rng);  // P(1|0), P(0|1)
        const double pi1 = a / (a + b), pi0 = 1 - pi1;
        const std::vector<double> eta = {pi0 * (1 - a), pi0 * a, pi1 * b, pi1 * (1 - b)};
        CHECK(shift_invariant_equations(2, Alphabet::binary()).residual(eta) <= 1e-15);
        CHECK(conditional_entropy_rate(eta, 2) ==
              doctest::Approx(relative_entropy_objective(eta, 2)).epsilon(1e-12));
        CHECK(conditional_entropy_rate(eta, 2) ==
              doctest::Approx(pi0 * oracle::h2(a) + pi1 * oracle::h2(b)).epsilon(1e-12));
    }
}

TEST_CASE("the conditional entropy objective is concave") {
    std::mt19937_64 rng(47);
    std::exponential_distribution<double> e(1.0);
    auto draw = [&] {
        std::vector<double> v(8);
        double s = 0;
        for (auto& x : v) {
            x = e(rng);
            s += x;
        }
        for (auto& x : v) {
            x /= s;
        }
        return v;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = draw(), y = draw();
        for (double t : {0.25, 0.5, 0.75}) {
            std::vector<double> z(8);
            for (int i = 0; i < 8; ++i) {
                z[i] = t * x[i] + (1 - t) * y[i];
            }
            CHECK(conditional_entropy_rate(z, 2) >=
                  t * conditional_entropy_rate(x, 2) + (1 - t) * conditional_entropy_rate(y, 2) - 1e-12);
        }
    }
}

TEST_CASE("runs with the same seed are identical") {
    CapacityOptions o;
    o.seed = 99;
    const auto a = capacity_1d(rll_constraint(2, 0.05), o);
    const auto b = capacity_1d(rll_constraint(2, 0.05), o);
    CHECK(a.value == b.value);
    CHECK(a.optimizer.probs() == b.optimizer.probs());
}

TEST_CASE("internal capacity from counts approaches the capacity") {
    const auto rows = internal_capacity_sequence(rll_constraint(1, 0.0), 0.0, {4, 5, 12});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].count == 7);
    CHECK(rows[1].count == 11);
    CHECK(rows[1].rate == doctest::Approx(std::log2(11.0) / 5));
    CHECK(std::abs(rows[2].rate - 0.6942) <= 0.02);
    const auto full = internal_capacity_sequence(ConstraintSet(Shape::segment(1, 0, 2), Alphabet::binary()),
                                                 0.0, {3, 7});
    for (const auto& r : full) {
        CHECK(r.rate == 1.0);
    }
    const auto axial =
        internal_capacity_sequence(AxialSystem::strict_power(rll_constraint(1, 0.0), 2), 0.0, {2});
    CHECK(axial.front().count == 7);
}

TEST_CASE("dimension-scaled lower bound") {
    const auto b = dimension_scaled_lower_bound(0.976, 3);
    CHECK(std::abs(b.value - 0.928) <= 0.006);
    CHECK_FALSE(b.degenerate);
    CHECK(dimension_scaled_lower_bound(0.976, 42).degenerate);
    CHECK(dimension_scaled_lower_bound(1.0, 100).value == 1.0);
    CHECK_THROWS_AS(dimension_scaled_lower_bound(0.9, 0), InvalidArgument);
}

TEST_CASE("transfer matrix edge cases") {
    CHECK(transfer_matrix_capacity(2, 2, {}) == doctest::Approx(1.0));
    CHECK(transfer_matrix_capacity(3, 1, {{0}}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(transfer_matrix_capacity(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}), InfeasibleError);
    CHECK_THROWS_AS(transfer_matrix_capacity(2, 2, {{1}}), DimensionError);
}

TEST_CASE("capacity rejects unsupported systems") {
    CHECK_THROWS_AS(capacity_1d(ConstraintSet(Shape::cube(2, 2), Alphabet::binary())), DimensionError);
    CHECK_THROWS_AS(capacity_1d(ConstraintSet(Shape(1, {{0}, {2}}), Alphabet::binary())),
                    InvalidArgument);
}

} // TEST_SUITE
