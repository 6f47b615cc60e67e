#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "semicap/lp.hpp"

using namespace semicap;

namespace {

// Best objective over the vertices of {x >= 0, rows} in two variables, found
// by intersecting every pair of boundary lines.
double vertex_oracle(const LinearProgram& lp) {
    std::vector<std::array<double, 3>> lines;  // a x + b y = c
    for (const auto& r : lp.rows) {
        lines.push_back({r.coeffs[0], r.coeffs[1], r.rhs});
    }
    lines.push_back({1, 0, 0});
    lines.push_back({0, 1, 0});
    auto feasible = [&](double x, double y) {
        if (x < -1e-9 || y < -1e-9) {
            return false;
        }
        for (const auto& r : lp.rows) {
            const double v = r.coeffs[0] * x + r.coeffs[1] * y;
            if (r.relation == Relation::LessEqual && v > r.rhs + 1e-9) return false;
            if (r.relation == Relation::GreaterEqual && v < r.rhs - 1e-9) return false;
            if (r.relation == Relation::Equal && std::abs(v - r.rhs) > 1e-9) return false;
        }
        return true;
    };
    double best = lp.maximize ? -INFINITY : INFINITY;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const auto& a = lines[i];
            const auto& b = lines[j];
            const double det = a[0] * b[1] - a[1] * b[0];
            if (std::abs(det) < 1e-12) {
                continue;
            }
            const double x = (a[2] * b[1] - a[1] * b[2]) / det;
            const double y = (a[0] * b[2] - a[2] * b[0]) / det;
            if (feasible(x, y)) {
                const double v = lp.objective[0] * x + lp.objective[1] * y;
                best = lp.maximize ? std::max(best, v) : std::min(best, v);
            }
        }
    }
    return best;
}

} // namespace

TEST_SUITE("lp") {

TEST_CASE("textbook maximization") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
    LinearProgram lp;
    lp.num_vars = 2;
    lp.objective = {3, 5};
    lp.maximize = true;
    lp.add_row({1, 0}, Relation::LessEqual, 4);
    lp.add_row({0, 2}, Relation::LessEqual, 12);
    lp.add_row({3, 2}, Relation::LessEqual, 18);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(36));
    CHECK(sol.x[0] == doctest::Approx(2));
    CHECK(sol.x[1] == doctest::Approx(6));
}

TEST_CASE("equality and greater-equal rows") {
    // min x + y, x + 2y = 4, x >= 1 -> x = 1, y = 1.5.
    LinearProgram lp;
    lp.num_vars = 2;
    lp.objective = {1, 1};
    lp.add_row({1, 2}, Relation::Equal, 4);
    lp.add_row({1, 0}, Relation::GreaterEqual, 1);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.5));
}

TEST_CASE("infeasible and unbounded programs are reported") {
    LinearProgram bad;
    bad.num_vars = 1;
    bad.objective = {1};
    bad.add_row({1}, Relation::LessEqual, 1);
    bad.add_row({1}, Relation::GreaterEqual, 2);
    CHECK(solve_lp(bad).status == LpStatus::Infeasible);

    LinearProgram open;
    open.num_vars = 2;
    open.objective = {1, 1};
    open.maximize = true;
    open.add_row({1, -1}, Relation::LessEqual, 1);
    CHECK(solve_lp(open).status == LpStatus::Unbounded);
}

TEST_CASE("redundant equalities and degenerate vertices") {
    // Duplicate simplex rows leave a redundant artificial after phase 1.
    LinearProgram lp;
    lp.num_vars = 3;
    lp.objective = {1, 2, 3};
    lp.maximize = true;
    lp.add_row({1, 1, 1}, Relation::Equal, 1);
    lp.add_row({2, 2, 2}, Relation::Equal, 2);
    lp.add_row({0, 0, 1}, Relation::LessEqual, 0);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2));

    // Beale's cycling example; Bland's rule must terminate.
    LinearProgram beale;
    beale.num_vars = 4;
    beale.objective = {0.75, -150, 0.02, -6};
    beale.maximize = true;
    beale.add_row({0.25, -60, -0.04, 9}, Relation::LessEqual, 0);
    beale.add_row({0.5, -90, -0.02, 3}, Relation::LessEqual, 0);
    beale.add_row({0, 0, 1, 0}, Relation::LessEqual, 1);
    const auto b = solve_lp(beale);
    REQUIRE(b.status == LpStatus::Optimal);
    CHECK(b.objective == doctest::Approx(0.05));
}

TEST_CASE("near-singular pivots do not corrupt the solution") {
    // max p_1 over a TV ball around an affine image of (p_0, p_1); the
    // tableau offers a pivot element of order 1e-11 along the way.
    // Reference optimum from an independent solver (HiGHS).
    LinearProgram lp;
    lp.num_vars = 10;
    lp.objective = {0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    lp.maximize = true;
    lp.add_row({1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, Relation::Equal, 1);
    lp.add_row({0, 0, 0, 0, 0, 1, 0, 0, 0, 0}, Relation::LessEqual, 0);
    lp.add_row({0, 0, 1, 1, 1, 1, 0, 0, 0, 0}, Relation::Equal, 1);
    lp.add_row({0.99586290353809015, 0.33126639218100562, -1, 0, 0, 0, -1, 0, 0, 0}, Relation::LessEqual, 0);
    lp.add_row({-0.99586290353809015, -0.33126639218100562, 1, 0, 0, 0, -1, 0, 0, 0}, Relation::LessEqual, 0);
    lp.add_row({0.002066941152327687, 0.33333011917607902, 0, -1, 0, 0, 0, -1, 0, 0}, Relation::LessEqual, 0);
    lp.add_row({-0.002066941152327687, -0.33333011917607902, 0, 1, 0, 0, 0, -1, 0, 0}, Relation::LessEqual, 0);
    lp.add_row({0.002066941152327687, 0.33333011917607897, 0, 0, -1, 0, 0, 0, -1, 0}, Relation::LessEqual, 0);
    lp.add_row({-0.002066941152327687, -0.33333011917607897, 0, 0, 1, 0, 0, 0, -1, 0}, Relation::LessEqual, 0);
    lp.add_row({3.2141572543416124e-06, 0.0020733694668363702, 0, 0, 0, -1, 0, 0, 0, -1}, Relation::LessEqual, 0);
    lp.add_row({-3.2141572543416124e-06, -0.0020733694668363702, 0, 0, 0, 1, 0, 0, 0, -1}, Relation::LessEqual, 0);
    lp.add_row({0, 0, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5}, Relation::LessEqual, 0.001);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(std::abs(sol.objective - 0.4815029278874978) <= 1e-8);
    for (const auto& r : lp.rows) {
        double v = 0.0;
        for (std::size_t j = 0; j < 10; ++j) {
            v += r.coeffs[j] * sol.x[j];
        }
        if (r.relation == Relation::Equal) {
            CHECK(std::abs(v - r.rhs) <= 1e-9);
        } else {
            CHECK(v <= r.rhs + 1e-9);
        }
    }
}

TEST_CASE("random two-variable programs agree with vertex enumeration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        LinearProgram lp;
        lp.num_vars = 2;
        lp.objective = {u(rng), u(rng)};
        lp.maximize = rng() % 2;
        // A box keeps the program bounded.
        lp.add_row({1, 1}, Relation::LessEqual, 5);
        for (int r = 0; r < 3; ++r) {
            const auto rel = static_cast<Relation>(rng() % 3);
            lp.add_row({u(rng), u(rng)}, rel, 2 * u(rng));
        }
        const auto sol = solve_lp(lp);
        const double oracle = vertex_oracle(lp);
        if (std::isinf(oracle)) {
            CHECK(sol.status == LpStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-7));
        ++checked;
    }
    CHECK(checked > 50);
}

} // TEST_SUITE
