#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semicap/errors.hpp"
#include "semicap/indentropy.hpp"

using namespace semicap;

namespace {

// (1/n) sum_i H2(p_i) of a binary site product measure.
double binary_rate(const SiteProductMeasure& mu) {
    double s = 0.0;
    for (const auto& d : mu.site_dists()) {
        s += oracle::h2(d[1]);
    }
    return s / static_cast<double>(mu.sites());
}

// Averaged mass of 1^{k+1} on a cyclic binary 1-D product measure.
double ones_mass(const SiteProductMeasure& mu, int k) {
    const int n = mu.side();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double prod = 1.0;
        for (int j = 0; j <= k; ++j) {
            prod *= mu.site((i + j) % n)[1];
        }
        s += prod;
    }
    return s / n;
}

// Grid search for max (H2(x) + H2(y)) / 2 over x y <= p. For fixed x the best
// y is min(1/2, p / x) since H2 increases on [0, 1/2].
double curve_grid_oracle(double p) {
    double best = 0.0;
    const int steps = 200000;
    for (int i = 1; i <= steps; ++i) {
        const double x = static_cast<double>(i) / steps;
        const double y = std::min(0.5, p / x);
        best = std::max(best, 0.5 * (oracle::h2(x) + oracle::h2(y)));
    }
    return best;
}

// Brute-force best multi-choice word on a 1-D cycle over {0,1} avoiding 11:
// no two cyclically adjacent cells may both allow 1.
double multichoice_11_oracle(int n) {
    int best = -1;
    oracle::for_each_word(static_cast<std::size_t>(n), 3, [&](const std::vector<int>& w) {
        // 0 -> {0}, 1 -> {1}, 2 -> {0,1}
        for (int i = 0; i < n; ++i) {
            if (w[i] != 0 && w[(i + 1) % n] != 0) {
                return;
            }
        }
        best = std::max(best, static_cast<int>(std::count(w.begin(), w.end(), 2)));
    });
    return static_cast<double>(best) / n;
}

// Brute force over multi-choice words on the 2-D torus with every filling
// avoiding the all-ones 2x2 block; fillings are enumerated explicitly.
double multichoice_square_oracle(int n) {
    const std::size_t cells = static_cast<std::size_t>(n * n);
    double best = -1.0;
    oracle::for_each_word(cells, 3, [&](const std::vector<int>& w) {
        std::vector<int> free;
        for (std::size_t c = 0; c < cells; ++c) {
            if (w[c] == 2) {
                free.push_back(static_cast<int>(c));
            }
        }
        const double rate = static_cast<double>(free.size()) / static_cast<double>(cells);
        if (rate <= best) {
            return;
        }
        bool ok = true;
        oracle::for_each_word(free.size(), 2, [&](const std::vector<int>& bits) {
            if (!ok) {
                return;
            }
            std::vector<int> filled(cells);
            for (std::size_t c = 0; c < cells; ++c) {
                filled[c] = w[c] == 1 ? 1 : 0;
            }
            for (std::size_t i = 0; i < free.size(); ++i) {
                filled[free[i]] = bits[i];
            }
            for (int x = 0; x < n; ++x) {
                for (int y = 0; y < n; ++y) {
                    auto at = [&](int a, int b) { return filled[(a % n) + n * (b % n)]; };
                    if (at(x, y) && at(x + 1, y) && at(x, y + 1) && at(x + 1, y + 1)) {
                        ok = false;
                        return;
                    }
                }
            }
        });
        if (ok) {
            best = rate;
        }
    });
    return best;
}

HindOptions quick(std::size_t restarts = 4) {
    HindOptions o;
    o.restarts = restarts;
    o.threads = 1;
    return o;
}

} // namespace

TEST_SUITE("indentropy") {

TEST_CASE("fixed-n bound for k=2, p=0.05 reaches the i.i.d. value") {
    const auto g = rll_constraint(2, 0.05);
    const double iid = oracle::h2(std::cbrt(0.05));
    for (int n : {3, 4}) {
        const auto res = hind_fixed_n(g, n, 0.0, quick());
        CHECK(res.certified);
        CHECK(res.value >= 0.9490);
        CHECK(res.value >= iid - 1e-6);
        // Nothing beats the i.i.d. optimum here beyond round-off.
        CHECK(res.value <= iid + 1e-10);
        // Recompute the certificate from the witness directly.
        CHECK(binary_rate(res.witness) == doctest::Approx(res.value).epsilon(1e-12));
        CHECK(ones_mass(res.witness, 2) <= 0.05 + 1e-8);
    }
}

TEST_CASE("fixed-n bound at n=2 matches the two-site curve") {
    for (double p : {0.01, 0.05, 0.1, 0.2}) {
        const auto g = rll_constraint(1, p);
        const auto res = hind_fixed_n(g, 2, 0.0, quick());
        REQUIRE(res.certified);
        const double expected = curve_grid_oracle(p);
        CHECK(std::abs(res.value - expected) <= 1e-4);
        CHECK(ones_mass(res.witness, 1) <= p + 1e-8);
    }
    const auto res = hind_fixed_n(rll_constraint(1, 0.2), 2, 0.0, quick());
    CHECK(std::abs(res.value - oracle::h2(std::sqrt(0.2))) <= 1e-6);
}

TEST_CASE("the unconstrained system has full entropy") {
    const ConstraintSet full(Shape::segment(1, 0, 2), Alphabet::binary());
    const auto res = hind_fixed_n(full, 3, 0.0, quick());
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
    const ConstraintSet full3(Shape::segment(1, 0, 2), Alphabet::of_size(3));
    CHECK(hind_fixed_n(full3, 2, 0.0, quick()).value == doctest::Approx(std::log2(3.0)).epsilon(1e-6));
}

TEST_CASE("relaxing eps never lowers the bound") {
    const auto g = rll_constraint(1, 0.05);
    double previous = 0.0;
    for (double eps : {0.0, 0.005, 0.02, 0.05}) {
        const auto res = hind_fixed_n(g, 2, eps, quick());
        CHECK(res.certified);
        CHECK(res.witness_distance <= eps + 1e-8);
        CHECK(res.value >= previous - 1e-9);
        previous = res.value;
    }
}

TEST_CASE("non-binary alphabets use the general optimizer") {
    // Ternary, forbid (2,2) on pairs: the i.i.d. optimum puts mass 0 on 2
    // only if that helps; the witness must still avoid 22 and be certified.
    const auto g = fully_constrained(Alphabet::of_size(3), Shape::segment(1, 0, 2), {{2, 2}});
    const auto res = hind_fixed_n(g, 2, 0.0, quick());
    CHECK(res.certified);
    // Alternating {0,1,2} / {0,1} is feasible: (log2 3 + 1) / 2.
    CHECK(res.value >= (std::log2(3.0) + 1.0) / 2 - 1e-4);
    CHECK(res.value <= std::log2(3.0));
}

TEST_CASE("fixed-n bound input validation") {
    CHECK_THROWS_AS(hind_fixed_n(rll_constraint(2, 0.05), 2, 0.0), InvalidArgument);
    const auto empty = fully_constrained(Alphabet::binary(), Shape::segment(1, 0, 1), {{0}, {1}});
    CHECK_THROWS_AS(hind_fixed_n(empty, 2, 0.0, quick()), InfeasibleError);
}

TEST_CASE("results are reproducible across thread counts") {
    HindOptions a = quick(6);
    HindOptions b = a;
    b.threads = 3;
    const auto g = rll_constraint(1, 0.03);
    const auto ra = hind_fixed_n(g, 4, 0.0, a);
    const auto rb = hind_fixed_n(g, 4, 0.0, b);
    CHECK(ra.value == rb.value);
    CHECK(ra.witness.site_dists() == rb.witness.site_dists());
}

TEST_CASE("two-site curve optimum") {
    const auto at02 = curve_optimum_01p(0.2);
    CHECK(std::abs(at02.x - std::sqrt(0.2)) <= 1e-6);
    CHECK(std::abs(at02.y - std::sqrt(0.2)) <= 1e-6);

    const auto at001 = curve_optimum_01p(0.01);
    CHECK(std::abs(at001.x - 0.454) <= 2e-3);
    CHECK(std::abs(at001.y - 0.022) <= 2e-3);
    CHECK(at001.x * at001.y <= 0.01 + 1e-12);

    const auto tiny = curve_optimum_01p(1e-6);
    CHECK(tiny.value >= 0.499);
    CHECK(tiny.value <= 0.502);

    CHECK(curve_optimum_01p(0.25).value == 1.0);
    CHECK(curve_optimum_01p(0.7).value == 1.0);
    CHECK_THROWS_AS(curve_optimum_01p(0.0), InvalidArgument);
    CHECK_THROWS_AS(curve_optimum_01p(1.5), InvalidArgument);
}

TEST_CASE("curve optimum agrees with a grid search and is monotone") {
    double previous = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double p = 0.26 * i / 60.0;
        const auto pt = curve_optimum_01p(p);
        const double grid = curve_grid_oracle(p);
        CHECK(pt.value >= grid - 1e-9);
        CHECK(pt.value <= grid + 1e-5);
        CHECK(pt.x >= pt.y);
        CHECK(pt.value >= previous);
        previous = pt.value;
    }
}

TEST_CASE("axial lift preserves the rate and the axis marginals") {
    const SiteProductMeasure line(1, 3, 2, {{0.9, 0.1}, {0.4, 0.6}, {0.7, 0.3}});
    for (int dim : {2, 3}) {
        const auto lifted = axial_lift(line, dim);
        CHECK(lifted.dim() == dim);
        CHECK(lifted.side() == 3);
        CHECK(binary_rate(lifted) == doctest::Approx(binary_rate(line)).epsilon(1e-12));
        const auto line_pairs = averaged_marginal_probs(line, Shape::segment(1, 0, 2));
        for (int axis = 0; axis < dim; ++axis) {
            const auto pairs = averaged_marginal_probs(lifted, Shape::segment(dim, axis, 2));
            for (std::size_t i = 0; i < 4; ++i) {
                CHECK(pairs[i] == doctest::Approx(line_pairs[i]).epsilon(1e-12));
            }
        }
    }
    // The 1-D pair marginal by hand: mass of 11 is (0.1*0.6 + 0.6*0.3 + 0.3*0.1) / 3.
    CHECK(averaged_marginal_probs(line, Shape::segment(1, 0, 2))[3] ==
          doctest::Approx((0.06 + 0.18 + 0.03) / 3));
}

TEST_CASE("periodic product measures") {
    const PeriodicProductMeasure m{{{0.5, 0.5}, {1.0, 0.0}}};
    CHECK(m.period() == 2);
    CHECK(m.entropy_rate() == doctest::Approx(0.5));
    const auto tiled = m.tile(6);
    CHECK(tiled.side() == 6);
    CHECK(tiled.site(4) == std::vector<double>{0.5, 0.5});
    CHECK(tiled.site(5) == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(m.tile(5), InvalidArgument);
}

TEST_CASE("multi-choice words") {
    const MultiChoiceWord w(1, 4, 2, {3, 1, 3, 1});
    CHECK(fillings_count(w) == 4);
    CHECK(w.subset(0) == std::vector<Symbol>{0, 1});
    CHECK(w.subset(1) == std::vector<Symbol>{0});
    CHECK(all_fillings_avoid(w, Shape::segment(1, 0, 2), {{1, 1}}));
    CHECK_FALSE(all_fillings_avoid(MultiChoiceWord(1, 3, 2, {3, 1, 3}), Shape::segment(1, 0, 2), {{1, 1}}));
    CHECK_THROWS_AS(MultiChoiceWord(1, 2, 2, {0, 1}), InvalidArgument);
    CHECK_THROWS_AS(MultiChoiceWord(1, 2, 2, {4, 1}), InvalidArgument);
    CHECK_THROWS_AS(MultiChoiceWord(1, 3, 2, {1, 1}), DimensionError);
    const MultiChoiceWord big(1, 65, 2, std::vector<std::uint32_t>(65, 3));
    CHECK_THROWS_AS(fillings_count(big), SizeGuardError);
    const MultiChoiceWord edge(1, 63, 2, std::vector<std::uint32_t>(63, 3));
    CHECK(fillings_count(edge) == (std::uint64_t{1} << 63));
}

TEST_CASE("combinatorial bound for the forbidden pair 11") {
    const Shape pair = Shape::segment(1, 0, 2);
    for (int n : {4, 6, 8}) {
        const auto res = hind_com_fixed_n(Alphabet::binary(), pair, {{1, 1}}, n, 1);
        CHECK(res.value == doctest::Approx(0.5));
        CHECK(res.fillings == (std::uint64_t{1} << (n / 2)));
        CHECK(all_fillings_avoid(res.witness, pair, {{1, 1}}));
        // Free cells alternate with forced zeros.
        for (int i = 0; i < n; ++i) {
            const bool free = res.witness.cells()[i] == 3;
            CHECK(free != (res.witness.cells()[(i + 1) % n] == 3));
        }
    }
    CHECK(hind_com_fixed_n(Alphabet::binary(), pair, {{1, 1}}, 5, 1).value < 0.5);
    for (int n = 2; n <= 10; ++n) {
        CHECK(hind_com_fixed_n(Alphabet::binary(), pair, {{1, 1}}, n, 1).value ==
              doctest::Approx(multichoice_11_oracle(n)));
    }
}

TEST_CASE("combinatorial bound on a 2-D torus matches brute force") {
    const Shape square = Shape::cube(2, 2);
    for (int n : {2, 3}) {
        const auto res = hind_com_fixed_n(Alphabet::binary(), square, {{1, 1, 1, 1}}, n, 1);
        CHECK(res.value == doctest::Approx(multichoice_square_oracle(n)));
        CHECK(all_fillings_avoid(res.witness, square, {{1, 1, 1, 1}}));
    }
}

TEST_CASE("combinatorial search is thread-count independent") {
    const Shape pair = Shape::segment(1, 0, 2);
    const std::vector<Pattern> forbidden = {{1, 1}, {2, 2}};
    const auto a = hind_com_fixed_n(Alphabet::of_size(3), pair, forbidden, 7, 1);
    const auto b = hind_com_fixed_n(Alphabet::of_size(3), pair, forbidden, 7, 4);
    CHECK(a.value == b.value);
    CHECK(a.witness == b.witness);
    CHECK_THROWS_AS(hind_com_fixed_n(Alphabet::of_size(3), pair, forbidden, 30, 1), SizeGuardError);
}

TEST_CASE("bound report for a pair constraint") {
    const double p = 0.2;
    const auto report = hind_bound_report(rll_constraint(1, p), 2, {0.0, 0.01}, {2, 3}, quick());
    CHECK(report.dim == 2);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].eps == 0.0);
    CHECK(report.rows[0].certified);
    CHECK(report.rows[1].value >= report.rows[0].value - 1e-9);
    CHECK(std::abs(report.lower_bound - oracle::h2(std::sqrt(p))) <= 1e-6);
    CHECK(report.lifted_rate == doctest::Approx(report.lower_bound).epsilon(1e-12));
    CHECK(report.lift_axis_distance <= 1e-8);
    CHECK(std::abs(report.capacity_1d - oracle::rll_capacity_dual(1, p)) <= 1e-5);
    CHECK(report.dimension_bound == doctest::Approx(2 * report.capacity_1d - 1));
    CHECK(report.iid_closed_form == doctest::Approx(oracle::h2(std::sqrt(p))));
    CHECK(report.curve_closed_form == doctest::Approx(curve_optimum_01p(p).value));
    CHECK(report.lower_bound <= report.capacity_1d + 1e-6);
}

} // TEST_SUITE
