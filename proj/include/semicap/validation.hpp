// Monte Carlo concentration checks, inequality reports and cyclic versus
// non-cyclic count comparisons.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semicap/capacity.hpp"
#include "semicap/indentropy.hpp"
#include "semicap/lattice.hpp"
#include "semicap/scs.hpp"

namespace semicap {

// Draws a word of side N from mu repeated periodically; mu.side() must divide
// N. Cell c uses CounterRng(seed).uniform_at(c).
Word sample_word(const SiteProductMeasure& mu, int side, std::uint64_t seed);
Word sample_word(const PeriodicProductMeasure& mu, int side, std::uint64_t seed);

struct ConcentrationRow {
    int side = 0;
    double eps = 0.0;
    double inside_fraction = 0.0;
    // -ln(1 - fraction) / N^d; +infinity when every trial landed inside.
    double decay_estimate = 0.0;
};

struct ConcentrationReport {
    std::size_t trials = 0;
    std::vector<ConcentrationRow> rows;
    // Distance from the base measure's averaged marginal to Gamma.
    double base_distance = 0.0;
    // The base distance is not below min eps, so concentration is not expected.
    bool base_flagged = false;
    // Fraction nondecreasing across the sides for every eps.
    bool monotone_in_side = true;
};

struct ConcentrationOptions {
    std::size_t trials = 2000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// Trial t samples with key seed ^ t. Each word is tested against every eps,
// so fractions are nondecreasing in eps by construction.
ConcentrationReport concentration_check(const SiteProductMeasure& mu, const ConstraintSet& gamma,
                                        const std::vector<double>& eps_list,
                                        const std::vector<int>& sides,
                                        const ConcentrationOptions& options = {});

struct HasseQuantity {
    std::string name;
    double value = 0.0;
    // How the number was obtained, e.g. "computed", "closed form", "count".
    std::string source;
};

struct HasseEdge {
    std::string claim;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool holds = true;
};

struct HasseOptions {
    std::vector<int> sides = {2, 3, 4, 6};
    std::vector<double> eps_list = {0.0, 1e-3, 1e-2};
    std::vector<int> count_sides = {4, 6, 8, 10, 12};
    HindOptions hind;
    CapacityOptions capacity;
    unsigned threads = 0;
};

struct HasseReport {
    int dim = 1;
    std::vector<HasseQuantity> quantities;
    std::vector<HasseEdge> edges;
    IndependenceReport independence;
    // Informational: the lifted bound against the dimension-scaled one.
    bool hind_exceeds_dimension_bound = false;
};

// Collects the bounds for Gamma and Gamma^{(x)d} and checks the edges
// hind <= capacity, lift preserves the rate, the lift is feasible along every
// axis, and the dimension bound stays below the capacity. Throws
// InequalityViolation naming the first failing edge.
HasseReport hasse_report(const ConstraintSet& gamma, int dim, const HasseOptions& options = {});

struct CyclicRow {
    int n = 0;
    std::uint64_t cyclic = 0;
    std::uint64_t noncyclic = 0;
    bool contained = true;
    // (1/n^d)(log2 noncyclic - log2 cyclic).
    double gap = 0.0;
    // gap is strictly below the previous row's gap (false on the first row).
    bool gap_decreased = false;
};

struct CyclicTable {
    std::vector<CyclicRow> rows;
    // Every consecutive pair of rows has a non-increasing gap.
    bool decreasing = true;
};

CyclicTable cyclic_vs_noncyclic(const Alphabet& alphabet, const Shape& shape,
                                const std::vector<Pattern>& forbidden,
                                const std::vector<int>& sides, const CountOptions& options = {});
CyclicTable cyclic_vs_noncyclic(const AxialSystem& system, const std::vector<int>& sides,
                                const CountOptions& options = {});

} // namespace semicap
