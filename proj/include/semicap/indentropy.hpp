// Independence-entropy lower bounds.
//
// A product measure on F_n^d whose averaged S-marginal lies in B_eps(Gamma)
// certifies (1/n^d) H(mu) as a lower bound on the independence entropy, and
// hence on the capacity of the axial products of Gamma. Everything here
// produces such certified witnesses; no routine claims to reach the supremum.
#pragma once

#include <cstdint>
#include <vector>

#include "semicap/lattice.hpp"
#include "semicap/scs.hpp"

namespace semicap {

// 1-D product measure with period m, extended cyclically.
struct PeriodicProductMeasure {
    std::vector<std::vector<double>> site_dists;

    int period() const { return static_cast<int>(site_dists.size()); }
    double entropy_rate() const;
    // Tiles the period over a 1-D side n; requires period | n.
    SiteProductMeasure tile(int side) const;
};

struct HindOptions {
    // Random restarts in addition to the i.i.d. and period-2 warm starts.
    std::size_t restarts = 20;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::size_t max_sweeps = 200;
    // Joint two-site moves (binary alphabets only).
    bool pair_moves = true;
};

struct HindResult {
    double value = 0.0;
    SiteProductMeasure witness;
    // LP distance from the witness's averaged marginal to Gamma.
    double witness_distance = 0.0;
    // witness_distance <= eps + 1e-8.
    bool certified = false;
};

// Block-coordinate ascent of (1/n^d) H(mu) over product measures on F_n^d
// with averaged marginal in B_eps(Gamma). Requires n >= the cube extent of
// Gamma's shape. Throws InfeasibleError if no start can be made feasible.
HindResult hind_fixed_n(const ConstraintSet& gamma, int n, double eps,
                        const HindOptions& options = {});

struct CurvePoint {
    double value = 0.0;
    double x = 0.0;
    double y = 0.0;
};

// max (H2(x) + H2(y)) / 2 subject to x y <= p, returned with x >= y. The
// mirrored point (y, x) attains the same value.
CurvePoint curve_optimum_01p(double p);

// Site v of the lift receives site (sum_i v_i) mod n of the 1-D measure.
SiteProductMeasure axial_lift(const SiteProductMeasure& line, int dim);

// A configuration of nonempty symbol subsets, stored as bit masks.
class MultiChoiceWord {
public:
    MultiChoiceWord(int dim, int side, std::size_t alphabet_size, std::vector<std::uint32_t> cells);

    int dim() const { return dim_; }
    int side() const { return side_; }
    std::size_t alphabet_size() const { return alphabet_size_; }
    const std::vector<std::uint32_t>& cells() const { return cells_; }
    std::vector<Symbol> subset(std::size_t cell) const;

    bool operator==(const MultiChoiceWord&) const = default;

private:
    int dim_;
    int side_;
    std::size_t alphabet_size_;
    std::vector<std::uint32_t> cells_;
};

// Product of the cell sizes; throws SizeGuardError on 64-bit overflow.
std::uint64_t fillings_count(const MultiChoiceWord& w);

// Does every filling avoid every forbidden pattern at every cyclic offset?
bool all_fillings_avoid(const MultiChoiceWord& w, const Shape& shape,
                        const std::vector<Pattern>& forbidden);

struct CombinatorialResult {
    double value = 0.0;
    MultiChoiceWord witness;
    std::uint64_t fillings = 0;
};

// Search-space guard in bits: cells * log2(2^|alphabet| - 1).
inline constexpr double kMultiChoiceGuardBits = 40.0;

// Branch and bound over multi-choice words on F_n^d maximizing
// (1/n^d) log2 fillings_count among words all of whose fillings avoid the
// forbidden patterns cyclically.
CombinatorialResult hind_com_fixed_n(const Alphabet& alphabet, const Shape& shape,
                                     const std::vector<Pattern>& forbidden, int n,
                                     unsigned threads = 0);

struct EpsilonRow {
    double eps = 0.0;
    int best_n = 0;
    double value = 0.0;
    double witness_distance = 0.0;
    bool certified = false;
};

struct IndependenceReport {
    int dim = 1;
    std::vector<EpsilonRow> rows;
    // Best certified eps = 0 value: a lower bound on the capacity of Gamma^{(x)d}.
    double lower_bound = 0.0;
    SiteProductMeasure line_witness;
    SiteProductMeasure lifted_witness;
    double lifted_rate = 0.0;
    // Largest LP distance of a lifted axis marginal from Gamma.
    double lift_axis_distance = 0.0;
    double capacity_1d = 0.0;
    double dimension_bound = 0.0;
    bool dimension_bound_degenerate = false;
    // Closed forms for RLL systems; NaN when not applicable.
    double iid_closed_form = 0.0;
    double curve_closed_form = 0.0;
};

IndependenceReport hind_bound_report(const ConstraintSet& gamma, int dim,
                                     const std::vector<double>& eps_list,
                                     const std::vector<int>& sides,
                                     const HindOptions& options = {});

} // namespace semicap
