// Capacity of one-dimensional semiconstrained systems and related estimates.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "semicap/lattice.hpp"
#include "semicap/scs.hpp"

namespace semicap {

// Linear equations cutting the shift-invariant distributions out of P(alphabet^k):
// for every prefix (a_1..a_{k-1}),
//   sum_a eta(a, a_1..a_{k-1}) - sum_a eta(a_1..a_{k-1}, a) = 0.
struct ShiftInvariancePolytope {
    int k = 1;
    Alphabet alphabet = Alphabet::binary();
    std::vector<std::vector<double>> equations;

    // Largest absolute residual of the equations at eta.
    double residual(std::span<const double> eta) const;
};

ShiftInvariancePolytope shift_invariant_equations(int k, const Alphabet& alphabet);

// H(eta) - H(prefix marginal of eta) in bits: the conditional entropy of the
// last symbol given the first k-1.
double conditional_entropy_rate(std::span<const double> eta, std::size_t alphabet_size);

// log2|alphabet| - D(eta || mu) with mu(phi a) = (1/|alphabet|) sum_a' eta(phi a').
double relative_entropy_objective(std::span<const double> eta, std::size_t alphabet_size);

struct CapacityOptions {
    std::size_t restarts = 5;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 50000;
    double gap_tolerance = 1e-6;
};

struct CapacityResult {
    double value = 0.0;
    PatternDistribution optimizer;
    std::size_t iterations = 0;
    double duality_gap = 0.0;
    bool converged = false;
};

// Maximizes the conditional entropy over Gamma intersected with the
// shift-invariant polytope. Gamma must live on the 1-D window [k].
// The optimizer is assumed to lie in the relative interior; this is not checked.
CapacityResult capacity_1d(const ConstraintSet& gamma, const CapacityOptions& options = {});

// log2 of the spectral radius of the de Bruijn graph on (k-1)-grams with the
// forbidden k-words removed. Throws InfeasibleError when the radius is zero.
double transfer_matrix_capacity(std::size_t alphabet_size, int k,
                                const std::vector<Pattern>& forbidden);

struct CapacityRow {
    int n = 0;
    std::uint64_t count = 0;
    // (1/n^d) log2 count; -infinity when count is zero.
    double rate = 0.0;
};

std::vector<CapacityRow> internal_capacity_sequence(const ConstraintSet& gamma, double eps,
                                                    const std::vector<int>& sides,
                                                    const CountOptions& options = {});
std::vector<CapacityRow> internal_capacity_sequence(const AxialSystem& system, double eps,
                                                    const std::vector<int>& sides,
                                                    const CountOptions& options = {});

struct DimensionBound {
    double value = 0.0;
    // The bound is negative and carries no information.
    bool degenerate = false;
};

// 1 + d (cap1 - 1): the classical lower bound on the capacity of a
// d-dimensional averaged product from the 1-D capacity.
DimensionBound dimension_scaled_lower_bound(double cap1, int d);

} // namespace semicap
