// Semiconstrained systems: constraint polytopes over pattern distributions,
// admissibility of words, and exact counting of admissible blocks.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semicap/lattice.hpp"
#include "semicap/lp.hpp"

namespace semicap {

// Tolerance for membership in a constraint polytope and for LP distances.
inline constexpr double kMembershipTolerance = 1e-9;

struct LinearConstraint {
    std::vector<double> coeffs;
    double bound = 0.0;
    // Only LessEqual and Equal are used by constraint sets.
    Relation relation = Relation::LessEqual;
};

struct RllParams {
    int k = 0;
    double p = 0.0;
};

// Gamma = {mu in the simplex over alphabet^shape : every constraint holds}.
class ConstraintSet {
public:
    ConstraintSet(Shape shape, Alphabet alphabet, std::vector<LinearConstraint> constraints = {});

    const Shape& shape() const { return shape_; }
    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<LinearConstraint>& constraints() const { return constraints_; }
    std::uint64_t pattern_space() const { return patterns_; }

    // Set when built by rll_constraint; used for closed-form reporting.
    const std::optional<RllParams>& rll() const { return rll_; }
    void set_rll(RllParams params) { rll_ = params; }

    bool contains(std::span<const double> probs, double tol = kMembershipTolerance) const;
    bool contains(const PatternDistribution& mu, double tol = kMembershipTolerance) const;
    // LP feasibility of the polytope.
    bool is_empty() const;

    // Appends the polytope's rows over variables [offset, offset + patterns)
    // of `lp`, including the simplex equation.
    void append_rows(LinearProgram& lp, std::size_t offset) const;

private:
    Shape shape_;
    Alphabet alphabet_;
    std::vector<LinearConstraint> constraints_;
    std::uint64_t patterns_;
    std::optional<RllParams> rll_;
};

enum class AxialMode { Strict, Weak };

// Axial products. In strict mode Gamma_i must hold along every axis i; in weak
// mode the per-axis distributions are averaged first.
class AxialSystem {
public:
    AxialSystem(std::vector<ConstraintSet> factors, AxialMode mode);

    static AxialSystem strict_power(const ConstraintSet& gamma, int dim);
    static AxialSystem weak_power(const ConstraintSet& gamma, int dim);

    int dim() const { return static_cast<int>(factors_.size()); }
    AxialMode mode() const { return mode_; }
    const std::vector<ConstraintSet>& factors() const { return factors_; }
    const Alphabet& alphabet() const { return factors_.front().alphabet(); }
    // Factor i's 1-D shape placed along axis i.
    Shape axis_shape(int axis) const;
    // Union of the axis shapes.
    Shape shape() const;

private:
    std::vector<ConstraintSet> factors_;
    AxialMode mode_;
};

// Binary Gamma over [k+1] with mu(1^{k+1}) <= p.
ConstraintSet rll_constraint(int k, double p);

// Gamma = {mu : mu(a) = 0 for every forbidden a}.
ConstraintSet fully_constrained(const Alphabet& alphabet, const Shape& shape,
                                const std::vector<Pattern>& forbidden);

// min over nu in Gamma of the TV distance to mu; throws InfeasibleError when
// Gamma is empty.
double tv_distance_to_set(std::span<const double> mu, const ConstraintSet& gamma);
double tv_distance_to_set(const PatternDistribution& mu, const ConstraintSet& gamma);

// Is mu in B_eps(Gamma)? eps = 0 checks polytope membership directly.
bool in_ball(std::span<const double> mu, const ConstraintSet& gamma, double eps);

bool is_admissible(const Word& w, const ConstraintSet& gamma, double eps);
bool is_admissible(const Word& w, const AxialSystem& system, double eps);

struct CountOptions {
    // 0 selects the available hardware parallelism.
    unsigned threads = 0;
    // Force full enumeration even when budget pruning applies.
    bool exhaustive = false;
};

struct CountResult {
    std::uint64_t count = 0;
    // True when the depth-first budget pruning was active.
    bool pruned = false;
};

// Guards, in bits of search space (cells * log2 |alphabet|).
inline constexpr double kExhaustiveGuardBits = 34.0;
inline constexpr double kPrunedGuardBits = 63.0;

CountResult count_admissible(int side, const ConstraintSet& gamma, double eps,
                             const CountOptions& options = {});
CountResult count_admissible(int side, const AxialSystem& system, double eps,
                             const CountOptions& options = {});

// Reference counter: builds every word and calls is_admissible.
std::uint64_t count_admissible_bruteforce(int side, const ConstraintSet& gamma, double eps);
std::uint64_t count_admissible_bruteforce(int side, const AxialSystem& system, double eps);

// Offsets used for non-wrapping windows of a shape inside F_k^d:
// Tiling uses v in F_{n-k+1}^d (every window that fits), Literal uses
// v in F_{n-k}^d. Axes the shape does not extend in keep all n offsets.
enum class OffsetConvention { Tiling, Literal };

std::string to_string(OffsetConvention convention);

struct NoncyclicCount {
    std::uint64_t count = 0;
    OffsetConvention convention = OffsetConvention::Tiling;
};

// Words of F_n^d with no forbidden pattern in any non-wrapping window.
NoncyclicCount count_admissible_noncyclic(int side, const Alphabet& alphabet, const Shape& shape,
                                          const std::vector<Pattern>& forbidden,
                                          OffsetConvention convention = OffsetConvention::Tiling,
                                          const CountOptions& options = {});

// Axial version: each factor is applied to the non-wrapping windows along its
// axis. Meaningful for fully constrained factors.
NoncyclicCount count_admissible_noncyclic(int side, const AxialSystem& system,
                                          OffsetConvention convention = OffsetConvention::Tiling,
                                          const CountOptions& options = {});

} // namespace semicap
