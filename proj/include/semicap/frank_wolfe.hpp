// Conditional-gradient maximization of a concave function over a polytope
// that is only accessible through a linear maximization oracle.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace semicap {

struct ConcaveObjective {
    std::function<double(std::span<const double>)> value;
    // Writes the (possibly clamped) gradient at x into grad.
    std::function<void(std::span<const double> x, std::span<double> grad)> gradient;
};

// Returns argmax_{s in P} <direction, s>.
using LinearOracle = std::function<std::vector<double>(std::span<const double> direction)>;

struct FrankWolfeOptions {
    std::size_t max_iterations = 50000;
    double gap_tolerance = 1e-6;
    bool away_steps = true;
};

struct FrankWolfeResult {
    std::vector<double> x;
    double value = 0.0;
    // <grad, s - x> at the last iterate; bounds the suboptimality of a concave objective.
    double gap = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// `start` must lie in the polytope. It is kept as the first atom of the
// active set, so away steps may move back toward it.
FrankWolfeResult maximize_frank_wolfe(const ConcaveObjective& objective, const LinearOracle& oracle,
                                      std::vector<double> start,
                                      const FrankWolfeOptions& options = {});

} // namespace semicap
