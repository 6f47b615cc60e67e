#include "semicap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semicap/errors.hpp"
#include "semicap/frank_wolfe.hpp"
#include "semicap/rng.hpp"

namespace semicap {

namespace {

// Gradient components are evaluated with probabilities floored here, so
// coordinates at zero get a large finite slope instead of +infinity.
constexpr double kGradientFloor = 1e-30;

std::vector<double> prefix_marginal(std::span<const double> eta, std::size_t q) {
    std::vector<double> prefix(eta.size() / q, 0.0);
    for (std::size_t i = 0; i < eta.size(); ++i) {
        prefix[i / q] += eta[i];
    }
    return prefix;
}

int window_length(const ConstraintSet& gamma) {
    const auto& shape = gamma.shape();
    if (shape.dim() != 1) {
        throw DimensionError("capacity_1d needs a 1-D constraint set");
    }
    const int k = shape.cube_extent();
    if (shape != Shape::segment(1, 0, k)) {
        throw InvalidArgument("capacity_1d needs the window shape [k]");
    }
    return k;
}

} // namespace

double ShiftInvariancePolytope::residual(std::span<const double> eta) const {
    double worst = 0.0;
    for (const auto& eq : equations) {
        double v = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i) {
            v += eq[i] * eta[i];
        }
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

ShiftInvariancePolytope shift_invariant_equations(int k, const Alphabet& alphabet) {
    if (k < 1) {
        throw InvalidArgument("window length must be positive");
    }
    ShiftInvariancePolytope poly{k, alphabet, {}};
    if (k == 1) {
        return poly;
    }
    const std::size_t q = alphabet.size();
    const auto n = pattern_count(q, static_cast<std::size_t>(k));
    const auto inner = pattern_count(q, static_cast<std::size_t>(k - 1));
    for (std::uint64_t phi = 0; phi < inner; ++phi) {
        std::vector<double> eq(n, 0.0);
        for (std::size_t a = 0; a < q; ++a) {
            // (a, phi): a is the leading digit.
            eq[a * inner + phi] += 1.0;
            // (phi, a).
            eq[phi * q + a] -= 1.0;
        }
        poly.equations.push_back(std::move(eq));
    }
    return poly;
}

double conditional_entropy_rate(std::span<const double> eta, std::size_t alphabet_size) {
    return entropy_bits(eta) - entropy_bits(prefix_marginal(eta, alphabet_size));
}

double relative_entropy_objective(std::span<const double> eta, std::size_t alphabet_size) {
    const auto prefix = prefix_marginal(eta, alphabet_size);
    const double q = static_cast<double>(alphabet_size);
    double divergence = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (eta[i] > 0.0) {
            const double mu = prefix[i / alphabet_size] / q;
            divergence += eta[i] * std::log2(eta[i] / mu);
        }
    }
    return std::log2(q) - divergence;
}

CapacityResult capacity_1d(const ConstraintSet& gamma, const CapacityOptions& options) {
    const int k = window_length(gamma);
    const std::size_t q = gamma.alphabet().size();
    const std::size_t n = gamma.pattern_space();
    const auto shift = shift_invariant_equations(k, gamma.alphabet());

    LinearProgram base;
    base.num_vars = n;
    base.objective.assign(n, 0.0);
    base.maximize = true;
    gamma.append_rows(base, 0);
    for (const auto& eq : shift.equations) {
        base.add_row(eq, Relation::Equal, 0.0);
    }

    auto oracle = [&](std::span<const double> direction) {
        LinearProgram lp = base;
        lp.objective.assign(direction.begin(), direction.end());
        auto sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) {
            throw InfeasibleError("constraint set has no shift-invariant point");
        }
        if (sol.status != LpStatus::Optimal) {
            throw Error("capacity LP failed: " + to_string(sol.status));
        }
        return std::move(sol.x);
    };

    ConcaveObjective objective;
    objective.value = [q](std::span<const double> eta) { return conditional_entropy_rate(eta, q); };
    objective.gradient = [q](std::span<const double> eta, std::span<double> grad) {
        const auto prefix = prefix_marginal(eta, q);
        for (std::size_t i = 0; i < eta.size(); ++i) {
            const double num = std::max(prefix[i / q], kGradientFloor);
            const double den = std::max(eta[i], kGradientFloor);
            grad[i] = std::log2(num / den);
        }
    };

    FrankWolfeOptions fw;
    fw.max_iterations = options.max_iterations;
    fw.gap_tolerance = options.gap_tolerance;

    CounterRng rng(options.seed);
    std::optional<FrankWolfeResult> best;
    std::size_t total_iterations = 0;
    const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        std::vector<double> direction(n);
        for (double& d : direction) {
            d = rng.uniform() - 0.5;
        }
        auto result = maximize_frank_wolfe(objective, oracle, oracle(direction), fw);
        total_iterations += result.iterations;
        if (!best || result.value > best->value) {
            best = std::move(result);
        }
    }

    std::vector<double> eta = best->x;
    double sum = 0.0;
    for (double& v : eta) {
        v = std::max(0.0, v);
        sum += v;
    }
    for (double& v : eta) {
        v /= sum;
    }
    const double cap = std::log2(static_cast<double>(q));
    return CapacityResult{std::clamp(best->value, 0.0, cap),
                          PatternDistribution(gamma.shape(), gamma.alphabet(), std::move(eta)),
                          total_iterations, best->gap, best->converged};
}

double transfer_matrix_capacity(std::size_t alphabet_size, int k,
                                const std::vector<Pattern>& forbidden) {
    if (k < 1 || alphabet_size < 1) {
        throw InvalidArgument("transfer matrix needs k >= 1 and a nonempty alphabet");
    }
    const std::size_t q = alphabet_size;
    const auto words = pattern_count(q, static_cast<std::size_t>(k));
    std::vector<char> banned(words, 0);
    for (const auto& f : forbidden) {
        if (f.size() != static_cast<std::size_t>(k)) {
            throw DimensionError("forbidden word length must equal k");
        }
        banned[encode_pattern(f, q)] = 1;
    }
    if (k == 1) {
        const auto allowed = std::count(banned.begin(), banned.end(), 0);
        if (allowed == 0) {
            throw InfeasibleError("every symbol is forbidden");
        }
        return std::log2(static_cast<double>(allowed));
    }
    // State = (k-1)-gram; edge s -> t labelled by the k-word joining them.
    const std::size_t states = words / q;
    std::vector<double> x(states, 1.0);
    std::vector<double> y(states);
    double lambda = 0.0;
    // Power iteration on A + I, which is aperiodic and has radius rho(A) + 1.
    for (int it = 0; it < 1000000; ++it) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::uint64_t w = 0; w < words; ++w) {
            if (!banned[w]) {
                y[w / q] += x[w % states];
            }
        }
        double norm = 0.0;
        for (std::size_t s = 0; s < states; ++s) {
            y[s] += x[s];
            norm += y[s];
        }
        double xnorm = 0.0;
        for (double v : x) {
            xnorm += v;
        }
        const double next = norm / xnorm;
        for (std::size_t s = 0; s < states; ++s) {
            x[s] = y[s] / norm;
        }
        if (it > 10 && std::abs(next - lambda) <= 1e-10 * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    const double rho = lambda - 1.0;
    if (rho < 1e-12) {
        throw InfeasibleError("constrained language is finite or empty");
    }
    return std::log2(rho);
}

namespace {

template <typename System>
std::vector<CapacityRow> capacity_rows(const System& system, int dim, double eps,
                                       const std::vector<int>& sides,
                                       const CountOptions& options) {
    std::vector<CapacityRow> rows;
    for (int n : sides) {
        const auto res = count_admissible(n, system, eps, options);
        const double cells = static_cast<double>(cell_count(dim, n));
        const double rate = res.count == 0 ? -std::numeric_limits<double>::infinity()
                                           : std::log2(static_cast<double>(res.count)) / cells;
        rows.push_back({n, res.count, rate});
    }
    return rows;
}

} // namespace

std::vector<CapacityRow> internal_capacity_sequence(const ConstraintSet& gamma, double eps,
                                                    const std::vector<int>& sides,
                                                    const CountOptions& options) {
    return capacity_rows(gamma, gamma.shape().dim(), eps, sides, options);
}

std::vector<CapacityRow> internal_capacity_sequence(const AxialSystem& system, double eps,
                                                    const std::vector<int>& sides,
                                                    const CountOptions& options) {
    return capacity_rows(system, system.dim(), eps, sides, options);
}

DimensionBound dimension_scaled_lower_bound(double cap1, int d) {
    if (d < 1) {
        throw InvalidArgument("dimension must be positive");
    }
    const double v = 1.0 + d * (cap1 - 1.0);
    return {v, v < 0.0};
}

} // namespace semicap
