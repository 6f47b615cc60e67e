#include "semicap/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>

#include "semicap/errors.hpp"

namespace semicap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

bool same_point(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12) {
            return false;
        }
    }
    return true;
}

// Maximizes the concave phi(g) = f(x + g d) over [0, g_max] by bisection on
// the directional derivative.
double line_search(const ConcaveObjective& f, const std::vector<double>& x,
                   const std::vector<double>& d, double g_max) {
    std::vector<double> y(x.size());
    std::vector<double> grad(x.size());
    auto slope = [&](double g) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = x[i] + g * d[i];
        }
        f.gradient(y, grad);
        return dot(grad, d);
    };
    if (slope(g_max) >= 0.0) {
        return g_max;
    }
    double lo = 0.0;
    double hi = g_max;
    for (int it = 0; it < 100 && hi - lo > 1e-16 * g_max; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

FrankWolfeResult maximize_frank_wolfe(const ConcaveObjective& objective, const LinearOracle& oracle,
                                      std::vector<double> start,
                                      const FrankWolfeOptions& options) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> atoms{start};
    std::vector<double> weights{1.0};
    std::vector<double> x = std::move(start);
    std::vector<double> grad(n);
    std::vector<double> dir(n);

    FrankWolfeResult result;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        objective.gradient(x, grad);
        std::vector<double> s = oracle(grad);
        if (s.size() != n) {
            throw DimensionError("linear oracle returned a point of wrong size");
        }
        const double gx = dot(grad, x);
        const double fw_gap = dot(grad, s) - gx;
        result.gap = fw_gap;
        result.iterations = it;
        if (fw_gap <= options.gap_tolerance) {
            result.converged = true;
            break;
        }
        result.iterations = it + 1;

        std::size_t away = 0;
        double away_gap = -1.0;
        if (options.away_steps && atoms.size() > 1) {
            double lowest = dot(grad, atoms[0]);
            for (std::size_t a = 1; a < atoms.size(); ++a) {
                const double v = dot(grad, atoms[a]);
                if (v < lowest) {
                    lowest = v;
                    away = a;
                }
            }
            away_gap = gx - lowest;
        }

        if (!options.away_steps || fw_gap >= away_gap) {
            for (std::size_t i = 0; i < n; ++i) {
                dir[i] = s[i] - x[i];
            }
            const double g = line_search(objective, x, dir, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += g * dir[i];
            }
            if (g >= 1.0) {
                atoms.assign(1, s);
                weights.assign(1, 1.0);
                continue;
            }
            for (double& w : weights) {
                w *= 1.0 - g;
            }
            auto found = std::find_if(atoms.begin(), atoms.end(),
                                      [&](const auto& a) { return same_point(a, s); });
            if (found == atoms.end()) {
                atoms.push_back(std::move(s));
                weights.push_back(g);
            } else {
                weights[static_cast<std::size_t>(found - atoms.begin())] += g;
            }
        } else {
            const double alpha = weights[away];
            const double g_max = alpha / (1.0 - alpha);
            for (std::size_t i = 0; i < n; ++i) {
                dir[i] = x[i] - atoms[away][i];
            }
            const double g = line_search(objective, x, dir, g_max);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += g * dir[i];
            }
            for (double& w : weights) {
                w *= 1.0 + g;
            }
            weights[away] -= g;
            if (g >= g_max || weights[away] <= 1e-15) {
                atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away));
                weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(away));
            }
        }
    }
    result.value = objective.value(x);
    result.x = std::move(x);
    return result;
}

} // namespace semicap
