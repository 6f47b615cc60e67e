#include "semicap/lp.hpp"

#include <cmath>
#include <limits>

#include "semicap/errors.hpp"

namespace semicap {

void LinearProgram::add_row(std::vector<double> coeffs, Relation relation, double rhs) {
    if (coeffs.size() != num_vars) {
        throw DimensionError("LP row has wrong number of coefficients");
    }
    rows.push_back(LpRow{std::move(coeffs), relation, rhs});
}

std::string to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t i, std::size_t j) { return data_[i * (cols_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * (cols_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, cols_); }
    double rhs(std::size_t i) const { return at(i, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t c) {
        const double inv = 1.0 / at(r, c);
        for (std::size_t j = 0; j <= cols_; ++j) {
            at(r, j) *= inv;
        }
        at(r, c) = 1.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r) {
                continue;
            }
            const double f = at(i, c);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j <= cols_; ++j) {
                at(i, j) -= f * at(r, j);
            }
            at(i, c) = 0.0;
            if (rhs(i) < 0.0 && rhs(i) > -1e-12) {
                rhs(i) = 0.0;
            }
        }
        basis_[r] = c;
    }

    void erase_row(std::size_t r) {
        data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (cols_ + 1)));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

// Maximizes cost . x over the tableau's columns flagged in `allowed`.
LpStatus run_simplex(Tableau& t, const std::vector<double>& cost, const std::vector<char>& allowed,
                     const LpOptions& options, std::size_t& pivots) {
    const double opt_tol = 1e-10;
    while (true) {
        if (pivots >= options.max_pivots) {
            return LpStatus::IterationLimit;
        }
        // Bland: lowest-index column with positive reduced cost enters.
        std::size_t entering = t.cols();
        for (std::size_t j = 0; j < t.cols(); ++j) {
            if (!allowed[j]) {
                continue;
            }
            double reduced = cost[j];
            for (std::size_t i = 0; i < t.rows(); ++i) {
                reduced -= cost[t.basis()[i]] * t.at(i, j);
            }
            if (reduced > opt_tol) {
                entering = j;
                break;
            }
        }
        if (entering == t.cols()) {
            return LpStatus::Optimal;
        }
        std::size_t leaving = t.rows();
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.rows(); ++i) {
            const double a = t.at(i, entering);
            if (a <= options.pivot_tolerance) {
                continue;
            }
            const double ratio = t.rhs(i) / a;
            if (ratio < best_ratio - 1e-14 ||
                (std::abs(ratio - best_ratio) <= 1e-14 && leaving < t.rows() &&
                 t.basis()[i] < t.basis()[leaving])) {
                best_ratio = ratio;
                leaving = i;
            }
        }
        if (leaving == t.rows()) {
            return LpStatus::Unbounded;
        }
        t.pivot(leaving, entering);
        ++pivots;
    }
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& row : lp.rows) {
        double v = 0.0;
        double scale = 1.0 + std::abs(row.rhs);
        for (std::size_t j = 0; j < x.size(); ++j) {
            v += row.coeffs[j] * x[j];
            scale += std::abs(row.coeffs[j] * x[j]);
        }
        double excess = 0.0;
        switch (row.relation) {
        case Relation::LessEqual: excess = v - row.rhs; break;
        case Relation::GreaterEqual: excess = row.rhs - v; break;
        case Relation::Equal: excess = std::abs(v - row.rhs); break;
        }
        worst = std::max(worst, excess / scale);
    }
    return worst;
}

LpSolution solve_tableau(const LinearProgram& lp, const LpOptions& options);

} // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
    auto sol = solve_tableau(lp, options);
    if (sol.status != LpStatus::Optimal || max_violation(lp, sol.x) <= 1e-8) {
        return sol;
    }
    // Accumulated round-off: retry once with a stricter pivot threshold.
    LpOptions strict = options;
    strict.pivot_tolerance = std::max(options.pivot_tolerance * 100.0, 1e-7);
    sol = solve_tableau(lp, strict);
    if (sol.status == LpStatus::Optimal && max_violation(lp, sol.x) > 1e-8) {
        sol.status = LpStatus::IterationLimit;
    }
    return sol;
}

namespace {

LpSolution solve_tableau(const LinearProgram& lp, const LpOptions& options) {
    const std::size_t n = lp.num_vars;
    if (lp.objective.size() != n) {
        throw DimensionError("LP objective has wrong length");
    }
    const std::size_t m = lp.rows.size();

    // Normalize to nonnegative right-hand sides.
    std::vector<LpRow> rows = lp.rows;
    std::size_t extra = 0;
    std::size_t artificial = 0;
    for (auto& row : rows) {
        if (row.coeffs.size() != n) {
            throw DimensionError("LP row has wrong number of coefficients");
        }
        if (row.rhs < 0.0) {
            for (double& c : row.coeffs) {
                c = -c;
            }
            row.rhs = -row.rhs;
            if (row.relation == Relation::LessEqual) {
                row.relation = Relation::GreaterEqual;
            } else if (row.relation == Relation::GreaterEqual) {
                row.relation = Relation::LessEqual;
            }
        }
        if (row.relation != Relation::Equal) {
            ++extra;
        }
        if (row.relation != Relation::LessEqual) {
            ++artificial;
        }
    }

    const std::size_t cols = n + extra + artificial;
    Tableau t(m, cols);
    std::vector<char> is_artificial(cols, 0);
    std::size_t next_extra = n;
    std::size_t next_art = n + extra;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = rows[i];
        for (std::size_t j = 0; j < n; ++j) {
            t.at(i, j) = row.coeffs[j];
        }
        t.rhs(i) = row.rhs;
        switch (row.relation) {
        case Relation::LessEqual:
            t.at(i, next_extra) = 1.0;
            t.basis()[i] = next_extra++;
            break;
        case Relation::GreaterEqual:
            t.at(i, next_extra++) = -1.0;
            [[fallthrough]];
        case Relation::Equal:
            t.at(i, next_art) = 1.0;
            is_artificial[next_art] = 1;
            t.basis()[i] = next_art++;
            break;
        }
    }

    std::size_t pivots = 0;
    LpSolution result;
    if (artificial > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = 0; j < cols; ++j) {
            if (is_artificial[j]) {
                phase1[j] = -1.0;
            }
        }
        std::vector<char> allowed(cols, 1);
        const auto status = run_simplex(t, phase1, allowed, options, pivots);
        if (status == LpStatus::IterationLimit) {
            result.status = status;
            return result;
        }
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < t.rows(); ++i) {
            if (is_artificial[t.basis()[i]]) {
                infeasibility += t.rhs(i);
            }
        }
        if (infeasibility > options.feasibility_tolerance) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        for (std::size_t i = 0; i < t.rows();) {
            if (!is_artificial[t.basis()[i]]) {
                ++i;
                continue;
            }
            // Largest entry: tiny pivots wreck the tableau.
            std::size_t col = cols;
            double biggest = options.pivot_tolerance;
            for (std::size_t j = 0; j < cols; ++j) {
                if (!is_artificial[j] && std::abs(t.at(i, j)) > biggest) {
                    biggest = std::abs(t.at(i, j));
                    col = j;
                }
            }
            if (col == cols) {
                t.erase_row(i);
            } else {
                t.pivot(i, col);
                ++i;
            }
        }
    }

    std::vector<double> cost(cols, 0.0);
    const double sign = lp.maximize ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) {
        cost[j] = sign * lp.objective[j];
    }
    std::vector<char> allowed(cols, 1);
    for (std::size_t j = 0; j < cols; ++j) {
        if (is_artificial[j]) {
            allowed[j] = 0;
        }
    }
    const auto status = run_simplex(t, cost, allowed, options, pivots);
    result.status = status;
    if (status != LpStatus::Optimal) {
        return result;
    }
    result.x.assign(n, 0.0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        if (t.basis()[i] < n) {
            result.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
        }
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        obj += lp.objective[j] * result.x[j];
    }
    result.objective = obj;
    return result;
}

} // namespace

} // namespace semicap
