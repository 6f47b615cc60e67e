// Dense two-phase simplex for small linear programs.
//
// Variables are nonnegative. Pivoting uses Bland's rule, so the method
// terminates on degenerate problems at the price of extra pivots; problem
// sizes in this library stay at a few hundred variables.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace semicap {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpRow {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    bool maximize = false;
    std::vector<LpRow> rows;

    void add_row(std::vector<double> coeffs, Relation relation, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

struct LpOptions {
    double feasibility_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    std::size_t max_pivots = 200000;
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

} // namespace semicap
