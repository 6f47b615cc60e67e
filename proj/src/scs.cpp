#include "semicap/scs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "semicap/errors.hpp"

namespace semicap {

// ---------------------------------------------------------------- ConstraintSet

ConstraintSet::ConstraintSet(Shape shape, Alphabet alphabet,
                             std::vector<LinearConstraint> constraints)
    : shape_(std::move(shape)),
      alphabet_(std::move(alphabet)),
      constraints_(std::move(constraints)),
      patterns_(pattern_count(alphabet_.size(), shape_.size())) {
    for (const auto& c : constraints_) {
        if (c.coeffs.size() != patterns_) {
            throw DimensionError("constraint length does not match pattern space");
        }
        if (c.relation == Relation::GreaterEqual) {
            throw InvalidArgument("constraints must be <= or = rows");
        }
        if (!std::isfinite(c.bound) ||
            !std::all_of(c.coeffs.begin(), c.coeffs.end(),
                         [](double v) { return std::isfinite(v); })) {
            throw InvalidArgument("constraint entries must be finite");
        }
    }
}

bool ConstraintSet::contains(std::span<const double> probs, double tol) const {
    if (probs.size() != patterns_) {
        throw DimensionError("distribution length does not match pattern space");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (p < -tol) {
            return false;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
        return false;
    }
    for (const auto& c : constraints_) {
        double v = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            v += c.coeffs[i] * probs[i];
        }
        if (c.relation == Relation::LessEqual ? v > c.bound + tol : std::abs(v - c.bound) > tol) {
            return false;
        }
    }
    return true;
}

bool ConstraintSet::contains(const PatternDistribution& mu, double tol) const {
    if (!(mu.shape() == shape_) || !(mu.alphabet() == alphabet_)) {
        throw DimensionError("distribution lives on a different pattern space");
    }
    return contains(mu.probs(), tol);
}

void ConstraintSet::append_rows(LinearProgram& lp, std::size_t offset) const {
    std::vector<double> row(lp.num_vars, 0.0);
    for (const auto& c : constraints_) {
        std::fill(row.begin(), row.end(), 0.0);
        std::copy(c.coeffs.begin(), c.coeffs.end(), row.begin() + static_cast<std::ptrdiff_t>(offset));
        lp.add_row(row, c.relation, c.bound);
    }
    std::fill(row.begin(), row.end(), 0.0);
    std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(offset), patterns_, 1.0);
    lp.add_row(row, Relation::Equal, 1.0);
}

bool ConstraintSet::is_empty() const {
    LinearProgram lp;
    lp.num_vars = patterns_;
    lp.objective.assign(patterns_, 0.0);
    append_rows(lp, 0);
    return solve_lp(lp).status != LpStatus::Optimal;
}

// ---------------------------------------------------------------- AxialSystem

AxialSystem::AxialSystem(std::vector<ConstraintSet> factors, AxialMode mode)
    : factors_(std::move(factors)), mode_(mode) {
    if (factors_.empty()) {
        throw InvalidArgument("axial system needs at least one factor");
    }
    for (const auto& f : factors_) {
        if (f.shape().dim() != 1) {
            throw DimensionError("axial factors must be 1-D");
        }
        if (!f.shape().contains(Point{0})) {
            throw InvalidArgument("axial factor shapes must contain 0");
        }
        if (!(f.alphabet() == factors_.front().alphabet())) {
            throw InvalidArgument("axial factors must share the alphabet");
        }
    }
    if (mode_ == AxialMode::Weak) {
        const auto& first = factors_.front();
        for (const auto& f : factors_) {
            if (!(f.shape() == first.shape()) || f.constraints().size() != first.constraints().size()) {
                throw InvalidArgument("weak axial product needs a single shared constraint set");
            }
            for (std::size_t i = 0; i < f.constraints().size(); ++i) {
                const auto& a = f.constraints()[i];
                const auto& b = first.constraints()[i];
                if (a.coeffs != b.coeffs || a.bound != b.bound || a.relation != b.relation) {
                    throw InvalidArgument("weak axial product needs a single shared constraint set");
                }
            }
        }
        if (first.shape() != Shape::segment(1, 0, first.shape().cube_extent())) {
            throw InvalidArgument("weak axial product needs a window shape [k]");
        }
    }
}

AxialSystem AxialSystem::strict_power(const ConstraintSet& gamma, int dim) {
    if (dim < 1) {
        throw InvalidArgument("dimension must be positive");
    }
    return AxialSystem(std::vector<ConstraintSet>(static_cast<std::size_t>(dim), gamma),
                       AxialMode::Strict);
}

AxialSystem AxialSystem::weak_power(const ConstraintSet& gamma, int dim) {
    if (dim < 1) {
        throw InvalidArgument("dimension must be positive");
    }
    return AxialSystem(std::vector<ConstraintSet>(static_cast<std::size_t>(dim), gamma),
                       AxialMode::Weak);
}

Shape AxialSystem::axis_shape(int axis) const {
    return factors_.at(static_cast<std::size_t>(axis)).shape().embed_along(dim(), axis);
}

Shape AxialSystem::shape() const {
    Shape s = axis_shape(0);
    for (int i = 1; i < dim(); ++i) {
        s = s.unite(axis_shape(i));
    }
    return s;
}

// ---------------------------------------------------------------- constructors

ConstraintSet rll_constraint(int k, double p) {
    if (k < 1) {
        throw InvalidArgument("RLL parameter k must be positive");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("RLL frequency cap p must lie in [0, 1]");
    }
    const Shape shape = Shape::segment(1, 0, k + 1);
    const auto n = pattern_count(2, shape.size());
    LinearConstraint cap;
    cap.coeffs.assign(n, 0.0);
    cap.coeffs[n - 1] = 1.0;
    cap.bound = p;
    ConstraintSet gamma(shape, Alphabet::binary(), {cap});
    gamma.set_rll({k, p});
    return gamma;
}

ConstraintSet fully_constrained(const Alphabet& alphabet, const Shape& shape,
                                const std::vector<Pattern>& forbidden) {
    const auto n = pattern_count(alphabet.size(), shape.size());
    std::vector<std::uint64_t> indices;
    for (const auto& a : forbidden) {
        if (a.size() != shape.size()) {
            throw DimensionError("forbidden pattern length does not match shape");
        }
        for (Symbol s : a) {
            if (s >= alphabet.size()) {
                throw InvalidArgument("forbidden pattern symbol outside alphabet");
            }
        }
        indices.push_back(encode_pattern(a, alphabet.size()));
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    std::vector<LinearConstraint> constraints;
    for (auto idx : indices) {
        LinearConstraint c;
        c.coeffs.assign(n, 0.0);
        c.coeffs[idx] = 1.0;
        c.bound = 0.0;
        c.relation = Relation::Equal;
        constraints.push_back(std::move(c));
    }
    return ConstraintSet(shape, alphabet, std::move(constraints));
}

// ---------------------------------------------------------------- distance

double tv_distance_to_set(std::span<const double> mu, const ConstraintSet& gamma) {
    const std::size_t n = gamma.pattern_space();
    if (mu.size() != n) {
        throw DimensionError("distribution length does not match pattern space");
    }
    // Variables: nu (n), t (n); minimize sum(t) / 2 with t >= |mu - nu|.
    LinearProgram lp;
    lp.num_vars = 2 * n;
    lp.objective.assign(2 * n, 0.0);
    std::fill(lp.objective.begin() + static_cast<std::ptrdiff_t>(n), lp.objective.end(), 0.5);
    gamma.append_rows(lp, 0);
    std::vector<double> row(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        row[i] = 1.0;
        row[n + i] = -1.0;
        lp.add_row(row, Relation::LessEqual, mu[i]);
        row[i] = -1.0;
        lp.add_row(row, Relation::LessEqual, -mu[i]);
    }
    const auto sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible) {
        throw InfeasibleError("constraint set is empty");
    }
    if (sol.status != LpStatus::Optimal) {
        throw Error("distance LP failed: " + to_string(sol.status));
    }
    return std::clamp(sol.objective, 0.0, 1.0);
}

double tv_distance_to_set(const PatternDistribution& mu, const ConstraintSet& gamma) {
    if (!(mu.shape() == gamma.shape()) || !(mu.alphabet() == gamma.alphabet())) {
        throw DimensionError("distribution lives on a different pattern space");
    }
    return tv_distance_to_set(mu.probs(), gamma);
}

bool in_ball(std::span<const double> mu, const ConstraintSet& gamma, double eps) {
    if (eps < 0.0) {
        throw InvalidArgument("eps must be nonnegative");
    }
    if (gamma.contains(mu)) {
        return true;
    }
    if (eps == 0.0) {
        return false;
    }
    return tv_distance_to_set(mu, gamma) <= eps + kMembershipTolerance;
}

// ---------------------------------------------------------------- admissibility

bool is_admissible(const Word& w, const ConstraintSet& gamma, double eps) {
    if (w.dim() != gamma.shape().dim()) {
        throw DimensionError("word and constraint set dimensions differ");
    }
    const auto fr = empirical_distribution(w, gamma.shape(), gamma.alphabet());
    return in_ball(fr.probs(), gamma, eps);
}

bool is_admissible(const Word& w, const AxialSystem& system, double eps) {
    if (w.dim() != system.dim()) {
        throw DimensionError("word and axial system dimensions differ");
    }
    if (system.mode() == AxialMode::Strict) {
        for (int i = 0; i < system.dim(); ++i) {
            const auto& gamma = system.factors()[static_cast<std::size_t>(i)];
            const auto fr = empirical_distribution(w, system.axis_shape(i), gamma.alphabet());
            if (!in_ball(fr.probs(), gamma, eps)) {
                return false;
            }
        }
        return true;
    }
    const auto& gamma = system.factors().front();
    std::vector<double> avg(gamma.pattern_space(), 0.0);
    for (int i = 0; i < system.dim(); ++i) {
        const auto fr = empirical_distribution(w, system.axis_shape(i), gamma.alphabet());
        for (std::size_t j = 0; j < avg.size(); ++j) {
            avg[j] += fr[j] / system.dim();
        }
    }
    return in_ball(avg, gamma, eps);
}

// ---------------------------------------------------------------- counting engine

namespace {

// One membership test: the pattern counts of `windows` must lie in Gamma.
struct WindowTest {
    const ConstraintSet* gamma = nullptr;
    std::vector<std::vector<std::size_t>> windows;
};

struct PrunableRow {
    std::size_t test = 0;
    const std::vector<double>* coeffs = nullptr;
    double budget = 0.0;
};

class Enumerator {
public:
    Enumerator(std::size_t cells, std::size_t q, std::vector<WindowTest> tests, double eps,
               bool prune)
        : cells_(cells), q_(q), tests_(std::move(tests)), eps_(eps) {
        completed_at_.resize(cells_);
        for (std::size_t t = 0; t < tests_.size(); ++t) {
            for (std::size_t w = 0; w < tests_[t].windows.size(); ++w) {
                const auto& win = tests_[t].windows[w];
                const std::size_t last = win.empty() ? 0 : *std::max_element(win.begin(), win.end());
                completed_at_[last].push_back({t, w});
            }
        }
        if (prune && eps_ == 0.0) {
            for (std::size_t t = 0; t < tests_.size(); ++t) {
                const double den = static_cast<double>(tests_[t].windows.size());
                for (const auto& c : tests_[t].gamma->constraints()) {
                    const bool nonneg = std::all_of(c.coeffs.begin(), c.coeffs.end(),
                                                    [](double v) { return v >= 0.0; });
                    if (nonneg) {
                        rows_.push_back({t, &c.coeffs, (c.bound + kMembershipTolerance) * den});
                    }
                }
            }
        }
        rows_of_test_.resize(tests_.size());
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            rows_of_test_[rows_[r].test].push_back(r);
        }
    }

    bool pruning() const { return !rows_.empty(); }

    std::uint64_t run(unsigned threads) {
        if (threads == 0) {
            threads = std::max(1u, std::thread::hardware_concurrency());
        }
        std::size_t depth = 0;
        std::uint64_t tasks = 1;
        while (depth < cells_ && tasks < 8ull * threads) {
            tasks *= q_;
            ++depth;
        }
        std::atomic<std::uint64_t> next{0};
        std::atomic<std::uint64_t> total{0};
        auto worker = [&] {
            State st = fresh_state();
            std::uint64_t local = 0;
            for (std::uint64_t task = next++; task < tasks; task = next++) {
                local += run_task(st, task, depth);
            }
            total += local;
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned i = 0; i < threads; ++i) {
                pool.emplace_back(worker);
            }
        }
        return total.load();
    }

private:
    struct State {
        std::vector<Symbol> word;
        std::vector<std::vector<std::uint64_t>> counts;
        std::vector<double> sums;
    };

    State fresh_state() const {
        State st;
        st.word.assign(cells_, 0);
        for (const auto& t : tests_) {
            st.counts.emplace_back(t.gamma->pattern_space(), 0);
        }
        st.sums.assign(rows_.size(), 0.0);
        return st;
    }

    std::uint64_t pattern_of(const State& st, const std::vector<std::size_t>& win) const {
        std::uint64_t idx = 0;
        for (std::size_t c : win) {
            idx = idx * q_ + st.word[c];
        }
        return idx;
    }

    bool assign(State& st, std::size_t cell, Symbol s) const {
        st.word[cell] = s;
        bool ok = true;
        for (const auto& [t, w] : completed_at_[cell]) {
            const auto idx = pattern_of(st, tests_[t].windows[w]);
            ++st.counts[t][idx];
            for (std::size_t r : rows_of_test_[t]) {
                st.sums[r] += (*rows_[r].coeffs)[idx];
                if (st.sums[r] > rows_[r].budget) {
                    ok = false;
                }
            }
        }
        return ok;
    }

    void unassign(State& st, std::size_t cell) const {
        for (const auto& [t, w] : completed_at_[cell]) {
            const auto idx = pattern_of(st, tests_[t].windows[w]);
            --st.counts[t][idx];
            for (std::size_t r : rows_of_test_[t]) {
                st.sums[r] -= (*rows_[r].coeffs)[idx];
            }
        }
    }

    bool leaf_ok(const State& st) const {
        for (std::size_t t = 0; t < tests_.size(); ++t) {
            const auto& gamma = *tests_[t].gamma;
            const double den = static_cast<double>(tests_[t].windows.size());
            if (eps_ == 0.0) {
                // Exact counts: compare c.counts against b * den.
                for (const auto& c : gamma.constraints()) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
                        if (st.counts[t][i] != 0) {
                            v += c.coeffs[i] * static_cast<double>(st.counts[t][i]);
                        }
                    }
                    const double tol = kMembershipTolerance * den;
                    const double b = c.bound * den;
                    if (c.relation == Relation::LessEqual ? v > b + tol : std::abs(v - b) > tol) {
                        return false;
                    }
                }
            } else {
                std::vector<double> probs(st.counts[t].size());
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    probs[i] = static_cast<double>(st.counts[t][i]) / den;
                }
                if (!in_ball(probs, gamma, eps_)) {
                    return false;
                }
            }
        }
        return true;
    }

    std::uint64_t dfs(State& st, std::size_t cell) const {
        if (cell == cells_) {
            return leaf_ok(st) ? 1 : 0;
        }
        std::uint64_t total = 0;
        for (std::size_t s = 0; s < q_; ++s) {
            if (assign(st, cell, static_cast<Symbol>(s))) {
                total += dfs(st, cell + 1);
            }
            unassign(st, cell);
        }
        return total;
    }

    std::uint64_t run_task(State& st, std::uint64_t task, std::size_t depth) const {
        const Pattern prefix = decode_pattern(task, q_, depth);
        std::size_t assigned = 0;
        bool ok = true;
        for (; assigned < depth; ++assigned) {
            if (!assign(st, assigned, prefix[assigned])) {
                ok = false;
                ++assigned;
                break;
            }
        }
        const std::uint64_t result = ok ? dfs(st, depth) : 0;
        while (assigned-- > 0) {
            unassign(st, assigned);
        }
        return result;
    }

    std::size_t cells_;
    std::size_t q_;
    std::vector<WindowTest> tests_;
    double eps_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> completed_at_;
    std::vector<PrunableRow> rows_;
    std::vector<std::vector<std::size_t>> rows_of_test_;
};

double search_bits(std::size_t cells, std::size_t q) {
    return static_cast<double>(cells) * std::log2(static_cast<double>(q));
}

CountResult run_enumerator(std::size_t cells, std::size_t q, std::vector<WindowTest> tests,
                           double eps, const CountOptions& options) {
    if (eps < 0.0) {
        throw InvalidArgument("eps must be nonnegative");
    }
    if (tests.empty()) {
        if (search_bits(cells, q) >= 64.0) {
            throw SizeGuardError("count does not fit in 64 bits");
        }
        std::uint64_t all = 1;
        for (std::size_t i = 0; i < cells; ++i) {
            all *= q;
        }
        return CountResult{all, false};
    }
    Enumerator e(cells, q, std::move(tests), eps, !options.exhaustive);
    const double bits = search_bits(cells, q);
    const double guard = e.pruning() ? kPrunedGuardBits : kExhaustiveGuardBits;
    if (bits > guard) {
        throw SizeGuardError("search space of " + std::to_string(bits) +
                             " bits exceeds the guard of " + std::to_string(guard) + " bits");
    }
    return CountResult{e.run(options.threads), e.pruning()};
}

template <typename Fn>
std::uint64_t for_each_word(int dim, int side, std::size_t q, Fn&& accept) {
    const std::size_t cells = cell_count(dim, side);
    if (search_bits(cells, q) > kExhaustiveGuardBits) {
        throw SizeGuardError("search space exceeds the exhaustive guard");
    }
    std::vector<Symbol> cur(cells, 0);
    std::uint64_t count = 0;
    while (true) {
        if (accept(Word(dim, side, cur))) {
            ++count;
        }
        std::size_t i = 0;
        while (i < cells && ++cur[i] == q) {
            cur[i++] = 0;
        }
        if (i == cells) {
            break;
        }
    }
    return count;
}

} // namespace

CountResult count_admissible(int side, const ConstraintSet& gamma, double eps,
                             const CountOptions& options) {
    const int d = gamma.shape().dim();
    std::vector<WindowTest> tests{{&gamma, cyclic_windows(gamma.shape(), side)}};
    return run_enumerator(cell_count(d, side), gamma.alphabet().size(), std::move(tests), eps,
                          options);
}

CountResult count_admissible(int side, const AxialSystem& system, double eps,
                             const CountOptions& options) {
    const int d = system.dim();
    std::vector<WindowTest> tests;
    if (system.mode() == AxialMode::Strict) {
        for (int i = 0; i < d; ++i) {
            tests.push_back({&system.factors()[static_cast<std::size_t>(i)],
                             cyclic_windows(system.axis_shape(i), side)});
        }
    } else {
        WindowTest t{&system.factors().front(), {}};
        for (int i = 0; i < d; ++i) {
            auto w = cyclic_windows(system.axis_shape(i), side);
            t.windows.insert(t.windows.end(), w.begin(), w.end());
        }
        tests.push_back(std::move(t));
    }
    return run_enumerator(cell_count(d, side), system.alphabet().size(), std::move(tests), eps,
                          options);
}

std::uint64_t count_admissible_bruteforce(int side, const ConstraintSet& gamma, double eps) {
    return for_each_word(gamma.shape().dim(), side, gamma.alphabet().size(),
                         [&](const Word& w) { return is_admissible(w, gamma, eps); });
}

std::uint64_t count_admissible_bruteforce(int side, const AxialSystem& system, double eps) {
    return for_each_word(system.dim(), side, system.alphabet().size(),
                         [&](const Word& w) { return is_admissible(w, system, eps); });
}

std::string to_string(OffsetConvention convention) {
    return convention == OffsetConvention::Tiling ? "tiling" : "literal";
}

namespace {

// Windows shape + v that fit inside F_n^d without wrapping. Along each axis
// the offsets run over [0, n - k + 1) (tiling) or [0, n - k) (literal), with k
// the cube extent of the shape.
std::vector<std::vector<std::size_t>> noncyclic_windows(const Shape& shape, int side,
                                                        OffsetConvention convention) {
    const int d = shape.dim();
    const int k = shape.cube_extent();
    const int offsets = convention == OffsetConvention::Tiling ? side - k + 1 : side - k;
    std::vector<std::vector<std::size_t>> windows;
    if (offsets <= 0) {
        return windows;
    }
    // Offsets only shrink along axes the shape extends in (all axes for a
    // single point), so an axis segment slides over every line.
    std::vector<int> range(static_cast<std::size_t>(d), offsets);
    bool any = false;
    for (int i = 0; i < d; ++i) {
        const bool extends = std::any_of(shape.points().begin(), shape.points().end(),
                                         [i](const Point& s) { return s[i] != 0; });
        any = any || extends;
        if (!extends) {
            range[static_cast<std::size_t>(i)] = side;
        }
    }
    if (!any) {
        std::fill(range.begin(), range.end(), offsets);
    }
    Point base(static_cast<std::size_t>(d), 0);
    while (true) {
        std::vector<std::size_t> cells;
        for (const auto& s : shape.points()) {
            Point p(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                p[i] = base[i] + s[i];
            }
            cells.push_back(cell_index(p, side));
        }
        windows.push_back(std::move(cells));
        int i = 0;
        while (i < d && ++base[i] == range[static_cast<std::size_t>(i)]) {
            base[i] = 0;
            ++i;
        }
        if (i == d) {
            break;
        }
    }
    return windows;
}

} // namespace

NoncyclicCount count_admissible_noncyclic(int side, const Alphabet& alphabet, const Shape& shape,
                                          const std::vector<Pattern>& forbidden,
                                          OffsetConvention convention,
                                          const CountOptions& options) {
    const int d = shape.dim();
    const ConstraintSet gamma = fully_constrained(alphabet, shape, forbidden);
    std::vector<WindowTest> tests;
    auto windows = noncyclic_windows(shape, side, convention);
    if (!windows.empty()) {
        tests.push_back({&gamma, std::move(windows)});
    }
    const auto res = run_enumerator(cell_count(d, side), alphabet.size(), std::move(tests), 0.0,
                                    options);
    return NoncyclicCount{res.count, convention};
}

NoncyclicCount count_admissible_noncyclic(int side, const AxialSystem& system,
                                          OffsetConvention convention,
                                          const CountOptions& options) {
    const int d = system.dim();
    std::vector<WindowTest> tests;
    for (int i = 0; i < d; ++i) {
        auto windows = noncyclic_windows(system.axis_shape(i), side, convention);
        if (windows.empty()) {
            continue;
        }
        if (system.mode() == AxialMode::Weak && !tests.empty()) {
            auto& w = tests.front().windows;
            w.insert(w.end(), windows.begin(), windows.end());
        } else {
            tests.push_back({&system.factors()[static_cast<std::size_t>(i)], std::move(windows)});
        }
    }
    const auto res = run_enumerator(cell_count(d, side), system.alphabet().size(),
                                    std::move(tests), 0.0, options);
    return NoncyclicCount{res.count, convention};
}

} // namespace semicap
