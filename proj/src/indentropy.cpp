#include "semicap/indentropy.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "semicap/capacity.hpp"
#include "semicap/errors.hpp"
#include "semicap/frank_wolfe.hpp"
#include "semicap/rng.hpp"

namespace semicap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCertifySlack = 1e-8;
constexpr double kGain = 1e-12;
constexpr double kInvPhi = 0.6180339887498949;

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

using Sites = std::vector<std::vector<double>>;

// Cached geometry for the averaged marginal of a product measure on F_n^d.
struct Geometry {
    const ConstraintSet& gamma;
    double eps;
    std::size_t q;
    std::size_t patterns;
    std::vector<std::vector<std::size_t>> windows;

    Geometry(const ConstraintSet& g, int n, double e)
        : gamma(g), eps(e), q(g.alphabet().size()), patterns(g.pattern_space()),
          windows(cyclic_windows(g.shape(), n)) {}

    std::size_t sites() const { return windows.size(); }

    std::vector<double> marginal(const Sites& s) const {
        std::vector<double> out(patterns, 0.0);
        std::vector<double> joint, next;
        for (const auto& cells : windows) {
            joint.assign(1, 1.0);
            for (std::size_t c : cells) {
                next.assign(joint.size() * q, 0.0);
                for (std::size_t i = 0; i < joint.size(); ++i) {
                    for (std::size_t a = 0; a < q; ++a) {
                        next[i * q + a] = joint[i] * s[c][a];
                    }
                }
                joint.swap(next);
            }
            for (std::size_t i = 0; i < patterns; ++i) {
                out[i] += joint[i];
            }
        }
        const double inv = 1.0 / static_cast<double>(windows.size());
        for (double& x : out) {
            x *= inv;
        }
        return out;
    }

    // The averaged marginal is affine in site u's distribution (n >= extent):
    // column a is the marginal with site u replaced by a point mass at a.
    std::vector<std::vector<double>> columns(Sites s, std::size_t u) const {
        std::vector<std::vector<double>> cols;
        for (std::size_t a = 0; a < q; ++a) {
            std::fill(s[u].begin(), s[u].end(), 0.0);
            s[u][a] = 1.0;
            cols.push_back(marginal(s));
        }
        return cols;
    }

    double distance(const std::vector<double>& pi) const {
        if (gamma.contains(pi)) {
            return 0.0;
        }
        return tv_distance_to_set(pi, gamma);
    }

    bool feasible(const Sites& s) const {
        const auto pi = marginal(s);
        if (eps == 0.0) {
            return gamma.contains(pi);
        }
        return in_ball(pi, gamma, eps);
    }

    // Membership up to round-off only; used where a search converges onto
    // the boundary and would otherwise settle just outside it.
    bool feasible_strict(const Sites& s) const {
        if (eps > 0.0) {
            return feasible(s);
        }
        return gamma.contains(marginal(s), 1e-13);
    }

    // Polytope of site-u distributions keeping the marginal in the ball.
    // Variables: p (q), then nu (patterns) and t (patterns) when lifted.
    LinearProgram site_polytope(const std::vector<std::vector<double>>& cols, bool lifted,
                                bool distance_budget) const {
        LinearProgram lp;
        lp.num_vars = lifted ? q + 2 * patterns : q;
        lp.objective.assign(lp.num_vars, 0.0);
        std::vector<double> simplex(lp.num_vars, 0.0);
        std::fill(simplex.begin(), simplex.begin() + static_cast<std::ptrdiff_t>(q), 1.0);
        lp.add_row(simplex, Relation::Equal, 1.0);
        if (!lifted) {
            for (const auto& c : gamma.constraints()) {
                std::vector<double> row(q, 0.0);
                for (std::size_t a = 0; a < q; ++a) {
                    for (std::size_t i = 0; i < patterns; ++i) {
                        row[a] += c.coeffs[i] * cols[a][i];
                    }
                }
                lp.add_row(row, c.relation, c.bound);
            }
            return lp;
        }
        gamma.append_rows(lp, q);
        for (std::size_t i = 0; i < patterns; ++i) {
            std::vector<double> upper(lp.num_vars, 0.0);
            std::vector<double> lower(lp.num_vars, 0.0);
            for (std::size_t a = 0; a < q; ++a) {
                upper[a] = cols[a][i];
                lower[a] = -cols[a][i];
            }
            upper[q + i] = -1.0;
            lower[q + i] = 1.0;
            upper[q + patterns + i] = -1.0;
            lower[q + patterns + i] = -1.0;
            lp.add_row(std::move(upper), Relation::LessEqual, 0.0);
            lp.add_row(std::move(lower), Relation::LessEqual, 0.0);
        }
        if (distance_budget) {
            std::vector<double> budget(lp.num_vars, 0.0);
            for (std::size_t i = 0; i < patterns; ++i) {
                budget[q + patterns + i] = 0.5;
            }
            lp.add_row(std::move(budget), Relation::LessEqual, eps);
        }
        return lp;
    }
};

double site_entropy_sum(const Sites& s) {
    double h = 0.0;
    for (const auto& p : s) {
        h += entropy_bits(p);
    }
    return h;
}

// Exact interval for eps = 0: every row is affine in x = p_u(1).
std::optional<std::pair<double, double>> exact_binary_interval(const Geometry& g, const Sites& s,
                                                               std::size_t u) {
    const auto cols = g.columns(s, u);
    double lo = 0.0, hi = 1.0;
    for (const auto& c : g.gamma.constraints()) {
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t i = 0; i < g.patterns; ++i) {
            v0 += c.coeffs[i] * cols[0][i];
            v1 += c.coeffs[i] * cols[1][i];
        }
        // v(x) = v0 + x (v1 - v0)
        const double slope = v1 - v0;
        const double room = c.bound - v0;
        const double tol = kMembershipTolerance * 1e-3;
        if (c.relation == Relation::Equal) {
            if (std::abs(slope) <= tol) {
                if (std::abs(room) > kMembershipTolerance) {
                    return std::nullopt;
                }
                continue;
            }
            const double x = room / slope;
            lo = std::max(lo, x);
            hi = std::min(hi, x);
            continue;
        }
        const double sgn = c.relation == Relation::LessEqual ? 1.0 : -1.0;
        // sgn * (v0 + x slope) <= sgn * bound
        const double a = sgn * slope;
        const double r = sgn * room;
        if (std::abs(a) <= tol) {
            if (r < -kMembershipTolerance) {
                return std::nullopt;
            }
        } else if (a > 0.0) {
            hi = std::min(hi, r / a);
        } else {
            lo = std::max(lo, r / a);
        }
    }
    if (lo > hi + 1e-12) {
        return std::nullopt;
    }
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(std::max(lo, hi), 0.0, 1.0);
    return std::make_pair(lo, hi);
}

std::optional<std::pair<double, double>> binary_interval(const Geometry& g, const Sites& s,
                                                         std::size_t u) {
    if (g.eps == 0.0) {
        return exact_binary_interval(g, s, u);
    }
    auto lp = g.site_polytope(g.columns(s, u), g.eps > 0.0, true);
    lp.objective[1] = 1.0;
    lp.maximize = false;
    const auto lo = solve_lp(lp);
    if (lo.status != LpStatus::Optimal) {
        return std::nullopt;
    }
    lp.maximize = true;
    const auto hi = solve_lp(lp);
    if (hi.status != LpStatus::Optimal) {
        return std::nullopt;
    }
    const double a = std::clamp(lo.x[1], 0.0, 1.0);
    const double b = std::clamp(hi.x[1], 0.0, 1.0);
    return std::make_pair(std::min(a, b), std::max(a, b));
}

// Best binary site value given the others: the point of the feasible
// interval closest to 1/2.
std::optional<double> best_binary_site(const Geometry& g, const Sites& s, std::size_t u) {
    const auto iv = binary_interval(g, s, u);
    if (!iv) {
        return std::nullopt;
    }
    return std::clamp(0.5, iv->first, iv->second);
}

// Entropy maximization at a non-binary site over its lifted polytope.
std::optional<std::vector<double>> best_general_site(const Geometry& g, const Sites& s,
                                                     std::size_t u) {
    const std::size_t q = g.q;
    const bool lifted = g.eps > 0.0;
    const auto base = g.site_polytope(g.columns(s, u), lifted, true);

    // Lift the current distribution into the polytope.
    LinearProgram anchor = base;
    for (std::size_t a = 0; a < q; ++a) {
        std::vector<double> row(base.num_vars, 0.0);
        row[a] = 1.0;
        anchor.add_row(std::move(row), Relation::Equal, s[u][a]);
    }
    auto start = solve_lp(anchor);

    auto oracle = [&](std::span<const double> direction) {
        LinearProgram lp = base;
        lp.objective.assign(direction.begin(), direction.end());
        lp.maximize = true;
        auto sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) {
            throw InfeasibleError("site polytope is empty");
        }
        return std::move(sol.x);
    };
    ConcaveObjective obj;
    obj.value = [q](std::span<const double> x) { return entropy_bits(x.first(q)); };
    obj.gradient = [q](std::span<const double> x, std::span<double> grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t a = 0; a < q; ++a) {
            grad[a] = -std::log2(std::max(x[a], 1e-30)) - 1.0 / std::log(2.0);
        }
    };
    std::vector<double> x0;
    if (start.status == LpStatus::Optimal) {
        x0 = std::move(start.x);
    } else {
        std::vector<double> dir(base.num_vars, 0.0);
        std::fill(dir.begin(), dir.begin() + static_cast<std::ptrdiff_t>(q), 1.0);
        try {
            x0 = oracle(dir);
        } catch (const InfeasibleError&) {
            return std::nullopt;
        }
    }
    FrankWolfeOptions fw;
    fw.max_iterations = 2000;
    fw.gap_tolerance = 1e-9;
    const auto res = maximize_frank_wolfe(obj, oracle, x0, fw);
    std::vector<double> p(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(q));
    double sum = 0.0;
    for (double& v : p) {
        v = std::max(0.0, v);
        sum += v;
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

double coordinate_pass(const Geometry& g, Sites& s) {
    double gain = 0.0;
    for (std::size_t u = 0; u < s.size(); ++u) {
        const double before = entropy_bits(s[u]);
        std::vector<double> candidate;
        if (g.q == 2) {
            const auto x = best_binary_site(g, s, u);
            if (!x) {
                continue;
            }
            candidate = {1.0 - *x, *x};
        } else {
            auto p = best_general_site(g, s, u);
            if (!p) {
                continue;
            }
            candidate = std::move(*p);
        }
        const double after = entropy_bits(candidate);
        if (after > before + 1e-14) {
            s[u] = std::move(candidate);
            gain += after - before;
        }
    }
    return gain;
}

// Joint move of two binary sites: search over x at u, with v set to its best
// response. The response is exact, so every candidate is feasible.
double pair_pass(const Geometry& g, Sites& s) {
    double gain = 0.0;
    for (std::size_t u = 0; u < s.size(); ++u) {
        for (std::size_t v = u + 1; v < s.size(); ++v) {
            const double before = entropy_bits(s[u]) + entropy_bits(s[v]);
            Sites work = s;
            auto eval = [&](double x, double* y_out) {
                work[u] = {1.0 - x, x};
                const auto y = best_binary_site(g, work, v);
                if (!y) {
                    return kNegInf;
                }
                if (y_out) {
                    *y_out = *y;
                }
                return binary_entropy(x) + binary_entropy(*y);
            };
            constexpr int kGrid = 32;
            int best_i = -1;
            double best_val = kNegInf;
            for (int i = 0; i <= kGrid; ++i) {
                const double val = eval(static_cast<double>(i) / kGrid, nullptr);
                if (val > best_val) {
                    best_val = val;
                    best_i = i;
                }
            }
            if (best_i < 0) {
                continue;
            }
            double a = std::max(0, best_i - 1) / static_cast<double>(kGrid);
            double b = std::min(kGrid, best_i + 1) / static_cast<double>(kGrid);
            double c = b - kInvPhi * (b - a);
            double d = a + kInvPhi * (b - a);
            double fc = eval(c, nullptr);
            double fd = eval(d, nullptr);
            for (int it = 0; it < 40; ++it) {
                if (fc >= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - kInvPhi * (b - a);
                    fc = eval(c, nullptr);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + kInvPhi * (b - a);
                    fd = eval(d, nullptr);
                }
            }
            double x = best_i / static_cast<double>(kGrid);
            const double xm = 0.5 * (a + b);
            if (eval(xm, nullptr) > best_val) {
                x = xm;
            }
            double y = 0.0;
            const double after = eval(x, &y);
            if (after > before + kGain) {
                s[u] = {1.0 - x, x};
                s[v] = {1.0 - y, y};
                gain += after - before;
            }
        }
    }
    return gain;
}

void ascend(const Geometry& g, Sites& s, const HindOptions& options) {
    const bool pairs = options.pair_moves && g.q == 2 && s.size() <= 64;
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double gain = coordinate_pass(g, s);
        if (gain < kGain && pairs) {
            gain += pair_pass(g, s);
        }
        if (gain < kGain) {
            break;
        }
    }
}

// Per-site distance minimization until the marginal enters the ball.
bool restore(const Geometry& g, Sites& s) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        if (g.feasible(s)) {
            return true;
        }
        for (std::size_t u = 0; u < s.size(); ++u) {
            auto lp = g.site_polytope(g.columns(s, u), true, false);
            for (std::size_t i = 0; i < g.patterns; ++i) {
                lp.objective[g.q + g.patterns + i] = 0.5;
            }
            const auto sol = solve_lp(lp);
            if (sol.status != LpStatus::Optimal) {
                return false;
            }
            for (std::size_t a = 0; a < g.q; ++a) {
                s[u][a] = std::max(0.0, sol.x[a]);
            }
            double sum = 0.0;
            for (double v : s[u]) {
                sum += v;
            }
            for (double& v : s[u]) {
                v /= sum;
            }
        }
    }
    return g.feasible(s);
}

std::optional<Sites> iid_start(const Geometry& g) {
    const std::size_t n = g.sites();
    if (g.q != 2) {
        Sites s(n, std::vector<double>(g.q, 1.0 / static_cast<double>(g.q)));
        return g.feasible(s) ? std::optional<Sites>(s) : std::nullopt;
    }
    auto at = [&](double x) { return Sites(n, std::vector<double>{1.0 - x, x}); };
    constexpr int kGrid = 512;
    int best = -1;
    double best_h = kNegInf;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = static_cast<double>(i) / kGrid;
        if (binary_entropy(x) > best_h && g.feasible_strict(at(x))) {
            best_h = binary_entropy(x);
            best = i;
        }
    }
    if (best < 0) {
        return std::nullopt;
    }
    // Push toward 1/2 by bisection against the next grid point.
    double lo = static_cast<double>(best) / kGrid;
    if (lo != 0.5) {
        double hi = lo < 0.5 ? std::min(0.5, lo + 1.0 / kGrid) : std::max(0.5, lo - 1.0 / kGrid);
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g.feasible_strict(at(mid)) ? lo : hi) = mid;
        }
    }
    return at(lo);
}

std::optional<Sites> period_two_start(const Geometry& g, int n, int dim) {
    if (g.q != 2 || n % 2 != 0) {
        return std::nullopt;
    }
    auto at = [&](double x, double y) {
        Sites s(g.sites());
        for (std::size_t c = 0; c < s.size(); ++c) {
            const auto p = cell_point(c, dim, n);
            int parity = 0;
            for (int v : p) {
                parity += v;
            }
            const double z = parity % 2 == 0 ? x : y;
            s[c] = {1.0 - z, z};
        }
        return s;
    };
    constexpr int kGrid = 32;
    double best_h = kNegInf;
    std::optional<Sites> best;
    for (int i = 0; i <= kGrid; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double x = static_cast<double>(i) / kGrid;
            const double y = static_cast<double>(j) / kGrid;
            const double h = binary_entropy(x) + binary_entropy(y);
            if (h > best_h) {
                auto s = at(x, y);
                if (g.feasible(s)) {
                    best_h = h;
                    best = std::move(s);
                }
            }
        }
    }
    return best;
}

Sites random_start(const Geometry& g, std::uint64_t key) {
    CounterRng rng(key);
    Sites s(g.sites(), std::vector<double>(g.q));
    for (auto& p : s) {
        double sum = 0.0;
        for (double& v : p) {
            v = -std::log(1.0 - rng.uniform());
            sum += v;
        }
        for (double& v : p) {
            v /= sum;
        }
    }
    return s;
}

} // namespace

double PeriodicProductMeasure::entropy_rate() const {
    if (site_dists.empty()) {
        throw InvalidArgument("periodic measure needs at least one site");
    }
    double h = 0.0;
    for (const auto& p : site_dists) {
        h += entropy_bits(p);
    }
    return h / static_cast<double>(site_dists.size());
}

SiteProductMeasure PeriodicProductMeasure::tile(int side) const {
    const int m = period();
    if (m == 0 || side <= 0 || side % m != 0) {
        throw InvalidArgument("side must be a positive multiple of the period");
    }
    std::vector<std::vector<double>> sites;
    for (int i = 0; i < side; ++i) {
        sites.push_back(site_dists[static_cast<std::size_t>(i % m)]);
    }
    return SiteProductMeasure(1, side, site_dists.front().size(), std::move(sites));
}

HindResult hind_fixed_n(const ConstraintSet& gamma, int n, double eps, const HindOptions& options) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw InvalidArgument("eps must be a finite nonnegative number");
    }
    const int dim = gamma.shape().dim();
    if (n < 1 || n < gamma.shape().cube_extent()) {
        throw InvalidArgument("n must be at least the extent of the window shape");
    }
    if (gamma.is_empty()) {
        throw InfeasibleError("constraint set is empty");
    }
    const Geometry g(gamma, n, eps);

    // Start 0: best i.i.d., start 1: best period-2, then random restarts,
    // then one constant word per symbol. Coordinate-wise restoration cannot
    // always leave the interior, so the point-mass starts cover systems whose
    // feasible product measures all sit on the boundary.
    const std::size_t random_end = 2 + options.restarts;
    const std::size_t starts = random_end + g.q;
    std::vector<std::optional<Sites>> results(starts);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < starts; i = next++) {
            std::optional<Sites> s;
            if (i == 0) {
                s = iid_start(g);
            } else if (i == 1) {
                s = period_two_start(g, n, dim);
            } else {
                if (i < random_end) {
                    s = random_start(g, mix64(options.seed) + (i - 2));
                } else {
                    std::vector<double> mass(g.q, 0.0);
                    mass[i - random_end] = 1.0;
                    s = Sites(g.sites(), mass);
                }
                if (!restore(g, *s)) {
                    s.reset();
                }
            }
            if (s) {
                ascend(g, *s, options);
            }
            results[i] = std::move(s);
        }
    };
    const unsigned threads = std::min<unsigned>(resolve_threads(options.threads),
                                                static_cast<unsigned>(starts));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }

    // Highest certified value, earliest start on ties.
    std::optional<HindResult> best;
    for (auto& s : results) {
        if (!s) {
            continue;
        }
        const double value = site_entropy_sum(*s) / static_cast<double>(g.sites());
        if (best && !(value > best->value)) {
            continue;
        }
        const double dist = g.distance(g.marginal(*s));
        if (dist > eps + kCertifySlack) {
            continue;
        }
        best = HindResult{value, SiteProductMeasure(dim, n, g.q, std::move(*s)), dist, true};
    }
    if (!best) {
        throw InfeasibleError("no feasible product measure found");
    }
    return std::move(*best);
}

CurvePoint curve_optimum_01p(double p) {
    if (!(p > 0.0) || p > 1.0) {
        throw InvalidArgument("p must lie in (0, 1]");
    }
    if (p >= 0.25) {
        return {1.0, 0.5, 0.5};
    }
    const double lo = std::sqrt(p);
    auto f = [p](double x) { return 0.5 * (binary_entropy(x) + binary_entropy(p / x)); };
    constexpr int kGrid = 20000;
    int best_i = 0;
    double best = kNegInf;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = lo + (1.0 - lo) * i / kGrid;
        if (f(x) > best) {
            best = f(x);
            best_i = i;
        }
    }
    double a = lo + (1.0 - lo) * std::max(0, best_i - 1) / kGrid;
    double b = lo + (1.0 - lo) * std::min(kGrid, best_i + 1) / kGrid;
    while (b - a > 1e-13) {
        const double c = b - kInvPhi * (b - a);
        const double d = a + kInvPhi * (b - a);
        if (f(c) >= f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    double x = 0.5 * (a + b);
    if (f(x) < best) {
        x = lo + (1.0 - lo) * best_i / kGrid;
    }
    const double y = p / x;
    return {f(x), std::max(x, y), std::min(x, y)};
}

SiteProductMeasure axial_lift(const SiteProductMeasure& line, int dim) {
    if (line.dim() != 1) {
        throw DimensionError("axial lift needs a 1-D measure");
    }
    if (dim < 1) {
        throw InvalidArgument("dimension must be positive");
    }
    const int n = line.side();
    const std::size_t cells = cell_count(dim, n);
    std::vector<std::vector<double>> sites(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        int s = 0;
        for (int v : cell_point(c, dim, n)) {
            s += v;
        }
        sites[c] = line.site(static_cast<std::size_t>(s % n));
    }
    return SiteProductMeasure(dim, n, line.alphabet_size(), std::move(sites));
}

// ---------------------------------------------------------------- multi-choice

MultiChoiceWord::MultiChoiceWord(int dim, int side, std::size_t alphabet_size,
                                 std::vector<std::uint32_t> cells)
    : dim_(dim), side_(side), alphabet_size_(alphabet_size), cells_(std::move(cells)) {
    if (alphabet_size_ == 0 || alphabet_size_ > 31) {
        throw InvalidArgument("multi-choice words support 1..31 symbols");
    }
    if (cells_.size() != cell_count(dim_, side_)) {
        throw DimensionError("multi-choice word needs one subset per cell");
    }
    const std::uint32_t full = (std::uint32_t{1} << alphabet_size_) - 1;
    for (auto m : cells_) {
        if (m == 0 || (m & ~full) != 0) {
            throw InvalidArgument("cell subsets must be nonempty and inside the alphabet");
        }
    }
}

std::vector<Symbol> MultiChoiceWord::subset(std::size_t cell) const {
    std::vector<Symbol> out;
    for (std::size_t a = 0; a < alphabet_size_; ++a) {
        if (cells_.at(cell) >> a & 1u) {
            out.push_back(static_cast<Symbol>(a));
        }
    }
    return out;
}

std::uint64_t fillings_count(const MultiChoiceWord& w) {
    std::uint64_t total = 1;
    for (auto m : w.cells()) {
        if (__builtin_mul_overflow(total, static_cast<std::uint64_t>(std::popcount(m)), &total)) {
            throw SizeGuardError("number of fillings exceeds 64 bits");
        }
    }
    return total;
}

namespace {

bool window_hits(const std::vector<std::uint32_t>& masks, const std::vector<std::size_t>& cells,
                 const Pattern& a) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if ((masks[cells[j]] >> a[j] & 1u) == 0) {
            return false;
        }
    }
    return true;
}

void check_forbidden(const Shape& shape, std::size_t q, const std::vector<Pattern>& forbidden) {
    for (const auto& a : forbidden) {
        if (a.size() != shape.size()) {
            throw DimensionError("forbidden pattern does not match the shape");
        }
        for (auto s : a) {
            if (s >= q) {
                throw InvalidArgument("forbidden pattern uses a symbol outside the alphabet");
            }
        }
    }
}

} // namespace

bool all_fillings_avoid(const MultiChoiceWord& w, const Shape& shape,
                        const std::vector<Pattern>& forbidden) {
    if (shape.dim() != w.dim()) {
        throw DimensionError("shape and word dimensions differ");
    }
    check_forbidden(shape, w.alphabet_size(), forbidden);
    for (const auto& cells : cyclic_windows(shape, w.side())) {
        for (const auto& a : forbidden) {
            if (window_hits(w.cells(), cells, a)) {
                return false;
            }
        }
    }
    return true;
}

CombinatorialResult hind_com_fixed_n(const Alphabet& alphabet, const Shape& shape,
                                     const std::vector<Pattern>& forbidden, int n,
                                     unsigned threads) {
    const std::size_t q = alphabet.size();
    if (q == 0 || q > 31) {
        throw InvalidArgument("alphabet must have 1..31 symbols");
    }
    if (n < 1) {
        throw InvalidArgument("side must be positive");
    }
    check_forbidden(shape, q, forbidden);
    const int dim = shape.dim();
    const std::size_t cells = cell_count(dim, n);
    const double bits = static_cast<double>(cells) * std::log2(std::pow(2.0, q) - 1.0);
    if (bits > kMultiChoiceGuardBits ||
        static_cast<double>(cells) * std::log2(static_cast<double>(q)) > 63.0) {
        throw SizeGuardError("multi-choice search space too large");
    }

    // Windows grouped by the last cell they touch.
    std::vector<std::vector<std::vector<std::size_t>>> closing(cells);
    for (auto& w : cyclic_windows(shape, n)) {
        const std::size_t last = *std::max_element(w.begin(), w.end());
        closing[last].push_back(std::move(w));
    }
    // Larger subsets first so good words are found early.
    std::vector<std::uint32_t> order;
    for (std::uint32_t m = 1; m < (std::uint32_t{1} << q); ++m) {
        order.push_back(m);
    }
    std::stable_sort(order.begin(), order.end(), [](std::uint32_t a, std::uint32_t b) {
        return std::popcount(a) > std::popcount(b);
    });
    std::vector<std::uint64_t> qpow(cells + 1, 1);
    for (std::size_t i = 1; i <= cells; ++i) {
        qpow[i] = qpow[i - 1] * q;
    }

    auto closes_ok = [&](const std::vector<std::uint32_t>& masks, std::size_t c) {
        for (const auto& w : closing[c]) {
            for (const auto& a : forbidden) {
                if (window_hits(masks, w, a)) {
                    return false;
                }
            }
        }
        return true;
    };

    const unsigned nthreads = resolve_threads(threads);
    std::size_t depth = 0;
    std::uint64_t tasks = 1;
    while (depth < cells && tasks < 8ull * nthreads) {
        tasks *= order.size();
        ++depth;
    }

    std::atomic<std::uint64_t> global{0};
    struct Local {
        std::uint64_t score = 0;
        std::vector<std::uint32_t> masks;
    };
    std::vector<Local> found(tasks);
    std::atomic<std::uint64_t> next{0};

    auto worker = [&] {
        std::vector<std::uint32_t> masks(cells, 0);
        for (std::uint64_t t = next++; t < tasks; t = next++) {
            Local& local = found[t];
            std::uint64_t score = 1;
            std::uint64_t rest = t;
            bool ok = true;
            // Most significant digit is the first cell, matching DFS order.
            for (std::size_t c = depth; c-- > 0;) {
                masks[c] = order[rest % order.size()];
                rest /= order.size();
            }
            for (std::size_t c = 0; c < depth && ok; ++c) {
                score *= static_cast<std::uint64_t>(std::popcount(masks[c]));
                ok = closes_ok(masks, c);
            }
            if (!ok) {
                continue;
            }
            auto dfs = [&](auto&& self, std::size_t c, std::uint64_t sc) -> void {
                const std::uint64_t bound = sc * qpow[cells - c];
                if (bound <= local.score || bound < global.load(std::memory_order_relaxed)) {
                    return;
                }
                if (c == cells) {
                    local.score = sc;
                    local.masks = masks;
                    std::uint64_t g = global.load();
                    while (sc > g && !global.compare_exchange_weak(g, sc)) {
                    }
                    return;
                }
                for (auto m : order) {
                    masks[c] = m;
                    if (closes_ok(masks, c)) {
                        self(self, c + 1, sc * static_cast<std::uint64_t>(std::popcount(m)));
                    }
                }
                masks[c] = 0;
            };
            dfs(dfs, depth, score);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < nthreads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }

    const Local* best = nullptr;
    for (const auto& l : found) {
        if (l.score > 0 && (!best || l.score > best->score)) {
            best = &l;
        }
    }
    if (!best) {
        throw InfeasibleError("every configuration contains a forbidden pattern");
    }
    MultiChoiceWord w(dim, n, q, best->masks);
    return {std::log2(static_cast<double>(best->score)) / static_cast<double>(cells), std::move(w),
            best->score};
}

// ---------------------------------------------------------------- report

IndependenceReport hind_bound_report(const ConstraintSet& gamma, int dim,
                                     const std::vector<double>& eps_list,
                                     const std::vector<int>& sides, const HindOptions& options) {
    if (gamma.shape().dim() != 1) {
        throw DimensionError("bound report needs a 1-D constraint set");
    }
    if (dim < 1) {
        throw InvalidArgument("dimension must be positive");
    }
    const int extent = gamma.shape().cube_extent();
    std::vector<double> eps_values = eps_list;
    if (std::find(eps_values.begin(), eps_values.end(), 0.0) == eps_values.end()) {
        eps_values.insert(eps_values.begin(), 0.0);
    }

    std::vector<EpsilonRow> rows;
    std::optional<HindResult> base;
    for (double eps : eps_values) {
        EpsilonRow row{eps, 0, kNegInf, 0.0, false};
        for (int n : sides) {
            if (n < extent) {
                continue;
            }
            auto res = hind_fixed_n(gamma, n, eps, options);
            if (res.value > row.value) {
                row = {eps, n, res.value, res.witness_distance, res.certified};
                if (eps == 0.0) {
                    base = std::move(res);
                }
            }
        }
        if (row.best_n == 0) {
            throw InvalidArgument("no side is at least the window extent");
        }
        rows.push_back(row);
    }

    const auto lifted = axial_lift(base->witness, dim);
    double axis_distance = 0.0;
    for (int axis = 0; axis < dim; ++axis) {
        const auto probs = averaged_marginal_probs(lifted, gamma.shape().embed_along(dim, axis));
        if (!gamma.contains(probs)) {
            axis_distance = std::max(axis_distance, tv_distance_to_set(probs, gamma));
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double cap1 = nan;
    DimensionBound dim_bound{nan, false};
    if (gamma.shape() == Shape::segment(1, 0, extent)) {
        cap1 = capacity_1d(gamma).value;
        dim_bound = dimension_scaled_lower_bound(cap1, dim);
    }
    double iid = nan;
    double curve = nan;
    if (const auto& rll = gamma.rll()) {
        const double threshold = std::pow(2.0, -(rll->k + 1));
        iid = rll->p >= threshold ? 1.0 : binary_entropy(std::pow(rll->p, 1.0 / (rll->k + 1)));
        if (rll->k == 1 && rll->p > 0.0) {
            curve = curve_optimum_01p(rll->p).value;
        }
    }

    return IndependenceReport{
        .dim = dim,
        .rows = std::move(rows),
        .lower_bound = base->value,
        .line_witness = base->witness,
        .lifted_witness = lifted,
        .lifted_rate = entropy_rate(lifted),
        .lift_axis_distance = axis_distance,
        .capacity_1d = cap1,
        .dimension_bound = dim_bound.value,
        .dimension_bound_degenerate = dim_bound.degenerate,
        .iid_closed_form = iid,
        .curve_closed_form = curve,
    };
}

} // namespace semicap
