#include "semicap/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "semicap/errors.hpp"
#include "semicap/rng.hpp"

namespace semicap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned resolve_threads(unsigned requested) {
    return requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&](unsigned id) {
        for (std::size_t i = next++; i < count; i = next++) {
            fn(id, i);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) {
        pool.emplace_back(worker, t);
    }
    worker(0);
}

double distance_or_zero(std::span<const double> probs, const ConstraintSet& gamma) {
    return gamma.contains(probs) ? 0.0 : tv_distance_to_set(probs, gamma);
}

} // namespace

Word sample_word(const SiteProductMeasure& mu, int side, std::uint64_t seed) {
    const int m = mu.side();
    if (side <= 0 || side % m != 0) {
        throw InvalidArgument("word side must be a positive multiple of the measure side");
    }
    const int d = mu.dim();
    const std::size_t cells = cell_count(d, side);
    const CounterRng rng(seed);
    std::vector<Symbol> out(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const auto& p = mu.site(cell_index(cell_point(c, d, side), m));
        out[c] = static_cast<Symbol>(sample_index(p, rng.uniform_at(c)));
    }
    return Word(d, side, std::move(out));
}

Word sample_word(const PeriodicProductMeasure& mu, int side, std::uint64_t seed) {
    if (mu.period() == 0 || side % mu.period() != 0) {
        throw InvalidArgument("word side must be a positive multiple of the period");
    }
    return sample_word(mu.tile(mu.period()), side, seed);
}

ConcentrationReport concentration_check(const SiteProductMeasure& mu, const ConstraintSet& gamma,
                                        const std::vector<double>& eps_list,
                                        const std::vector<int>& sides,
                                        const ConcentrationOptions& options) {
    if (eps_list.empty() || sides.empty()) {
        throw InvalidArgument("need at least one eps and one side");
    }
    if (mu.dim() != gamma.shape().dim() || mu.alphabet_size() != gamma.alphabet().size()) {
        throw DimensionError("measure does not match the constraint set");
    }
    for (double e : eps_list) {
        if (!(e >= 0.0)) {
            throw InvalidArgument("eps must be nonnegative");
        }
    }
    ConcentrationReport report;
    report.trials = options.trials;
    report.base_distance = distance_or_zero(averaged_marginal_probs(mu, gamma.shape()), gamma);
    const double min_eps = *std::min_element(eps_list.begin(), eps_list.end());
    report.base_flagged = min_eps > 0.0 ? !(report.base_distance < min_eps)
                                        : report.base_distance > 0.0;

    const unsigned threads = resolve_threads(options.threads);
    std::vector<double> previous(eps_list.size(), -1.0);
    for (int side : sides) {
        // Per-thread tallies keep the reduction order independent.
        std::vector<std::vector<std::size_t>> inside(threads,
                                                     std::vector<std::size_t>(eps_list.size(), 0));
        parallel_for(options.trials, threads, [&](unsigned id, std::size_t t) {
            const auto w = sample_word(mu, side, options.seed ^ static_cast<std::uint64_t>(t));
            const auto emp = empirical_distribution(w, gamma.shape(), gamma.alphabet());
            const bool member = gamma.contains(emp.probs());
            double dist = -1.0;
            for (std::size_t e = 0; e < eps_list.size(); ++e) {
                bool ok = member;
                if (!ok && eps_list[e] > 0.0) {
                    if (dist < 0.0) {
                        dist = tv_distance_to_set(emp.probs(), gamma);
                    }
                    ok = dist <= eps_list[e] + kMembershipTolerance;
                }
                inside[id][e] += ok ? 1 : 0;
            }
        });
        const double cells = static_cast<double>(cell_count(mu.dim(), side));
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            std::size_t total = 0;
            for (const auto& tally : inside) {
                total += tally[e];
            }
            const double frac = options.trials == 0
                                    ? 0.0
                                    : static_cast<double>(total) / static_cast<double>(options.trials);
            const double decay = frac >= 1.0 ? kInf : -std::log1p(-frac) / cells;
            report.rows.push_back({side, eps_list[e], frac, decay});
            if (frac < previous[e]) {
                report.monotone_in_side = false;
            }
            previous[e] = frac;
        }
    }
    return report;
}

HasseReport hasse_report(const ConstraintSet& gamma, int dim, const HasseOptions& options) {
    HindOptions hind = options.hind;
    if (hind.threads == 0) {
        hind.threads = options.threads;
    }
    auto ind = hind_bound_report(gamma, dim, options.eps_list, options.sides, hind);

    std::vector<HasseQuantity> q;
    q.push_back({"hind", ind.lower_bound, "computed"});
    for (const auto& row : ind.rows) {
        if (row.eps > 0.0) {
            std::ostringstream name;
            name << "hind_eps=" << row.eps;
            q.push_back({name.str(), row.value, "computed"});
        }
    }
    q.push_back({"lifted_bound_d" + std::to_string(dim), ind.lifted_rate, "computed"});
    q.push_back({"capacity_1d", ind.capacity_1d, "computed"});
    q.push_back({"dimension_bound_d" + std::to_string(dim), ind.dimension_bound, "closed form"});
    if (std::isfinite(ind.iid_closed_form)) {
        q.push_back({"iid_closed_form", ind.iid_closed_form, "closed form"});
    }
    if (std::isfinite(ind.curve_closed_form)) {
        q.push_back({"curve_closed_form", ind.curve_closed_form, "closed form"});
    }
    CountOptions count_options;
    count_options.threads = options.threads;
    for (int n : options.count_sides) {
        try {
            const auto rows = internal_capacity_sequence(gamma, 0.0, {n}, count_options);
            q.push_back({"count_rate_n=" + std::to_string(n), rows.front().rate, "count"});
        } catch (const SizeGuardError&) {
            // Out of desk scale; skipped.
        }
    }

    std::vector<HasseEdge> edges;
    const bool have_capacity = std::isfinite(ind.capacity_1d);
    if (have_capacity) {
        const double tol = std::max(options.capacity.gap_tolerance, 1e-9);
        edges.push_back({"hind <= capacity_1d", ind.lower_bound, ind.capacity_1d, tol,
                         ind.lower_bound <= ind.capacity_1d + tol});
        edges.push_back({"dimension_bound <= capacity_1d", ind.dimension_bound, ind.capacity_1d,
                         1e-12, ind.dimension_bound <= ind.capacity_1d + 1e-12});
    }
    edges.push_back({"lifted rate == hind", ind.lifted_rate, ind.lower_bound, 1e-12,
                     std::abs(ind.lifted_rate - ind.lower_bound) <= 1e-12});
    edges.push_back({"lift axis distance <= 0", ind.lift_axis_distance, 0.0, 1e-8,
                     ind.lift_axis_distance <= 1e-8});

    for (const auto& e : edges) {
        if (!e.holds) {
            throw InequalityViolation("inequality '" + e.claim + "' fails: lhs=" +
                                      std::to_string(e.lhs) + " rhs=" + std::to_string(e.rhs) +
                                      " tolerance=" + std::to_string(e.tolerance));
        }
    }
    const bool exceeds = have_capacity && ind.lifted_rate > ind.dimension_bound;
    return HasseReport{dim, std::move(q), std::move(edges), std::move(ind), exceeds};
}

namespace {

CyclicTable finish_table(std::vector<CyclicRow> rows) {
    CyclicTable table{std::move(rows), true};
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        table.rows[i].gap_decreased = table.rows[i].gap < table.rows[i - 1].gap;
        if (table.rows[i].gap > table.rows[i - 1].gap) {
            table.decreasing = false;
        }
    }
    return table;
}

CyclicRow make_row(int n, int dim, std::uint64_t cyc, std::uint64_t noncyc) {
    const double cells = static_cast<double>(cell_count(dim, n));
    double gap = kInf;
    if (cyc > 0) {
        gap = (std::log2(static_cast<double>(noncyc)) - std::log2(static_cast<double>(cyc))) / cells;
    }
    return {n, cyc, noncyc, cyc <= noncyc, gap, false};
}

} // namespace

CyclicTable cyclic_vs_noncyclic(const Alphabet& alphabet, const Shape& shape,
                                const std::vector<Pattern>& forbidden,
                                const std::vector<int>& sides, const CountOptions& options) {
    const auto gamma = fully_constrained(alphabet, shape, forbidden);
    std::vector<CyclicRow> rows;
    for (int n : sides) {
        const auto cyc = count_admissible(n, gamma, 0.0, options).count;
        const auto non = count_admissible_noncyclic(n, alphabet, shape, forbidden,
                                                    OffsetConvention::Tiling, options)
                             .count;
        rows.push_back(make_row(n, shape.dim(), cyc, non));
    }
    return finish_table(std::move(rows));
}

CyclicTable cyclic_vs_noncyclic(const AxialSystem& system, const std::vector<int>& sides,
                                const CountOptions& options) {
    std::vector<CyclicRow> rows;
    for (int n : sides) {
        const auto cyc = count_admissible(n, system, 0.0, options).count;
        const auto non =
            count_admissible_noncyclic(n, system, OffsetConvention::Tiling, options).count;
        rows.push_back(make_row(n, system.dim(), cyc, non));
    }
    return finish_table(std::move(rows));
}

} // namespace semicap
