#include "semicap/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "semicap/capacity.hpp"
#include "semicap/config.hpp"
#include "semicap/errors.hpp"
#include "semicap/indentropy.hpp"
#include "semicap/table.hpp"
#include "semicap/validation.hpp"

namespace semicap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Common {
    std::string config;
    std::vector<std::string> n_list;
    std::string n_range;
    std::vector<double> eps;
    int dim = 0;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string format = "csv";
    std::string out_path;
    std::vector<double> p_list;
    int grid = 0;
};

int parse_int(const std::string& s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("not an integer: '" + s + "'");
    }
    return v;
}

// --n takes comma lists, --n-range "a..b" or "a:b" (inclusive).
std::vector<int> sides_from(const Common& c, std::vector<int> fallback) {
    std::vector<int> out;
    for (const auto& item : c.n_list) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const auto pos = item.find(',', start);
            const auto tok = item.substr(start, pos == std::string::npos ? pos : pos - start);
            if (!tok.empty()) {
                out.push_back(parse_int(tok));
            }
            if (pos == std::string::npos) {
                break;
            }
            start = pos + 1;
        }
    }
    if (!c.n_range.empty()) {
        auto pos = c.n_range.find("..");
        std::size_t width = 2;
        if (pos == std::string::npos) {
            pos = c.n_range.find(':');
            width = 1;
        }
        if (pos == std::string::npos) {
            throw ConfigError("--n-range expects a..b");
        }
        const int a = parse_int(c.n_range.substr(0, pos));
        const int b = parse_int(c.n_range.substr(pos + width));
        if (a > b) {
            throw ConfigError("--n-range is empty");
        }
        for (int n = a; n <= b; ++n) {
            out.push_back(n);
        }
    }
    if (out.empty()) {
        out = std::move(fallback);
    }
    for (int n : out) {
        if (n < 1) {
            throw ConfigError("sides must be positive");
        }
    }
    return out;
}

unsigned resolve_threads(const Common& c) {
    if (c.threads) {
        return *c.threads;
    }
    if (const char* env = std::getenv("SEMICAP_THREADS")) {
        const std::string s(env);
        unsigned v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size()) {
            return v;
        }
        throw ConfigError("SEMICAP_THREADS must be a nonnegative integer");
    }
    return 0;
}

SystemConfig load(const Common& c) {
    if (c.config.empty()) {
        throw ConfigError("--config is required");
    }
    auto cfg = load_config(c.config);
    if (c.seed) {
        cfg.solver.seed = *c.seed;
    }
    return cfg;
}

void emit(const Common& c, const Table& table, const std::string& comment, std::ostream& out) {
    std::ofstream file;
    std::ostream* os = &out;
    if (!c.out_path.empty()) {
        file.open(c.out_path);
        if (!file) {
            throw ConfigError("cannot open output file '" + c.out_path + "'");
        }
        os = &file;
    }
    if (c.format == "jsonl") {
        write_jsonl(*os, table, comment);
    } else {
        write_csv(*os, table, comment);
    }
}

std::string comment_for(const SystemConfig& cfg, const std::string& command) {
    return "config_hash=" + cfg.hash + " seed=" + std::to_string(cfg.solver.seed) +
           " command=" + command;
}

std::string pattern_label(std::uint64_t index, const Alphabet& alphabet, std::size_t length) {
    std::string s;
    for (auto sym : decode_pattern(index, alphabet.size(), length)) {
        s += alphabet.label(sym);
    }
    return s;
}

HindOptions hind_options(const SystemConfig& cfg, unsigned threads) {
    HindOptions o;
    o.restarts = cfg.solver.hind_restarts;
    o.seed = cfg.solver.seed;
    o.max_sweeps = cfg.solver.max_sweeps;
    o.threads = threads;
    return o;
}

CapacityOptions capacity_options(const SystemConfig& cfg) {
    CapacityOptions o;
    o.restarts = cfg.solver.restarts;
    o.seed = cfg.solver.seed;
    o.max_iterations = cfg.solver.max_iterations;
    o.gap_tolerance = cfg.solver.gap_tolerance;
    return o;
}

int cmd_count(const Common& c, std::ostream& out) {
    const auto cfg = load(c);
    const auto sides = sides_from(c, {1, 2, 3, 4, 5, 6});
    const double eps = c.eps.empty() ? cfg.eps.front() : c.eps.front();
    CountOptions opts;
    opts.threads = resolve_threads(c);
    const auto rows = cfg.axial() ? internal_capacity_sequence(cfg.system(), eps, sides, opts)
                                  : internal_capacity_sequence(cfg.gamma, eps, sides, opts);
    Table t{{"n", "count", "rate"}, {}};
    for (const auto& r : rows) {
        t.add({static_cast<std::int64_t>(r.n), r.count, r.rate});
    }
    emit(c, t, comment_for(cfg, "count"), out);
    return kExitOk;
}

int cmd_capacity(const Common& c, std::ostream& out) {
    const auto cfg = load(c);
    const auto res = capacity_1d(cfg.gamma, capacity_options(cfg));
    Table t{{"kind", "key", "value"}, {}};
    t.add({std::string("summary"), std::string("capacity"), res.value});
    t.add({std::string("summary"), std::string("duality_gap"), res.duality_gap});
    t.add({std::string("summary"), std::string("iterations"), static_cast<double>(res.iterations)});
    t.add({std::string("summary"), std::string("converged"), res.converged ? 1.0 : 0.0});
    const auto& eta = res.optimizer;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        t.add({std::string("optimizer"), pattern_label(i, cfg.alphabet, cfg.gamma.shape().size()),
               eta[i]});
    }
    emit(c, t, comment_for(cfg, "capacity"), out);
    return res.converged ? kExitOk : kExitNonConvergence;
}

int cmd_indentropy(const Common& c, std::ostream& out) {
    const auto cfg = load(c);
    const auto sides = sides_from(c, {2, 3, 4, 6});
    const auto eps_list = c.eps.empty() ? cfg.eps : c.eps;
    const auto opts = hind_options(cfg, resolve_threads(c));
    const int extent = cfg.gamma.shape().cube_extent();
    Table t{{"eps", "n", "value", "witness_distance", "certified"}, {}};
    for (double eps : eps_list) {
        for (int n : sides) {
            if (n < extent) {
                continue;
            }
            const auto r = hind_fixed_n(cfg.gamma, n, eps, opts);
            t.add({eps, static_cast<std::int64_t>(n), r.value, r.witness_distance, r.certified});
        }
    }
    if (t.rows.empty()) {
        throw ConfigError("no side is at least the window extent");
    }
    emit(c, t, comment_for(cfg, "indentropy"), out);
    return kExitOk;
}

int cmd_curve(const Common& c, std::ostream& out) {
    std::vector<double> ps = c.p_list;
    if (c.grid > 0) {
        for (int i = 1; i <= c.grid; ++i) {
            ps.push_back(0.25 * i / c.grid);
        }
    }
    if (ps.empty()) {
        ps = {0.01, 0.05, 0.1, 0.2};
    }
    Table t{{"p", "value", "x", "y"}, {}};
    for (double p : ps) {
        const auto pt = curve_optimum_01p(p);
        t.add({p, pt.value, pt.x, pt.y});
    }
    emit(c, t, "config_hash=none seed=0 command=curve", out);
    return kExitOk;
}

int cmd_report(const Common& c, std::ostream& out) {
    const auto cfg = load(c);
    const int dim = c.dim > 0 ? c.dim : cfg.dim;
    const unsigned threads = resolve_threads(c);
    HasseOptions opts;
    opts.threads = threads;
    opts.hind = hind_options(cfg, threads);
    opts.capacity = capacity_options(cfg);
    if (!c.n_list.empty() || !c.n_range.empty()) {
        opts.sides = sides_from(c, {});
    }
    const auto report = hasse_report(cfg.gamma, dim, opts);

    Table t{{"section", "name", "value", "bound", "detail"}, {}};
    for (const auto& q : report.quantities) {
        t.add({std::string("quantity"), q.name, q.value, kNaN, q.source});
    }
    for (const auto& e : report.edges) {
        t.add({std::string("edge"), e.claim, e.lhs, e.rhs,
               std::string(e.holds ? "holds" : "violated")});
    }
    t.add({std::string("comparison"), std::string("lifted bound > dimension bound"),
           report.independence.lifted_rate, report.independence.dimension_bound,
           std::string(report.hind_exceeds_dimension_bound ? "true" : "false")});

    // Concentration of the line witness around its averaged marginal.
    std::vector<double> eps;
    for (double e : c.eps.empty() ? cfg.eps : c.eps) {
        if (e > 0.0) {
            eps.push_back(e);
        }
    }
    if (eps.empty()) {
        eps = {0.01};
    }
    const auto& witness = report.independence.line_witness;
    const int m = witness.side();
    std::vector<int> sides;
    for (int target : {30, 100, 300}) {
        sides.push_back((target + m - 1) / m * m);
    }
    ConcentrationOptions copts;
    copts.trials = cfg.solver.trials;
    copts.seed = cfg.solver.seed;
    copts.threads = threads;
    const auto conc = concentration_check(witness, cfg.gamma, eps, sides, copts);
    for (const auto& row : conc.rows) {
        t.add({std::string("concentration"),
               "N=" + std::to_string(row.side) + " eps=" + format_double(row.eps),
               row.inside_fraction, row.decay_estimate,
               std::string(conc.base_flagged ? "base flagged" : "")});
    }
    emit(c, t, comment_for(cfg, "report"), out);
    return kExitOk;
}

int cmd_cyclic(const Common& c, std::ostream& out) {
    const auto cfg = load(c);
    if (!cfg.forbidden) {
        throw ConfigError("cyclic-vs-noncyclic needs a forbidden-pattern constraint");
    }
    const auto sides = sides_from(c, {4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
    CountOptions opts;
    opts.threads = resolve_threads(c);
    const auto table = cfg.axial()
                           ? cyclic_vs_noncyclic(cfg.system(), sides, opts)
                           : cyclic_vs_noncyclic(cfg.alphabet, cfg.gamma.shape(), *cfg.forbidden,
                                                 sides, opts);
    Table t{{"n", "cyclic", "noncyclic", "contained", "gap", "gap_decreased"}, {}};
    for (const auto& r : table.rows) {
        t.add({static_cast<std::int64_t>(r.n), r.cyclic, r.noncyclic, r.contained, r.gap,
               r.gap_decreased});
    }
    emit(c, t,
         comment_for(cfg, "cyclic-vs-noncyclic") +
             " decreasing=" + (table.decreasing ? "true" : "false"),
         out);
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity and independence-entropy bounds for semiconstrained systems",
                 "semicap"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) {
            sub->add_option("--config", c.config, "System definition file")->required();
        }
        sub->add_option("--seed", c.seed, "Override the solver seed");
        sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
        sub->add_option("--format", c.format, "Output format")
            ->check(CLI::IsMember({"csv", "jsonl"}));
        sub->add_option("--out", c.out_path, "Write the table here instead of stdout");
    };
    auto add_sides = [&](CLI::App* sub) {
        sub->add_option("--n", c.n_list, "Sides, comma separated");
        sub->add_option("--n-range", c.n_range, "Inclusive side range a..b");
    };

    auto* count = app.add_subcommand("count", "Admissible block counts and rates");
    add_common(count, true);
    add_sides(count);
    count->add_option("--eps", c.eps, "Ball radius (first value used)");

    auto* capacity = app.add_subcommand("capacity", "Capacity of a 1-D system");
    add_common(capacity, true);

    auto* ind = app.add_subcommand("indentropy", "Independence-entropy lower bounds");
    add_common(ind, true);
    add_sides(ind);
    ind->add_option("--eps", c.eps, "Ball radii")->delimiter(',');

    auto* curve = app.add_subcommand("curve", "Optimum of (H(x)+H(y))/2 on xy <= p");
    add_common(curve, false);
    curve->add_option("--p", c.p_list, "Values of p")->delimiter(',');
    curve->add_option("--grid", c.grid, "Also use p = 0.25 i / grid for i = 1..grid");

    auto* report = app.add_subcommand("report", "Inequality report and concentration check");
    add_common(report, true);
    add_sides(report);
    report->add_option("--dim", c.dim, "Dimension of the axial product");
    report->add_option("--eps", c.eps, "Radii for the concentration check")->delimiter(',');

    auto* cyclic =
        app.add_subcommand("cyclic-vs-noncyclic", "Cyclic against non-cyclic block counts");
    add_common(cyclic, true);
    add_sides(cyclic);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        if (count->parsed()) {
            return cmd_count(c, out);
        }
        if (capacity->parsed()) {
            return cmd_capacity(c, out);
        }
        if (ind->parsed()) {
            return cmd_indentropy(c, out);
        }
        if (curve->parsed()) {
            return cmd_curve(c, out);
        }
        if (report->parsed()) {
            return cmd_report(c, out);
        }
        return cmd_cyclic(c, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SizeGuardError& e) {
        err << "size guard: " << e.what() << '\n';
        return kExitSizeGuard;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DimensionError& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InequalityViolation& e) {
        err << "report failed: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace semicap
