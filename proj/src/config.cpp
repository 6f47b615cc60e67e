#include "semicap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semicap/errors.hpp"

namespace semicap {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"system", {"alphabet", "dim", "mode"}},
        {"constraint", {"type", "k", "p", "shape", "forbidden", "rows"}},
        {"epsilon", {"values"}},
        {"solver",
         {"seed", "restarts", "max_iterations", "gap_tolerance", "hind_restarts", "max_sweeps",
          "trials"}},
    };
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError(what + ": not a finite number: '" + s + "'");
    }
    return v;
}

long long to_int(const std::string& s, const std::string& what) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(what + ": not an integer: '" + s + "'");
    }
    return v;
}

std::size_t to_count(const std::string& s, const std::string& what) {
    const auto v = to_int(s, what);
    if (v < 0) {
        throw ConfigError(what + " must be nonnegative");
    }
    return static_cast<std::size_t>(v);
}

Pattern parse_pattern(const std::string& text, const Alphabet& alphabet, std::size_t length) {
    Pattern p;
    for (char c : text) {
        try {
            p.push_back(alphabet.index_of(std::string(1, c)));
        } catch (const InvalidArgument&) {
            throw ConfigError("pattern '" + text + "' uses a symbol outside the alphabet");
        }
    }
    if (p.size() != length) {
        throw ConfigError("pattern '" + text + "' does not match the shape size");
    }
    return p;
}

// "c0,c1,... <= b" or "... = b" over the shape's patterns in index order.
LinearConstraint parse_row(const std::string& text, std::uint64_t patterns) {
    Relation rel = Relation::LessEqual;
    auto pos = text.find("<=");
    std::size_t width = 2;
    if (pos == std::string::npos) {
        if (text.find(">=") != std::string::npos) {
            throw ConfigError("rows use <= or =; negate the row for >=");
        }
        pos = text.find('=');
        width = 1;
        rel = Relation::Equal;
    }
    if (pos == std::string::npos) {
        throw ConfigError("row '" + text + "' has no relation");
    }
    std::vector<double> coeffs;
    for (const auto& c : split(text.substr(0, pos), ',')) {
        coeffs.push_back(to_double(c, "row coefficient"));
    }
    if (coeffs.size() != patterns) {
        throw ConfigError("row has " + std::to_string(coeffs.size()) + " coefficients, expected " +
                          std::to_string(patterns));
    }
    return {std::move(coeffs), to_double(trim(text.substr(pos + width)), "row bound"), rel};
}

} // namespace

AxialSystem SystemConfig::system() const {
    if (mode == SystemMode::Strict) {
        return AxialSystem::strict_power(gamma, dim);
    }
    if (mode == SystemMode::Weak) {
        return AxialSystem::weak_power(gamma, dim);
    }
    throw InvalidArgument("configuration describes a single system, not an axial product");
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

Shape parse_shape(std::string_view text, int dim) {
    const std::string s = trim(text);
    try {
        if (s.rfind("segment:", 0) == 0) {
            return Shape::segment(dim, 0, static_cast<int>(to_int(s.substr(8), "segment length")));
        }
        if (s.rfind("cube:", 0) == 0) {
            return Shape::cube(dim, static_cast<int>(to_int(s.substr(5), "cube side")));
        }
        std::vector<Point> points;
        for (const auto& item : split(s, ';')) {
            Point p;
            for (const auto& c : split(item, ',')) {
                p.push_back(static_cast<int>(to_int(c, "shape coordinate")));
            }
            if (static_cast<int>(p.size()) != dim) {
                throw ConfigError("shape point '" + item + "' needs " + std::to_string(dim) +
                                  " coordinates");
            }
            points.push_back(std::move(p));
        }
        return Shape(dim, std::move(points));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("bad shape: ") + e.what());
    }
}

SystemConfig parse_config(std::string_view text) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    if (tree.empty()) {
        throw ConfigError("config is empty");
    }
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end() || (body.empty() && !body.data().empty())) {
            throw ConfigError("unknown section or top-level key '" + section + "'");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            }
        }
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
            return trim(*v);
        }
        return std::nullopt;
    };

    Alphabet alphabet = Alphabet::binary();
    if (auto a = get("system.alphabet")) {
        auto labels = split(*a, ',');
        for (const auto& l : labels) {
            if (l.size() != 1) {
                throw ConfigError("alphabet labels must be single characters");
            }
        }
        try {
            alphabet = Alphabet(std::move(labels));
        } catch (const Error& e) {
            throw ConfigError(std::string("bad alphabet: ") + e.what());
        }
    }
    int dim = 1;
    if (auto d = get("system.dim")) {
        dim = static_cast<int>(to_int(*d, "dim"));
        if (dim < 1 || dim > 8) {
            throw ConfigError("dim must be in 1..8");
        }
    }
    SystemMode mode = SystemMode::Single;
    if (auto m = get("system.mode")) {
        if (*m == "single") {
            mode = SystemMode::Single;
        } else if (*m == "strict") {
            mode = SystemMode::Strict;
        } else if (*m == "weak") {
            mode = SystemMode::Weak;
        } else {
            throw ConfigError("mode must be single, strict or weak");
        }
    }
    // Axial factors are 1-D; a single system lives in dimension dim.
    const int gamma_dim = mode == SystemMode::Single ? dim : 1;

    const auto type = get("constraint.type");
    if (!type) {
        throw ConfigError("[constraint] type is required");
    }
    auto require = [&](const std::string& key) {
        auto v = get("constraint." + key);
        if (!v) {
            throw ConfigError("constraint type " + *type + " needs '" + key + "'");
        }
        return *v;
    };
    auto reject = [&](std::initializer_list<const char*> keys) {
        for (const char* key : keys) {
            if (get(std::string("constraint.") + key)) {
                throw ConfigError(std::string("'") + key + "' does not apply to type " + *type);
            }
        }
    };

    std::optional<ConstraintSet> gamma;
    std::optional<std::vector<Pattern>> forbidden;
    try {
        if (*type == "rll") {
            reject({"shape", "forbidden", "rows"});
            if (gamma_dim != 1 || alphabet.size() != 2) {
                throw ConfigError("rll needs a binary alphabet and a 1-D window");
            }
            const int k = static_cast<int>(to_int(require("k"), "k"));
            const double p = to_double(require("p"), "p");
            gamma = rll_constraint(k, p);
            if (p == 0.0) {
                forbidden = std::vector<Pattern>{Pattern(static_cast<std::size_t>(k + 1), 1)};
            }
            // Keep the alphabet's labels.
            gamma = ConstraintSet(gamma->shape(), alphabet, gamma->constraints());
            gamma->set_rll({k, p});
        } else if (*type == "forbidden") {
            reject({"k", "p", "rows"});
            const auto shape = parse_shape(require("shape"), gamma_dim);
            std::vector<Pattern> list;
            const auto text = require("forbidden");
            if (!text.empty()) {
                for (const auto& item : split(text, ',')) {
                    list.push_back(parse_pattern(item, alphabet, shape.size()));
                }
            }
            gamma = fully_constrained(alphabet, shape, list);
            forbidden = std::move(list);
        } else if (*type == "linear") {
            reject({"k", "p", "forbidden"});
            const auto shape = parse_shape(require("shape"), gamma_dim);
            const auto patterns = pattern_count(alphabet.size(), shape.size());
            std::vector<LinearConstraint> rows;
            for (const auto& r : split(require("rows"), '|')) {
                rows.push_back(parse_row(r, patterns));
            }
            gamma = ConstraintSet(shape, alphabet, std::move(rows));
        } else if (*type == "full") {
            reject({"k", "p", "forbidden", "rows"});
            gamma = ConstraintSet(parse_shape(require("shape"), gamma_dim), alphabet);
            forbidden = std::vector<Pattern>{};
        } else {
            throw ConfigError("constraint type must be rll, forbidden, linear or full");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("bad constraint: ") + e.what());
    }

    std::vector<double> eps = {0.0};
    if (auto e = get("epsilon.values")) {
        eps.clear();
        for (const auto& item : split(*e, ',')) {
            const double v = to_double(item, "epsilon");
            if (v < 0.0) {
                throw ConfigError("epsilon values must be nonnegative");
            }
            eps.push_back(v);
        }
    }

    SolverSettings solver;
    if (auto v = get("solver.seed")) {
        solver.seed = static_cast<std::uint64_t>(to_count(*v, "seed"));
    }
    if (auto v = get("solver.restarts")) {
        solver.restarts = to_count(*v, "restarts");
    }
    if (auto v = get("solver.max_iterations")) {
        solver.max_iterations = to_count(*v, "max_iterations");
    }
    if (auto v = get("solver.gap_tolerance")) {
        solver.gap_tolerance = to_double(*v, "gap_tolerance");
    }
    if (auto v = get("solver.hind_restarts")) {
        solver.hind_restarts = to_count(*v, "hind_restarts");
    }
    if (auto v = get("solver.max_sweeps")) {
        solver.max_sweeps = to_count(*v, "max_sweeps");
    }
    if (auto v = get("solver.trials")) {
        solver.trials = to_count(*v, "trials");
    }

    SystemConfig cfg{alphabet, dim, mode, std::move(*gamma), std::move(forbidden), std::move(eps),
                     solver, fnv1a_hex(text)};
    if (cfg.axial()) {
        try {
            (void)cfg.system();
        } catch (const Error& e) {
            throw ConfigError(std::string("bad axial product: ") + e.what());
        }
    }
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace semicap
