#include "semicap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "semicap/errors.hpp"

namespace semicap {

namespace {

int positive_mod(int value, int modulus) {
    const int r = value % modulus;
    return r < 0 ? r + modulus : r;
}

std::vector<double> validated(std::vector<double> probs) {
    double sum = 0.0;
    for (double& p : probs) {
        if (!std::isfinite(p)) {
            throw InvalidArgument("distribution entry is not finite");
        }
        if (p < 0.0) {
            if (p < -kNegativeTolerance) {
                throw InvalidArgument("distribution entry is negative");
            }
            p = 0.0;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidArgument("distribution does not sum to one");
    }
    return probs;
}

} // namespace

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) {
        throw InvalidArgument("alphabet must not be empty");
    }
    if (symbols_.size() > std::numeric_limits<Symbol>::max() + std::size_t{1}) {
        throw InvalidArgument("alphabet too large");
    }
    auto sorted = symbols_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("alphabet symbols must be distinct");
    }
}

Alphabet Alphabet::binary() { return Alphabet({"0", "1"}); }

Alphabet Alphabet::of_size(std::size_t q) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < q; ++i) {
        labels.push_back(std::to_string(i));
    }
    return Alphabet(std::move(labels));
}

Symbol Alphabet::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i] == label) {
            return static_cast<Symbol>(i);
        }
    }
    throw InvalidArgument("unknown symbol '" + std::string(label) + "'");
}

// ---------------------------------------------------------------- Shape

Shape::Shape(int dim, std::vector<Point> points) : dim_(dim), points_(std::move(points)) {
    if (dim_ < 1) {
        throw InvalidArgument("shape dimension must be positive");
    }
    for (const auto& p : points_) {
        if (static_cast<int>(p.size()) != dim_) {
            throw DimensionError("shape point has wrong dimension");
        }
    }
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

Shape Shape::cube(int dim, int side) {
    if (side < 1) {
        throw InvalidArgument("cube side must be positive");
    }
    const std::size_t n = cell_count(dim, side);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(cell_point(i, dim, side));
    }
    return Shape(dim, std::move(pts));
}

Shape Shape::segment(int dim, int axis, int length) {
    if (axis < 0 || axis >= dim) {
        throw InvalidArgument("segment axis out of range");
    }
    if (length < 1) {
        throw InvalidArgument("segment length must be positive");
    }
    std::vector<Point> pts;
    for (int i = 0; i < length; ++i) {
        Point p(dim, 0);
        p[axis] = i;
        pts.push_back(std::move(p));
    }
    return Shape(dim, std::move(pts));
}

Shape Shape::empty(int dim) { return Shape(dim, {}); }

bool Shape::contains(const Point& p) const {
    return std::binary_search(points_.begin(), points_.end(), p);
}

bool Shape::is_subset_of(const Shape& other) const {
    return dim_ == other.dim_ &&
           std::includes(other.points_.begin(), other.points_.end(), points_.begin(),
                         points_.end());
}

std::vector<std::size_t> Shape::positions_in(const Shape& other) const {
    if (!is_subset_of(other)) {
        throw InvalidArgument("shape is not a subset");
    }
    std::vector<std::size_t> pos;
    pos.reserve(points_.size());
    for (const auto& p : points_) {
        auto it = std::lower_bound(other.points_.begin(), other.points_.end(), p);
        pos.push_back(static_cast<std::size_t>(it - other.points_.begin()));
    }
    return pos;
}

int Shape::cube_extent() const {
    int extent = 0;
    for (const auto& p : points_) {
        for (int c : p) {
            if (c < 0) {
                throw InvalidArgument("shape has negative coordinates");
            }
            extent = std::max(extent, c + 1);
        }
    }
    return extent;
}

Shape Shape::unite(const Shape& other) const {
    if (dim_ != other.dim_) {
        throw DimensionError("cannot unite shapes of different dimension");
    }
    auto pts = points_;
    pts.insert(pts.end(), other.points_.begin(), other.points_.end());
    return Shape(dim_, std::move(pts));
}

Shape Shape::embed_along(int dim, int axis) const {
    if (dim_ != 1) {
        throw DimensionError("only 1-D shapes can be embedded along an axis");
    }
    if (axis < 0 || axis >= dim) {
        throw InvalidArgument("axis out of range");
    }
    std::vector<Point> pts;
    for (const auto& p : points_) {
        Point q(dim, 0);
        q[axis] = p[0];
        pts.push_back(std::move(q));
    }
    return Shape(dim, std::move(pts));
}

// ---------------------------------------------------------------- patterns

std::uint64_t pattern_count(std::size_t alphabet_size, std::size_t shape_size) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < shape_size; ++i) {
        if (count > kMaxPatterns / alphabet_size) {
            throw SizeGuardError("pattern space exceeds 2^40 entries");
        }
        count *= alphabet_size;
    }
    if (count > kMaxPatterns) {
        throw SizeGuardError("pattern space exceeds 2^40 entries");
    }
    return count;
}

std::uint64_t encode_pattern(std::span<const Symbol> pattern, std::size_t alphabet_size) {
    std::uint64_t index = 0;
    for (Symbol s : pattern) {
        index = index * alphabet_size + s;
    }
    return index;
}

Pattern decode_pattern(std::uint64_t index, std::size_t alphabet_size, std::size_t length) {
    Pattern p(length);
    for (std::size_t i = length; i-- > 0;) {
        p[i] = static_cast<Symbol>(index % alphabet_size);
        index /= alphabet_size;
    }
    return p;
}

std::vector<Pattern> enumerate_patterns(const Alphabet& alphabet, const Shape& shape) {
    if (shape.size() == 0) {
        throw InvalidArgument("shape must contain at least one point");
    }
    const std::uint64_t count = pattern_count(alphabet.size(), shape.size());
    std::vector<Pattern> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        out.push_back(decode_pattern(i, alphabet.size(), shape.size()));
    }
    return out;
}

// ---------------------------------------------------------------- cells

std::size_t cell_count(int dim, int side) {
    if (dim < 1 || side < 1) {
        throw InvalidArgument("dimension and side must be positive");
    }
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) {
        if (n > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(side)) {
            throw SizeGuardError("cube has too many cells");
        }
        n *= static_cast<std::size_t>(side);
    }
    return n;
}

Point cell_point(std::size_t index, int dim, int side) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
        p[i] = static_cast<int>(index % static_cast<std::size_t>(side));
        index /= static_cast<std::size_t>(side);
    }
    return p;
}

std::size_t cell_index(const Point& p, int side) {
    std::size_t index = 0;
    for (std::size_t i = p.size(); i-- > 0;) {
        index = index * static_cast<std::size_t>(side) +
                static_cast<std::size_t>(positive_mod(p[i], side));
    }
    return index;
}

// ---------------------------------------------------------------- Word

Word::Word(int dim, int side, std::vector<Symbol> cells)
    : dim_(dim), side_(side), cells_(std::move(cells)) {
    if (cells_.size() != cell_count(dim_, side_)) {
        throw DimensionError("word cell count does not match side^dim");
    }
}

Word Word::from_string(std::string_view text, const Alphabet& alphabet) {
    std::vector<Symbol> cells;
    for (char c : text) {
        cells.push_back(alphabet.index_of(std::string_view(&c, 1)));
    }
    const int side = static_cast<int>(cells.size());
    return Word(1, side, std::move(cells));
}

Word Word::from_rows(const std::vector<std::string>& rows, const Alphabet& alphabet) {
    const int n = static_cast<int>(rows.size());
    std::vector<Symbol> cells(cell_count(2, n));
    for (int y = 0; y < n; ++y) {
        if (static_cast<int>(rows[y].size()) != n) {
            throw DimensionError("2-D word must be square");
        }
        for (int x = 0; x < n; ++x) {
            cells[cell_index({x, y}, n)] = alphabet.index_of(std::string_view(&rows[y][x], 1));
        }
    }
    return Word(2, n, std::move(cells));
}

Word Word::constant(int dim, int side, Symbol s) {
    return Word(dim, side, std::vector<Symbol>(cell_count(dim, side), s));
}

Symbol Word::at(const Point& p) const {
    if (static_cast<int>(p.size()) != dim_) {
        throw DimensionError("point dimension does not match word");
    }
    return cells_[cell_index(p, side_)];
}

// ---------------------------------------------------------------- distributions

PatternDistribution::PatternDistribution(Shape shape, Alphabet alphabet, std::vector<double> probs)
    : shape_(std::move(shape)), alphabet_(std::move(alphabet)), probs_(validated(std::move(probs))) {
    if (probs_.size() != pattern_count(alphabet_.size(), shape_.size())) {
        throw DimensionError("distribution length does not match pattern space");
    }
}

PatternDistribution PatternDistribution::uniform(Shape shape, Alphabet alphabet) {
    const auto n = pattern_count(alphabet.size(), shape.size());
    std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    return PatternDistribution(std::move(shape), std::move(alphabet), std::move(probs));
}

PatternDistribution PatternDistribution::point_mass(Shape shape, Alphabet alphabet,
                                                    std::uint64_t index) {
    const auto n = pattern_count(alphabet.size(), shape.size());
    if (index >= n) {
        throw InvalidArgument("pattern index out of range");
    }
    std::vector<double> probs(n, 0.0);
    probs[index] = 1.0;
    return PatternDistribution(std::move(shape), std::move(alphabet), std::move(probs));
}

double PatternDistribution::probability(std::span<const Symbol> pattern) const {
    if (pattern.size() != shape_.size()) {
        throw DimensionError("pattern length does not match shape");
    }
    return probs_[encode_pattern(pattern, alphabet_.size())];
}

PatternDistribution PatternCounts::to_distribution() const {
    std::vector<double> probs(counts.size());
    const double den = static_cast<double>(denominator);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        probs[i] = static_cast<double>(counts[i]) / den;
    }
    return PatternDistribution(shape, alphabet, std::move(probs));
}

// ---------------------------------------------------------------- product measures

SiteProductMeasure::SiteProductMeasure(int dim, int side, std::size_t alphabet_size,
                                       std::vector<std::vector<double>> site_dists)
    : dim_(dim), side_(side), alphabet_size_(alphabet_size), site_dists_(std::move(site_dists)) {
    if (site_dists_.size() != cell_count(dim_, side_)) {
        throw DimensionError("product measure needs one distribution per cell");
    }
    for (auto& d : site_dists_) {
        if (d.size() != alphabet_size_) {
            throw DimensionError("site distribution has wrong length");
        }
        d = validated(std::move(d));
    }
}

SiteProductMeasure SiteProductMeasure::iid(int dim, int side, std::vector<double> dist) {
    const std::size_t q = dist.size();
    return SiteProductMeasure(dim, side, q,
                              std::vector<std::vector<double>>(cell_count(dim, side), dist));
}

// ---------------------------------------------------------------- empirical

std::vector<std::vector<std::size_t>> cyclic_windows(const Shape& shape, int side) {
    const int d = shape.dim();
    const std::size_t n = cell_count(d, side);
    std::vector<std::vector<std::size_t>> windows(n);
    Point q(d);
    for (std::size_t v = 0; v < n; ++v) {
        const Point base = cell_point(v, d, side);
        auto& cells = windows[v];
        cells.reserve(shape.size());
        for (const auto& s : shape.points()) {
            for (int i = 0; i < d; ++i) {
                q[i] = base[i] + s[i];
            }
            cells.push_back(cell_index(q, side));
        }
    }
    return windows;
}

PatternCounts empirical_counts(const Word& w, const Shape& shape, const Alphabet& alphabet) {
    if (shape.dim() != w.dim()) {
        throw DimensionError("shape and word dimensions differ");
    }
    PatternCounts out{shape, alphabet,
                      std::vector<std::uint64_t>(pattern_count(alphabet.size(), shape.size()), 0),
                      static_cast<std::uint64_t>(w.size())};
    for (Symbol s : w.cells()) {
        if (s >= alphabet.size()) {
            throw InvalidArgument("word symbol outside alphabet");
        }
    }
    const std::size_t q = alphabet.size();
    for (const auto& cells : cyclic_windows(shape, w.side())) {
        std::uint64_t index = 0;
        for (std::size_t c : cells) {
            index = index * q + w[c];
        }
        ++out.counts[index];
    }
    return out;
}

PatternDistribution empirical_distribution(const Word& w, const Shape& shape,
                                           const Alphabet& alphabet) {
    return empirical_counts(w, shape, alphabet).to_distribution();
}

namespace {

// Maps every index over `shape` to the index of its restriction to `sub`.
std::vector<std::uint64_t> restriction_map(const Shape& shape, const Shape& sub, std::size_t q) {
    const auto pos = sub.positions_in(shape);
    const auto n = pattern_count(q, shape.size());
    std::vector<std::uint64_t> map(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const Pattern p = decode_pattern(i, q, shape.size());
        std::uint64_t j = 0;
        for (std::size_t k : pos) {
            j = j * q + p[k];
        }
        map[i] = j;
    }
    return map;
}

} // namespace

PatternCounts marginal(const PatternCounts& counts, const Shape& sub) {
    const std::size_t q = counts.alphabet.size();
    const auto map = restriction_map(counts.shape, sub, q);
    PatternCounts out{sub, counts.alphabet,
                      std::vector<std::uint64_t>(pattern_count(q, sub.size()), 0),
                      counts.denominator};
    for (std::size_t i = 0; i < map.size(); ++i) {
        out.counts[map[i]] += counts.counts[i];
    }
    return out;
}

PatternDistribution marginal(const PatternDistribution& mu, const Shape& sub) {
    const std::size_t q = mu.alphabet().size();
    const auto map = restriction_map(mu.shape(), sub, q);
    std::vector<double> probs(pattern_count(q, sub.size()), 0.0);
    for (std::size_t i = 0; i < map.size(); ++i) {
        probs[map[i]] += mu[i];
    }
    return PatternDistribution(sub, mu.alphabet(), std::move(probs));
}

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size()) {
        throw DimensionError("distributions have different lengths");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        sum += std::abs(mu[i] - nu[i]);
    }
    return std::min(1.0, 0.5 * sum);
}

double tv_distance(const PatternDistribution& mu, const PatternDistribution& nu) {
    if (!(mu.shape() == nu.shape()) || !(mu.alphabet() == nu.alphabet())) {
        throw DimensionError("distributions live on different pattern spaces");
    }
    return tv_distance(mu.probs(), nu.probs());
}

std::vector<double> averaged_marginal_probs(const SiteProductMeasure& mu, const Shape& shape) {
    if (shape.dim() != mu.dim()) {
        throw DimensionError("shape and measure dimensions differ");
    }
    const std::size_t q = mu.alphabet_size();
    const std::size_t m = shape.size();
    const auto n = pattern_count(q, m);
    std::vector<double> out(n, 0.0);
    std::vector<double> joint;
    std::vector<double> next;
    for (const auto& cells : cyclic_windows(shape, mu.side())) {
        // Outer product of the window's site distributions in pattern order.
        joint.assign(1, 1.0);
        for (std::size_t c : cells) {
            const auto& p = mu.site(c);
            next.assign(joint.size() * q, 0.0);
            for (std::size_t i = 0; i < joint.size(); ++i) {
                for (std::size_t a = 0; a < q; ++a) {
                    next[i * q + a] = joint[i] * p[a];
                }
            }
            joint.swap(next);
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += joint[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(mu.sites());
    for (double& x : out) {
        x *= inv;
    }
    return out;
}

PatternDistribution averaged_marginal(const SiteProductMeasure& mu, const Shape& shape,
                                      const Alphabet& alphabet) {
    if (alphabet.size() != mu.alphabet_size()) {
        throw DimensionError("alphabet size does not match measure");
    }
    return PatternDistribution(shape, alphabet, averaged_marginal_probs(mu, shape));
}

// ---------------------------------------------------------------- entropy

double entropy_bits(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return std::max(0.0, h);
}

double entropy(const PatternDistribution& mu) { return entropy_bits(mu.probs()); }

double binary_entropy(double x) {
    const double p[2] = {x, 1.0 - x};
    return entropy_bits(p);
}

double product_entropy(const SiteProductMeasure& mu) {
    double h = 0.0;
    for (const auto& d : mu.site_dists()) {
        h += entropy_bits(d);
    }
    return h;
}

double entropy_rate(const SiteProductMeasure& mu) {
    return product_entropy(mu) / static_cast<double>(mu.sites());
}

} // namespace semicap
