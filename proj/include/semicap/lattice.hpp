// Lattice primitives: alphabets, shapes, words over the cube F_n^d, pattern
// indexing, cyclic empirical distributions, marginals and entropies.
//
// Conventions used everywhere in the library:
//  * A point of Z^d is a vector of d coordinates. Cells of F_n^d are stored
//    with coordinate 0 varying fastest: index(v) = sum_i v_i * n^i. For d = 2
//    this means a matrix written row by row has coordinate 0 as the column
//    and coordinate 1 as the row.
//  * Shape points are deduplicated and sorted lexicographically. A pattern on
//    a shape is the tuple of symbols at the sorted points, and its index is
//    the base-|alphabet| number with the first point as most significant digit.
//  * All window translations wrap modulo n in every axis.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semicap {

using Symbol = std::uint8_t;
using Point = std::vector<int>;
using Pattern = std::vector<Symbol>;

// Distributions must sum to one within this tolerance.
inline constexpr double kSumTolerance = 1e-9;
// Entries in [-kNegativeTolerance, 0) are clamped to zero.
inline constexpr double kNegativeTolerance = 1e-12;
// Largest pattern space that may be enumerated.
inline constexpr std::uint64_t kMaxPatterns = std::uint64_t{1} << 40;

class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols);

    static Alphabet binary();
    // Symbols labelled "0", "1", ..., "q-1".
    static Alphabet of_size(std::size_t q);

    std::size_t size() const { return symbols_.size(); }
    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::string& label(Symbol s) const { return symbols_.at(s); }
    // Index of a label; throws InvalidArgument when absent.
    Symbol index_of(std::string_view label) const;

    bool operator==(const Alphabet&) const = default;

private:
    std::vector<std::string> symbols_;
};

class Shape {
public:
    Shape(int dim, std::vector<Point> points);

    // F_k^d.
    static Shape cube(int dim, int side);
    // [k] * e_axis inside Z^dim.
    static Shape segment(int dim, int axis, int length);
    // The empty shape in dimension dim (one pattern, the empty one).
    static Shape empty(int dim);

    int dim() const { return dim_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<Point>& points() const { return points_; }

    bool contains(const Point& p) const;
    bool is_subset_of(const Shape& other) const;
    // Position of each of this shape's points within `other`; requires subset.
    std::vector<std::size_t> positions_in(const Shape& other) const;
    // Smallest k with every coordinate in [0, k); throws if any is negative.
    int cube_extent() const;
    Shape unite(const Shape& other) const;
    // Re-embeds a shape of dimension 1 along `axis` of Z^dim.
    Shape embed_along(int dim, int axis) const;

    bool operator==(const Shape&) const = default;

private:
    int dim_;
    std::vector<Point> points_;
};

// Number of patterns |alphabet|^|shape|; throws SizeGuardError above kMaxPatterns.
std::uint64_t pattern_count(std::size_t alphabet_size, std::size_t shape_size);
std::uint64_t encode_pattern(std::span<const Symbol> pattern, std::size_t alphabet_size);
Pattern decode_pattern(std::uint64_t index, std::size_t alphabet_size, std::size_t length);

// All patterns over the shape in index order.
std::vector<Pattern> enumerate_patterns(const Alphabet& alphabet, const Shape& shape);

// Number of cells n^d with overflow checking.
std::size_t cell_count(int dim, int side);
Point cell_point(std::size_t index, int dim, int side);
std::size_t cell_index(const Point& p, int side);

class Word {
public:
    Word(int dim, int side, std::vector<Symbol> cells);

    // 1-D word from a string of single-character symbol labels.
    static Word from_string(std::string_view text, const Alphabet& alphabet);
    // 2-D word from matrix rows; character j of row i is the cell (j, i).
    static Word from_rows(const std::vector<std::string>& rows, const Alphabet& alphabet);
    static Word constant(int dim, int side, Symbol s);

    int dim() const { return dim_; }
    int side() const { return side_; }
    std::size_t size() const { return cells_.size(); }
    const std::vector<Symbol>& cells() const { return cells_; }
    // Periodic extension: coordinates taken modulo side.
    Symbol at(const Point& p) const;
    Symbol operator[](std::size_t index) const { return cells_[index]; }

    bool operator==(const Word&) const = default;

private:
    int dim_;
    int side_;
    std::vector<Symbol> cells_;
};

class PatternDistribution {
public:
    // Validates and clamps tiny negative entries; throws InvalidArgument.
    PatternDistribution(Shape shape, Alphabet alphabet, std::vector<double> probs);

    static PatternDistribution uniform(Shape shape, Alphabet alphabet);
    static PatternDistribution point_mass(Shape shape, Alphabet alphabet, std::uint64_t index);

    const Shape& shape() const { return shape_; }
    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::uint64_t index) const { return probs_[index]; }
    double probability(std::span<const Symbol> pattern) const;

private:
    Shape shape_;
    Alphabet alphabet_;
    std::vector<double> probs_;
};

// Exact pattern frequencies: counts over a common denominator.
struct PatternCounts {
    Shape shape;
    Alphabet alphabet;
    std::vector<std::uint64_t> counts;
    std::uint64_t denominator = 0;

    PatternDistribution to_distribution() const;
};

// Independent measure on F_n^d: one distribution over the alphabet per cell.
class SiteProductMeasure {
public:
    SiteProductMeasure(int dim, int side, std::size_t alphabet_size,
                       std::vector<std::vector<double>> site_dists);

    static SiteProductMeasure iid(int dim, int side, std::vector<double> dist);

    int dim() const { return dim_; }
    int side() const { return side_; }
    std::size_t alphabet_size() const { return alphabet_size_; }
    std::size_t sites() const { return site_dists_.size(); }
    const std::vector<double>& site(std::size_t index) const { return site_dists_[index]; }
    const std::vector<std::vector<double>>& site_dists() const { return site_dists_; }

private:
    int dim_;
    int side_;
    std::size_t alphabet_size_;
    std::vector<std::vector<double>> site_dists_;
};

// Cell lists of the windows shape + v for every v in F_n^d, coordinates
// taken modulo n. Window v is at position cell_index(v); cells are listed in
// the shape's point order.
std::vector<std::vector<std::size_t>> cyclic_windows(const Shape& shape, int side);

PatternCounts empirical_counts(const Word& w, const Shape& shape, const Alphabet& alphabet);
PatternDistribution empirical_distribution(const Word& w, const Shape& shape,
                                           const Alphabet& alphabet);

PatternCounts marginal(const PatternCounts& counts, const Shape& sub);
PatternDistribution marginal(const PatternDistribution& mu, const Shape& sub);

double tv_distance(const PatternDistribution& mu, const PatternDistribution& nu);
double tv_distance(std::span<const double> mu, std::span<const double> nu);

// Average over translations of the shape's marginal of a product measure.
PatternDistribution averaged_marginal(const SiteProductMeasure& mu, const Shape& shape,
                                      const Alphabet& alphabet);
// Raw probability vector form of averaged_marginal.
std::vector<double> averaged_marginal_probs(const SiteProductMeasure& mu, const Shape& shape);

// Entropy in bits with 0 log 0 = 0.
double entropy_bits(std::span<const double> probs);
double entropy(const PatternDistribution& mu);
double binary_entropy(double x);
double product_entropy(const SiteProductMeasure& mu);
// product_entropy / n^d.
double entropy_rate(const SiteProductMeasure& mu);

} // namespace semicap
