#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khist/error.hpp"

namespace khist {

using Point = std::vector<double>;

enum class DomainKind { DiscreteCube, UnitCube };

// [m]^d (integer coordinates 1..m) or [0,1]^d.
//
// Along one axis the discrete domain is embedded in the half-open range
// [1, m+1): a coordinate interval [lo, hi) holds the lattice points
// ceil(lo) .. ceil(hi)-1, so integer boundaries give length hi - lo.
class Domain {
public:
    static Domain discrete(int dim, std::int64_t m);
    static Domain unit(int dim);

    DomainKind kind() const { return kind_; }
    bool is_discrete() const { return kind_ == DomainKind::DiscreteCube; }
    int dim() const { return dim_; }
    std::int64_t m() const { return m_; }

    double lower() const { return is_discrete() ? 1.0 : 0.0; }
    double upper() const { return is_discrete() ? static_cast<double>(m_) + 1.0 : 1.0; }

    bool contains(std::span<const double> x) const;
    // Measure of [lo, hi) along one axis.
    double length(double lo, double hi) const;
    double measure() const;
    std::string describe() const;

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    Domain(DomainKind kind, int dim, std::int64_t m) : kind_(kind), dim_(dim), m_(m) {}

    DomainKind kind_;
    int dim_;
    std::int64_t m_;
};

// Axis-aligned region, half-open per axis. In the unit cube the face x_i = 1
// belongs to boxes whose upper bound is 1.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    static Box whole(const Domain& domain);

    friend bool operator==(const Box&, const Box&) = default;
};

bool box_inside(const Box& box, const Domain& domain);
bool box_contains(const Box& box, std::span<const double> x, const Domain& domain);
double overlap_volume(const Box& a, const Box& b, const Domain& domain);

// A rectangle of a grid's dyadic decomposition. At level l it covers the rank
// range [2^l j_i, 2^l (j_i + 1)) on axis i. Ordered by (level, index lex).
struct DyadicRect {
    int level = 0;
    std::vector<std::int64_t> index;

    int dim() const { return static_cast<int>(index.size()); }
    std::int64_t rank_lo(int axis) const { return index[axis] << level; }
    std::int64_t rank_hi(int axis) const { return (index[axis] + 1) << level; }

    // other is a (non-strict) descendant of this.
    bool contains(const DyadicRect& other) const;
    bool disjoint(const DyadicRect& other) const;
    DyadicRect parent() const;
    // Child c has index 2 j_i + bit i of c on axis i.
    DyadicRect child(unsigned c) const;
    std::vector<DyadicRect> children() const;
    std::string to_string() const;

    friend auto operator<=>(const DyadicRect&, const DyadicRect&) = default;
};

class Grid {
public:
    // axes[i] holds the M+1 cell boundaries on axis i.
    Grid(Domain domain, std::vector<std::vector<double>> axes);
    // Evenly spaced boundaries; for a discrete domain side must divide m.
    static Grid uniform(const Domain& domain, std::int64_t side);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    std::int64_t side() const { return side_; }
    int depth() const { return depth_; }
    std::span<const double> axis(int i) const { return axes_[i]; }

    DyadicRect root() const;
    bool is_valid(const DyadicRect& rect) const;
    void require_valid(const DyadicRect& rect) const;
    Box box(const DyadicRect& rect) const;
    double volume(const DyadicRect& rect) const;
    // Number of dyadic rectangles contained in rect, itself included.
    std::int64_t rects_under(const DyadicRect& rect) const;
    std::int64_t cell_count() const;

    // Rank-space owner of coordinate x on an axis.
    std::int64_t cell_index(int axis, double x) const;
    std::vector<std::int64_t> cell_of(std::span<const double> x) const;
    Box cell_box(std::span<const std::int64_t> cell) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Domain domain_;
    std::vector<std::vector<double>> axes_;
    std::int64_t side_ = 1;
    int depth_ = 0;
};

enum class HistKind { Arbitrary, Hierarchical, Partial };

struct Piece {
    Box box;
    double value = 0.0;
};

// Piecewise-constant nonnegative density on disjoint boxes. Hierarchical and
// partial-hierarchical histograms also carry their grid and the dyadic leaf
// behind every piece.
class Histogram {
public:
    static Histogram arbitrary(Domain domain, std::vector<Piece> pieces);
    static Histogram partial(Domain domain, std::vector<Piece> pieces);
    static Histogram hierarchical(Grid grid, std::vector<DyadicRect> leaves,
                                  std::vector<double> values);
    static Histogram partial_hierarchical(Grid grid, std::vector<DyadicRect> leaves,
                                          std::vector<double> values);

    const Domain& domain() const { return domain_; }
    HistKind kind() const { return kind_; }
    bool is_partial() const { return kind_ == HistKind::Partial; }
    std::span<const Piece> pieces() const { return pieces_; }
    std::size_t size() const { return pieces_.size(); }
    const std::optional<Grid>& grid() const { return grid_; }
    std::span<const DyadicRect> leaves() const { return leaves_; }

    Histogram scaled(double factor) const;

private:
    Histogram() : domain_(Domain::unit(1)) {}

    Domain domain_;
    HistKind kind_ = HistKind::Arbitrary;
    std::vector<Piece> pieces_;
    std::optional<Grid> grid_;
    std::vector<DyadicRect> leaves_;
};

// Weighted multiset of sample points; point i has mass counts[i] / n.
class Empirical {
public:
    Empirical(Domain domain, std::vector<Point> points, std::vector<std::int64_t> counts);
    static Empirical from_samples(Domain domain, std::span<const Point> samples);

    const Domain& domain() const { return domain_; }
    std::int64_t n() const { return n_; }
    std::size_t support_size() const { return points_.size(); }
    std::span<const Point> points() const { return points_; }
    std::span<const std::int64_t> counts() const { return counts_; }
    double mass_of(std::size_t i) const {
        return static_cast<double>(counts_[i]) / static_cast<double>(n_);
    }

private:
    Domain domain_;
    std::vector<Point> points_;
    std::vector<std::int64_t> counts_;
    std::int64_t n_ = 0;
};

double volume(const Box& box, const Domain& domain);

double mass(const Empirical& g, const Box& box);
double mass(const Histogram& h, const Box& box);
double total_mass(const Histogram& h);

double flatten(const Empirical& g, const Box& box);
double flatten(const Histogram& h, const Box& box);

double eval(const Histogram& h, std::span<const double> x);

double l1_dist(const Histogram& a, const Histogram& b);

// Squared l2 distance on a discrete domain; empiricals count as point masses.
double l2_sq_dist(const Histogram& a, const Histogram& b);
double l2_sq_dist(const Empirical& a, const Histogram& b);
double l2_sq_dist(const Histogram& a, const Empirical& b);
double l2_sq_dist(const Empirical& a, const Empirical& b);

// Mass per grid cell, cells flattened with axis 0 most significant.
std::vector<double> cell_masses(const Grid& grid, const Empirical& g);
std::vector<double> cell_masses(const Grid& grid, const Histogram& h);

}  // namespace khist
