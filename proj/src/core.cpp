#include "khist/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace khist {

namespace {

constexpr double kMassTol = 1e-9;

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

void require_same_domain(const Domain& a, const Domain& b, const char* what) {
    if (!(a == b)) {
        throw ConfigError(std::string(what) + ": domains differ (" + a.describe() + " vs " +
                          b.describe() + ")");
    }
}

void require_discrete(const Domain& d, const char* what) {
    if (!d.is_discrete()) {
        throw UnsupportedDomainError(std::string(what) + " requires a discrete domain");
    }
}

// Visits every cell of the product of per-axis ranges [from[i], to[i]).
template <class F>
void for_each_cell(const std::vector<std::int64_t>& from, const std::vector<std::int64_t>& to,
                   F&& f) {
    const std::size_t d = from.size();
    for (std::size_t i = 0; i < d; ++i) {
        if (from[i] >= to[i]) return;
    }
    std::vector<std::int64_t> cur = from;
    while (true) {
        f(std::as_const(cur));
        std::size_t i = d;
        while (i > 0) {
            --i;
            if (++cur[i] < to[i]) break;
            cur[i] = from[i];
            if (i == 0) return;
        }
        if (d == 0) return;
    }
}

// Coordinate-compressed overlay of two piece sets. Calls f(va, vb, vol) for
// every overlay cell of positive volume.
template <class F>
void overlay(const Histogram& a, const Histogram& b, F&& f) {
    const Domain& dom = a.domain();
    const int d = dom.dim();
    std::vector<std::vector<double>> bp(d);
    for (int i = 0; i < d; ++i) {
        bp[i].push_back(dom.lower());
        bp[i].push_back(dom.upper());
        for (const Histogram* h : {&a, &b}) {
            for (const Piece& p : h->pieces()) {
                bp[i].push_back(p.box.lo[i]);
                bp[i].push_back(p.box.hi[i]);
            }
        }
        std::sort(bp[i].begin(), bp[i].end());
        bp[i].erase(std::unique(bp[i].begin(), bp[i].end()), bp[i].end());
    }
    std::vector<std::int64_t> extent(d);
    std::int64_t cells = 1;
    for (int i = 0; i < d; ++i) {
        extent[i] = static_cast<std::int64_t>(bp[i].size()) - 1;
        cells *= extent[i];
        if (cells > 400'000'000) throw ArgumentError("overlay too large");
    }
    auto flat = [&](const std::vector<std::int64_t>& c) {
        std::int64_t idx = 0;
        for (int i = 0; i < d; ++i) idx = idx * extent[i] + c[i];
        return idx;
    };
    auto paint = [&](const Histogram& h, std::vector<double>& out) {
        std::vector<std::int64_t> from(d), to(d);
        for (const Piece& p : h.pieces()) {
            for (int i = 0; i < d; ++i) {
                from[i] = std::lower_bound(bp[i].begin(), bp[i].end(), p.box.lo[i]) - bp[i].begin();
                to[i] = std::lower_bound(bp[i].begin(), bp[i].end(), p.box.hi[i]) - bp[i].begin();
            }
            for_each_cell(from, to, [&](const std::vector<std::int64_t>& c) { out[flat(c)] = p.value; });
        }
    };
    std::vector<double> va(cells, 0.0), vb(cells, 0.0);
    paint(a, va);
    paint(b, vb);

    std::vector<std::vector<double>> len(d);
    for (int i = 0; i < d; ++i) {
        for (std::int64_t j = 0; j < extent[i]; ++j) len[i].push_back(dom.length(bp[i][j], bp[i][j + 1]));
    }
    std::vector<std::int64_t> zero(d, 0);
    for_each_cell(zero, extent, [&](const std::vector<std::int64_t>& c) {
        double vol = 1.0;
        for (int i = 0; i < d; ++i) vol *= len[i][c[i]];
        if (vol > 0.0) {
            const std::int64_t idx = flat(c);
            f(va[idx], vb[idx], vol);
        }
    });
}

std::int64_t flat_cell(const std::vector<std::int64_t>& cell, std::int64_t side) {
    std::int64_t idx = 0;
    for (std::int64_t c : cell) idx = idx * side + c;
    return idx;
}

void validate_values(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw ArgumentError("histogram values must be finite and >= 0");
    }
}

}  // namespace

// ---------------------------------------------------------------- Domain

Domain Domain::discrete(int dim, std::int64_t m) {
    if (dim < 1) throw ArgumentError("dimension must be >= 1");
    if (m < 1) throw ArgumentError("discrete domain requires m >= 1");
    return Domain(DomainKind::DiscreteCube, dim, m);
}

Domain Domain::unit(int dim) {
    if (dim < 1) throw ArgumentError("dimension must be >= 1");
    return Domain(DomainKind::UnitCube, dim, 0);
}

bool Domain::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) return false;
    for (double v : x) {
        if (!std::isfinite(v)) return false;
        if (is_discrete()) {
            if (!is_integer(v) || v < 1.0 || v > static_cast<double>(m_)) return false;
        } else if (v < 0.0 || v > 1.0) {
            return false;
        }
    }
    return true;
}

double Domain::length(double lo, double hi) const {
    lo = std::max(lo, lower());
    hi = std::min(hi, upper());
    if (is_discrete()) return std::max(0.0, std::ceil(hi) - std::ceil(lo));
    return std::max(0.0, hi - lo);
}

double Domain::measure() const {
    return is_discrete() ? std::pow(static_cast<double>(m_), dim_) : 1.0;
}

std::string Domain::describe() const {
    std::ostringstream os;
    os << "dim=" << dim_ << " domain=";
    if (is_discrete()) {
        os << "discrete " << m_;
    } else {
        os << "unit";
    }
    return os.str();
}

// ---------------------------------------------------------------- Box

Box Box::whole(const Domain& domain) {
    return Box{std::vector<double>(domain.dim(), domain.lower()),
               std::vector<double>(domain.dim(), domain.upper())};
}

bool box_inside(const Box& box, const Domain& domain) {
    if (box.dim() != domain.dim() || box.hi.size() != box.lo.size()) return false;
    for (int i = 0; i < box.dim(); ++i) {
        if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i])) return false;
        if (box.lo[i] > box.hi[i]) return false;
        if (box.lo[i] < domain.lower() || box.hi[i] > domain.upper()) return false;
    }
    return true;
}

bool box_contains(const Box& box, std::span<const double> x, const Domain& domain) {
    for (int i = 0; i < box.dim(); ++i) {
        const double v = x[i];
        if (v >= box.lo[i] && v < box.hi[i]) continue;
        if (!domain.is_discrete() && v == box.hi[i] && box.hi[i] == domain.upper() &&
            box.lo[i] < box.hi[i]) {
            continue;
        }
        return false;
    }
    return true;
}

double overlap_volume(const Box& a, const Box& b, const Domain& domain) {
    double vol = 1.0;
    for (int i = 0; i < a.dim(); ++i) {
        const double lo = std::max(a.lo[i], b.lo[i]);
        const double hi = std::min(a.hi[i], b.hi[i]);
        if (hi <= lo) return 0.0;
        vol *= domain.length(lo, hi);
    }
    return vol;
}

double volume(const Box& box, const Domain& domain) {
    if (!box_inside(box, domain)) throw DomainError("region lies outside the domain");
    double vol = 1.0;
    for (int i = 0; i < box.dim(); ++i) vol *= domain.length(box.lo[i], box.hi[i]);
    return vol;
}

// ---------------------------------------------------------------- DyadicRect

bool DyadicRect::contains(const DyadicRect& other) const {
    if (other.level > level || other.dim() != dim()) return false;
    const int shift = level - other.level;
    for (int i = 0; i < dim(); ++i) {
        if ((other.index[i] >> shift) != index[i]) return false;
    }
    return true;
}

bool DyadicRect::disjoint(const DyadicRect& other) const {
    return !contains(other) && !other.contains(*this);
}

DyadicRect DyadicRect::parent() const {
    DyadicRect p{level + 1, index};
    for (auto& j : p.index) j >>= 1;
    return p;
}

DyadicRect DyadicRect::child(unsigned c) const {
    DyadicRect ch{level - 1, index};
    for (int i = 0; i < dim(); ++i) ch.index[i] = 2 * index[i] + ((c >> i) & 1u);
    return ch;
}

std::vector<DyadicRect> DyadicRect::children() const {
    std::vector<DyadicRect> out;
    if (level == 0) return out;
    const unsigned count = 1u << dim();
    out.reserve(count);
    for (unsigned c = 0; c < count; ++c) out.push_back(child(c));
    return out;
}

std::string DyadicRect::to_string() const {
    std::ostringstream os;
    os << "L" << level << "[";
    for (int i = 0; i < dim(); ++i) os << (i ? "," : "") << index[i];
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------- Grid

Grid::Grid(Domain domain, std::vector<std::vector<double>> axes)
    : domain_(domain), axes_(std::move(axes)) {
    if (static_cast<int>(axes_.size()) != domain_.dim()) {
        throw StructureError("grid needs one boundary list per axis");
    }
    const std::size_t len = axes_[0].size();
    if (len < 2) throw StructureError("grid axis needs at least two boundaries");
    const auto cells = static_cast<std::uint64_t>(len - 1);
    if (!std::has_single_bit(cells)) throw StructureError("grid side must be a power of 2");
    side_ = static_cast<std::int64_t>(cells);
    depth_ = std::countr_zero(cells);
    for (const auto& ax : axes_) {
        if (ax.size() != len) throw StructureError("grid axes must share the same side length");
        if (!std::is_sorted(ax.begin(), ax.end())) throw StructureError("grid axis not sorted");
        if (ax.front() != domain_.lower() || ax.back() != domain_.upper()) {
            throw StructureError("grid axis must start and end at the domain bounds");
        }
        if (domain_.is_discrete()) {
            for (double b : ax) {
                if (!is_integer(b)) throw StructureError("discrete grid boundaries must be integers");
            }
        }
    }
}

Grid Grid::uniform(const Domain& domain, std::int64_t side) {
    if (side < 1 || !std::has_single_bit(static_cast<std::uint64_t>(side))) {
        throw ArgumentError("grid side must be a power of 2");
    }
    std::vector<double> ax(side + 1);
    if (domain.is_discrete()) {
        if (domain.m() % side != 0) throw ArgumentError("grid side must divide m");
        const std::int64_t step = domain.m() / side;
        for (std::int64_t j = 0; j <= side; ++j) ax[j] = static_cast<double>(1 + j * step);
    } else {
        for (std::int64_t j = 0; j <= side; ++j) ax[j] = static_cast<double>(j) / static_cast<double>(side);
    }
    return Grid(domain, std::vector<std::vector<double>>(domain.dim(), ax));
}

DyadicRect Grid::root() const { return DyadicRect{depth_, std::vector<std::int64_t>(dim(), 0)}; }

bool Grid::is_valid(const DyadicRect& rect) const {
    if (rect.dim() != dim() || rect.level < 0 || rect.level > depth_) return false;
    const std::int64_t count = side_ >> rect.level;
    for (std::int64_t j : rect.index) {
        if (j < 0 || j >= count) return false;
    }
    return true;
}

void Grid::require_valid(const DyadicRect& rect) const {
    if (!is_valid(rect)) throw StructureError("rectangle " + rect.to_string() + " is not dyadic for the grid");
}

Box Grid::box(const DyadicRect& rect) const {
    require_valid(rect);
    Box b;
    for (int i = 0; i < dim(); ++i) {
        b.lo.push_back(axes_[i][rect.rank_lo(i)]);
        b.hi.push_back(axes_[i][rect.rank_hi(i)]);
    }
    return b;
}

double Grid::volume(const DyadicRect& rect) const {
    require_valid(rect);
    double vol = 1.0;
    for (int i = 0; i < dim(); ++i) {
        vol *= domain_.length(axes_[i][rect.rank_lo(i)], axes_[i][rect.rank_hi(i)]);
    }
    return vol;
}

std::int64_t Grid::rects_under(const DyadicRect& rect) const {
    constexpr std::int64_t kCap = std::int64_t{1} << 62;
    std::int64_t total = 0;
    std::int64_t per_level = 1;
    for (int l = rect.level; l >= 0; --l) {
        total += per_level;
        if (total >= kCap) return kCap;
        if (l > 0) {
            if (per_level > (kCap >> dim())) return kCap;
            per_level <<= dim();
        }
    }
    return total;
}

std::int64_t Grid::cell_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < dim(); ++i) c *= side_;
    return c;
}

std::int64_t Grid::cell_index(int axis, double x) const {
    const auto& b = axes_[axis];
    if (!(x >= b.front() && x <= b.back())) throw DomainError("coordinate outside the grid");
    auto idx = static_cast<std::int64_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) - 1;
    if (idx >= side_) {
        // Top face of the unit cube: owned by the last cell of positive width.
        idx = static_cast<std::int64_t>(std::lower_bound(b.begin(), b.end(), x) - b.begin()) - 1;
    }
    return std::clamp<std::int64_t>(idx, 0, side_ - 1);
}

std::vector<std::int64_t> Grid::cell_of(std::span<const double> x) const {
    std::vector<std::int64_t> c(dim());
    for (int i = 0; i < dim(); ++i) c[i] = cell_index(i, x[i]);
    return c;
}

Box Grid::cell_box(std::span<const std::int64_t> cell) const {
    Box b;
    for (int i = 0; i < dim(); ++i) {
        b.lo.push_back(axes_[i][cell[i]]);
        b.hi.push_back(axes_[i][cell[i] + 1]);
    }
    return b;
}

// ---------------------------------------------------------------- Histogram

namespace {

void check_boxes(const Domain& domain, const std::vector<Piece>& pieces, bool covering) {
    for (const Piece& p : pieces) {
        if (!box_inside(p.box, domain)) throw DomainError("histogram piece lies outside the domain");
        if (!std::isfinite(p.value) || p.value < 0.0) {
            throw ArgumentError("histogram values must be finite and >= 0");
        }
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        for (std::size_t j = i + 1; j < pieces.size(); ++j) {
            if (overlap_volume(pieces[i].box, pieces[j].box, domain) > 0.0) {
                throw StructureError("histogram pieces overlap");
            }
        }
    }
    if (covering) {
        double total = 0.0;
        for (const Piece& p : pieces) total += volume(p.box, domain);
        if (std::abs(total - domain.measure()) > kMassTol * domain.measure()) {
            throw StructureError("histogram pieces do not cover the domain");
        }
    }
}

void check_leaves(const Grid& grid, const std::vector<DyadicRect>& leaves, bool covering) {
    for (const DyadicRect& r : leaves) grid.require_valid(r);
    // Dyadic rectangles are laminar: disjoint iff neither contains the other.
    std::vector<DyadicRect> sorted = leaves;
    std::sort(sorted.begin(), sorted.end(),
              [](const DyadicRect& a, const DyadicRect& b) { return a.level > b.level; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (sorted[i].contains(sorted[j])) throw StructureError("hierarchical leaves overlap");
        }
    }
    if (covering) {
        long double cells = 0;
        for (const DyadicRect& r : leaves) cells += std::ldexp(1.0L, grid.dim() * r.level);
        if (cells != static_cast<long double>(grid.cell_count())) {
            throw StructureError("hierarchical leaves do not partition the grid");
        }
    }
}

}  // namespace

Histogram Histogram::arbitrary(Domain domain, std::vector<Piece> pieces) {
    check_boxes(domain, pieces, true);
    Histogram h;
    h.domain_ = domain;
    h.kind_ = HistKind::Arbitrary;
    h.pieces_ = std::move(pieces);
    return h;
}

Histogram Histogram::partial(Domain domain, std::vector<Piece> pieces) {
    check_boxes(domain, pieces, false);
    Histogram h;
    h.domain_ = domain;
    h.kind_ = HistKind::Partial;
    h.pieces_ = std::move(pieces);
    return h;
}

Histogram Histogram::hierarchical(Grid grid, std::vector<DyadicRect> leaves, std::vector<double> values) {
    check_leaves(grid, leaves, true);
    validate_values(values);
    if (values.size() != leaves.size()) throw ArgumentError("one value per leaf required");
    Histogram h;
    h.domain_ = grid.domain();
    h.kind_ = HistKind::Hierarchical;
    for (std::size_t i = 0; i < leaves.size(); ++i) h.pieces_.push_back(Piece{grid.box(leaves[i]), values[i]});
    h.leaves_ = std::move(leaves);
    h.grid_ = std::move(grid);
    return h;
}

Histogram Histogram::partial_hierarchical(Grid grid, std::vector<DyadicRect> leaves,
                                          std::vector<double> values) {
    check_leaves(grid, leaves, false);
    validate_values(values);
    if (values.size() != leaves.size()) throw ArgumentError("one value per leaf required");
    Histogram h;
    h.domain_ = grid.domain();
    h.kind_ = HistKind::Partial;
    for (std::size_t i = 0; i < leaves.size(); ++i) h.pieces_.push_back(Piece{grid.box(leaves[i]), values[i]});
    h.leaves_ = std::move(leaves);
    h.grid_ = std::move(grid);
    return h;
}

Histogram Histogram::scaled(double factor) const {
    if (!std::isfinite(factor) || factor < 0.0) throw ArgumentError("scale factor must be finite and >= 0");
    Histogram h = *this;
    for (Piece& p : h.pieces_) p.value *= factor;
    return h;
}

// ---------------------------------------------------------------- Empirical

Empirical::Empirical(Domain domain, std::vector<Point> points, std::vector<std::int64_t> counts)
    : domain_(domain) {
    if (points.size() != counts.size()) throw ArgumentError("one count per point required");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!domain.contains(points[i])) throw DomainError("sample point outside the domain");
        if (counts[i] <= 0) throw ArgumentError("sample counts must be positive");
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    for (std::size_t i : order) {
        if (!points_.empty() && points_.back() == points[i]) {
            counts_.back() += counts[i];
        } else {
            points_.push_back(std::move(points[i]));
            counts_.push_back(counts[i]);
        }
        n_ += counts[i];
    }
    if (n_ < 1) throw ArgumentError("empirical distribution needs at least one sample");
}

Empirical Empirical::from_samples(Domain domain, std::span<const Point> samples) {
    return Empirical(domain, std::vector<Point>(samples.begin(), samples.end()),
                     std::vector<std::int64_t>(samples.size(), 1));
}

// ---------------------------------------------------------------- measures

double mass(const Empirical& g, const Box& box) {
    if (!box_inside(box, g.domain())) throw DomainError("region lies outside the domain");
    std::int64_t owned = 0;
    for (std::size_t i = 0; i < g.support_size(); ++i) {
        if (box_contains(box, g.points()[i], g.domain())) owned += g.counts()[i];
    }
    return static_cast<double>(owned) / static_cast<double>(g.n());
}

double mass(const Histogram& h, const Box& box) {
    if (!box_inside(box, h.domain())) throw DomainError("region lies outside the domain");
    double total = 0.0;
    for (const Piece& p : h.pieces()) total += p.value * overlap_volume(p.box, box, h.domain());
    return total;
}

double total_mass(const Histogram& h) {
    double total = 0.0;
    for (const Piece& p : h.pieces()) total += p.value * volume(p.box, h.domain());
    return total;
}

double flatten(const Empirical& g, const Box& box) {
    const double vol = volume(box, g.domain());
    if (!(vol > 0.0)) throw DegenerateError("cannot flatten over a zero-volume region");
    return mass(g, box) / vol;
}

double flatten(const Histogram& h, const Box& box) {
    const double vol = volume(box, h.domain());
    if (!(vol > 0.0)) throw DegenerateError("cannot flatten over a zero-volume region");
    return mass(h, box) / vol;
}

double eval(const Histogram& h, std::span<const double> x) {
    if (!h.domain().contains(x)) throw DomainError("evaluation point outside the domain");
    for (const Piece& p : h.pieces()) {
        if (box_contains(p.box, x, h.domain())) return p.value;
    }
    return 0.0;
}

double l1_dist(const Histogram& a, const Histogram& b) {
    require_same_domain(a.domain(), b.domain(), "l1_dist");
    double total = 0.0;
    overlay(a, b, [&](double va, double vb, double vol) { total += std::abs(va - vb) * vol; });
    return total;
}

double l2_sq_dist(const Histogram& a, const Histogram& b) {
    require_same_domain(a.domain(), b.domain(), "l2_sq_dist");
    require_discrete(a.domain(), "l2_sq_dist");
    double total = 0.0;
    overlay(a, b, [&](double va, double vb, double vol) { total += (va - vb) * (va - vb) * vol; });
    return total;
}

double l2_sq_dist(const Empirical& a, const Histogram& b) {
    require_same_domain(a.domain(), b.domain(), "l2_sq_dist");
    require_discrete(a.domain(), "l2_sq_dist");
    // sum_x h(x)^2 over all lattice points, corrected at the support.
    double total = 0.0;
    for (const Piece& p : b.pieces()) total += p.value * p.value * volume(p.box, b.domain());
    for (std::size_t i = 0; i < a.support_size(); ++i) {
        const double hv = eval(b, a.points()[i]);
        const double gv = a.mass_of(i);
        total += (gv - hv) * (gv - hv) - hv * hv;
    }
    return std::max(0.0, total);
}

double l2_sq_dist(const Histogram& a, const Empirical& b) { return l2_sq_dist(b, a); }

double l2_sq_dist(const Empirical& a, const Empirical& b) {
    require_same_domain(a.domain(), b.domain(), "l2_sq_dist");
    require_discrete(a.domain(), "l2_sq_dist");
    double total = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.support_size() || j < b.support_size()) {
        if (j == b.support_size() || (i < a.support_size() && a.points()[i] < b.points()[j])) {
            total += a.mass_of(i) * a.mass_of(i);
            ++i;
        } else if (i == a.support_size() || b.points()[j] < a.points()[i]) {
            total += b.mass_of(j) * b.mass_of(j);
            ++j;
        } else {
            const double diff = a.mass_of(i) - b.mass_of(j);
            total += diff * diff;
            ++i;
            ++j;
        }
    }
    return total;
}

std::vector<double> cell_masses(const Grid& grid, const Empirical& g) {
    require_same_domain(grid.domain(), g.domain(), "cell_masses");
    std::vector<double> out(grid.cell_count(), 0.0);
    for (std::size_t i = 0; i < g.support_size(); ++i) {
        out[flat_cell(grid.cell_of(g.points()[i]), grid.side())] += g.mass_of(i);
    }
    return out;
}

std::vector<double> cell_masses(const Grid& grid, const Histogram& h) {
    require_same_domain(grid.domain(), h.domain(), "cell_masses");
    const int d = grid.dim();
    std::vector<double> out(grid.cell_count(), 0.0);
    std::vector<std::int64_t> from(d), to(d);
    for (const Piece& p : h.pieces()) {
        if (p.value == 0.0) continue;
        for (int i = 0; i < d; ++i) {
            const auto ax = grid.axis(i);
            from[i] = std::max<std::int64_t>(
                0, std::upper_bound(ax.begin(), ax.end(), p.box.lo[i]) - ax.begin() - 1);
            to[i] = std::min<std::int64_t>(
                grid.side(), std::lower_bound(ax.begin(), ax.end(), p.box.hi[i]) - ax.begin());
        }
        for_each_cell(from, to, [&](const std::vector<std::int64_t>& c) {
            double vol = 1.0;
            for (int i = 0; i < d; ++i) {
                const auto ax = grid.axis(i);
                vol *= grid.domain().length(std::max(p.box.lo[i], ax[c[i]]),
                                            std::min(p.box.hi[i], ax[c[i] + 1]));
            }
            out[flat_cell(c, grid.side())] += p.value * vol;
        });
    }
    return out;
}

}  // namespace khist
