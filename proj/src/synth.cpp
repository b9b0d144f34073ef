#include "khist/synth.hpp"

#include <algorithm>
#include <cmath>

namespace khist {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    while (true) {
        const std::uint64_t x = rng();
        if (x <= limit) return x % n;
    }
}

namespace {

// Cut positions strictly inside [lo, hi), in lattice units.
std::int64_t cut_slots(const Domain& dom, double lo, double hi) {
    if (dom.is_discrete()) return static_cast<std::int64_t>(hi - lo) - 1;
    return static_cast<std::int64_t>(std::llround(hi * 1024) - std::llround(lo * 1024)) - 1;
}


}  // namespace

Histogram gen_truth(int k, const Domain& domain, std::uint64_t seed) {
    if (k < 1) throw ArgumentError("k must be >= 1");
    Rng rng(seed);
    std::vector<Box> boxes{Box::whole(domain)};
    const int d = domain.dim();
    while (static_cast<int>(boxes.size()) < k) {
        std::vector<std::size_t> splittable;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            for (int a = 0; a < d; ++a) {
                if (cut_slots(domain, boxes[i].lo[a], boxes[i].hi[a]) > 0) {
                    splittable.push_back(i);
                    break;
                }
            }
        }
        if (splittable.empty()) throw ArgumentError("cannot build " + std::to_string(k) + " pieces on this domain");
        const std::size_t pick = splittable[uniform_below(rng, splittable.size())];
        std::vector<int> axes;
        for (int a = 0; a < d; ++a) {
            if (cut_slots(domain, boxes[pick].lo[a], boxes[pick].hi[a]) > 0) axes.push_back(a);
        }
        const int axis = axes[uniform_below(rng, axes.size())];
        Box& b = boxes[pick];
        const auto slot = static_cast<std::int64_t>(uniform_below(rng, cut_slots(domain, b.lo[axis], b.hi[axis]))) + 1;
        const double cut = domain.is_discrete() ? b.lo[axis] + static_cast<double>(slot)
                                                : static_cast<double>(std::llround(b.lo[axis] * 1024) + slot) / 1024.0;
        Box right = b;
        b.hi[axis] = cut;
        right.lo[axis] = cut;
        boxes.push_back(std::move(right));
    }

    std::vector<double> w(boxes.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        w[i] = 0.1 + 0.9 * uniform01(rng);
        mass += w[i] * volume(boxes[i], domain);
    }
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < boxes.size(); ++i) pieces.push_back(Piece{boxes[i], w[i] / mass});
    std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.box.lo < y.box.lo; });
    return Histogram::arbitrary(domain, std::move(pieces));
}

std::vector<Point> sample_points(const Histogram& h, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw ArgumentError("sample count must be >= 1");
    const double total = total_mass(h);
    if (std::abs(total - 1.0) > 1e-9) throw DegenerateError("cannot sample from an unnormalized histogram");
    const Domain& dom = h.domain();
    const auto pieces = h.pieces();
    std::vector<double> cdf;
    double acc = 0.0;
    for (const Piece& p : pieces) {
        acc += p.value * volume(p.box, dom);
        cdf.push_back(acc);
    }

    Rng rng(seed);
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n));
    const int d = dom.dim();
    for (std::int64_t s = 0; s < n; ++s) {
        const double u = uniform01(rng) * acc;
        std::size_t i = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (i == cdf.size()) i = cdf.size() - 1;
        const Box& b = pieces[i].box;
        Point x(d);
        for (int a = 0; a < d; ++a) {
            if (dom.is_discrete()) {
                const double first = std::ceil(b.lo[a]);
                const auto count = static_cast<std::uint64_t>(std::ceil(b.hi[a]) - first);
                x[a] = first + static_cast<double>(uniform_below(rng, count));
            } else {
                x[a] = b.lo[a] + uniform01(rng) * (b.hi[a] - b.lo[a]);
                if (x[a] >= b.hi[a]) x[a] = std::nextafter(b.hi[a], b.lo[a]);
            }
        }
        out.push_back(std::move(x));
    }
    return out;
}

Empirical sample_from(const Histogram& h, std::int64_t n, std::uint64_t seed) {
    return Empirical::from_samples(h.domain(), sample_points(h, n, seed));
}

}  // namespace khist
