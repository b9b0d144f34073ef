#include "khist/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace khist {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, long line_no) {
    const std::string t = trim(tok);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ParseError("not a number: '" + t + "'", line_no);
    }
    return v;
}

std::int64_t parse_int(const std::string& tok, long line_no) {
    const std::string t = trim(tok);
    std::int64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ParseError("not an integer: '" + t + "'", line_no);
    }
    return v;
}

std::vector<double> parse_fields(const std::string& line, long line_no) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok, line_no));
    if (!line.empty() && line.back() == ',') throw ParseError("trailing comma", line_no);
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

const char* kind_name(const Histogram& h) {
    switch (h.kind()) {
        case HistKind::Arbitrary: return "arbitrary";
        case HistKind::Hierarchical: return "hierarchical";
        case HistKind::Partial: return "partial";
    }
    return "?";
}

std::string join(std::span<const double> xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += format_number(xs[i]);
    }
    return s;
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string domain_header(const Domain& domain) { return "# " + domain.describe(); }

Domain parse_domain_header(const std::string& line, long line_no) {
    const auto w = words(line);
    if (w.size() < 3 || w[0] != "#" || w[1].rfind("dim=", 0) != 0 || w[2].rfind("domain=", 0) != 0) {
        throw ParseError("expected '# dim=<d> domain=<discrete m|unit>'", line_no);
    }
    const std::int64_t d = parse_int(w[1].substr(4), line_no);
    if (d < 1 || d > 64) throw ParseError("bad dimension", line_no);
    const std::string kind = w[2].substr(7);
    if (kind == "unit" && w.size() == 3) return Domain::unit(static_cast<int>(d));
    if (kind == "discrete" && w.size() == 4) {
        const std::int64_t m = parse_int(w[3], line_no);
        if (m < 1) throw ParseError("discrete domain needs m >= 1", line_no);
        return Domain::discrete(static_cast<int>(d), m);
    }
    throw ParseError("unknown domain '" + kind + "'", line_no);
}

Empirical read_samples(std::istream& in, std::optional<Domain> expected) {
    std::optional<Domain> domain;
    std::vector<Point> pts;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (!domain && pts.empty() && t.find("dim=") != std::string::npos) {
                domain = parse_domain_header(t, line_no);
                if (expected && !(*expected == *domain)) {
                    throw ParseError("header " + domain->describe() + " does not match " + expected->describe(),
                                     line_no);
                }
            }
            continue;
        }
        if (!domain) {
            if (!expected) throw ParseError("missing domain header", line_no);
            domain = expected;
        }
        Point p = parse_fields(t, line_no);
        if (static_cast<int>(p.size()) != domain->dim()) {
            throw ParseError("expected " + std::to_string(domain->dim()) + " fields, got " +
                                 std::to_string(p.size()),
                             line_no);
        }
        if (!domain->contains(p)) throw ParseError("coordinate outside " + domain->describe(), line_no);
        pts.push_back(std::move(p));
    }
    if (!domain) {
        if (!expected) throw ParseError("missing domain header", 0);
        domain = expected;
    }
    if (pts.empty()) throw ParseError("no samples", 0);
    return Empirical::from_samples(*domain, pts);
}

Empirical ingest_samples(const std::string& path, std::optional<Domain> expected) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path);
    try {
        return read_samples(in, expected);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

void write_samples(std::ostream& out, const Domain& domain, std::span<const Point> samples) {
    out << domain_header(domain) << "\n";
    for (const Point& p : samples) out << join(p) << "\n";
}

void write_hypothesis(std::ostream& out, const Histogram& h) {
    out << domain_header(h.domain()) << "\n";
    out << "# kind=" << kind_name(h) << " pieces=" << h.size() << "\n";
    if (h.grid()) {
        const Grid& g = *h.grid();
        for (int i = 0; i < g.dim(); ++i) out << "# axis " << i << " " << join(g.axis(i)) << "\n";
        for (const DyadicRect& r : h.leaves()) {
            out << "# leaf " << r.level;
            for (auto j : r.index) out << " " << j;
            out << "\n";
        }
    }
    for (const Piece& p : h.pieces()) {
        for (int i = 0; i < p.box.dim(); ++i) {
            out << format_number(p.box.lo[i]) << "," << format_number(p.box.hi[i]) << ",";
        }
        out << format_number(p.value) << "\n";
    }
}

Histogram read_hypothesis(std::istream& in) {
    std::optional<Domain> domain;
    std::string kind;
    long declared = -1;
    std::vector<std::vector<double>> axes;
    std::vector<DyadicRect> leaves;
    std::vector<Piece> pieces;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto w = words(t);
            if (w.size() >= 2 && w[1].rfind("dim=", 0) == 0) {
                if (domain) throw ParseError("duplicate domain header", line_no);
                domain = parse_domain_header(t, line_no);
            } else if (w.size() >= 2 && w[1].rfind("kind=", 0) == 0) {
                kind = w[1].substr(5);
                if (w.size() >= 3 && w[2].rfind("pieces=", 0) == 0) declared = parse_int(w[2].substr(7), line_no);
            } else if (w.size() == 4 && w[1] == "axis") {
                if (parse_int(w[2], line_no) != static_cast<std::int64_t>(axes.size())) {
                    throw ParseError("axes out of order", line_no);
                }
                axes.push_back(parse_fields(w[3], line_no));
            } else if (w.size() >= 3 && w[1] == "leaf") {
                DyadicRect r;
                r.level = static_cast<int>(parse_int(w[2], line_no));
                for (std::size_t i = 3; i < w.size(); ++i) r.index.push_back(parse_int(w[i], line_no));
                leaves.push_back(std::move(r));
            }
            continue;
        }
        if (!domain) throw ParseError("missing domain header", line_no);
        const auto f = parse_fields(t, line_no);
        const int d = domain->dim();
        if (static_cast<int>(f.size()) != 2 * d + 1) {
            throw ParseError("expected " + std::to_string(2 * d + 1) + " fields", line_no);
        }
        Piece p;
        for (int i = 0; i < d; ++i) {
            p.box.lo.push_back(f[2 * i]);
            p.box.hi.push_back(f[2 * i + 1]);
        }
        p.value = f[2 * d];
        pieces.push_back(std::move(p));
    }
    if (!domain) throw ParseError("missing domain header", 0);
    if (declared >= 0 && declared != static_cast<long>(pieces.size())) {
        throw ParseError("piece count does not match header", 0);
    }

    if (kind == "arbitrary" || kind == "partial") {
        if (axes.empty()) {
            return kind == "partial" ? Histogram::partial(*domain, std::move(pieces))
                                     : Histogram::arbitrary(*domain, std::move(pieces));
        }
    } else if (kind != "hierarchical") {
        throw ParseError("unknown kind '" + kind + "'", 0);
    }
    if (static_cast<int>(axes.size()) != domain->dim()) throw ParseError("grid axes missing", 0);
    if (leaves.size() != pieces.size()) throw ParseError("one leaf per piece expected", 0);
    Grid grid(*domain, std::move(axes));
    std::vector<double> values;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (!(grid.box(leaves[i]) == pieces[i].box)) throw ParseError("leaf and piece disagree", 0);
        values.push_back(pieces[i].value);
    }
    return kind == "partial" ? Histogram::partial_hierarchical(std::move(grid), std::move(leaves), std::move(values))
                             : Histogram::hierarchical(std::move(grid), std::move(leaves), std::move(values));
}

void save_hypothesis(const std::string& path, const Histogram& h) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path);
    write_hypothesis(out, h);
}

Histogram load_hypothesis(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path);
    try {
        return read_hypothesis(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

void write_dense_dump(std::ostream& out, const Histogram& h, int side) {
    const Domain& dom = h.domain();
    const int d = dom.dim();
    std::int64_t per_axis = 0;
    if (dom.is_discrete()) {
        per_axis = dom.m();
    } else {
        if (side < 1) throw ArgumentError("dump side must be >= 1");
        per_axis = side;
    }
    double total = 1.0;
    for (int i = 0; i < d; ++i) total *= static_cast<double>(per_axis);
    if (total > 1e7) throw ArgumentError("dense dump would exceed 10^7 lines");

    std::vector<std::int64_t> idx(d, 0);
    Point x(d);
    out << domain_header(dom) << "\n";
    while (true) {
        for (int i = 0; i < d; ++i) {
            x[i] = dom.is_discrete() ? static_cast<double>(idx[i] + 1)
                                     : (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(per_axis);
        }
        out << join(x) << "," << format_number(eval(h, x)) << "\n";
        int a = d - 1;
        while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
        if (a < 0) break;
    }
}

}  // namespace khist
