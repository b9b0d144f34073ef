#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "khist/core.hpp"

namespace khist {

// %.12g, the precision of every number we write.
std::string format_number(double v);

// "# dim=<d> domain=discrete <m>" or "# dim=<d> domain=unit".
std::string domain_header(const Domain& domain);
Domain parse_domain_header(const std::string& line, long line_no);

// One comma-separated sample per line after the domain header. When the
// header is missing the expected domain is used; when both are present they
// must agree.
Empirical read_samples(std::istream& in, std::optional<Domain> expected = {});
Empirical ingest_samples(const std::string& path, std::optional<Domain> expected = {});
void write_samples(std::ostream& out, const Domain& domain, std::span<const Point> samples);

// Piece-per-line text: "lo1,hi1,...,lod,hid,value". Grid histograms also
// carry their axes and leaves in "#" lines.
void write_hypothesis(std::ostream& out, const Histogram& h);
Histogram read_hypothesis(std::istream& in);
void save_hypothesis(const std::string& path, const Histogram& h);
Histogram load_hypothesis(const std::string& path);

// Values at cell centres of a side^d lattice (unit) or at every lattice
// point (discrete), one "x1,...,xd,value" line each, for plotting.
void write_dense_dump(std::ostream& out, const Histogram& h, int side);

}  // namespace khist
