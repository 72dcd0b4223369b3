// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/cost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bdr/csv.hpp"
#include "bdr/dot.hpp"

namespace bdr {

namespace {

constexpr int kFp8SignificandBits = 4;  // E4M3 with its hidden bit
constexpr int kFp8ExponentBits = 5;     // E5M2
constexpr int kFp8AccumulatorBits = 25;
constexpr int kFp32SignificandBits = 24;
constexpr int kFp32ExponentBits = 8;

double clog2(std::size_t n) { return n <= 1 ? 0.0 : static_cast<double>(std::bit_width(n - 1)); }

// Binary adder tree over n inputs of width w0; each level widens by one bit,
// and levels at or past `shift_level` carry `extra` more bits.
double tree_cost(std::size_t n, double w0, int shift_level = std::numeric_limits<int>::max(), double extra = 0.0) {
    double cost = 0.0;
    std::size_t inputs = n;
    for (int level = 0; inputs > 1; ++level) {
        const std::size_t adders = (inputs + 1) / 2;
        cost += static_cast<double>(adders) * (w0 + level + (level >= shift_level ? extra : 0.0));
        inputs = adders;
    }
    return cost;
}

void require_multiple(std::size_t r, std::size_t g, const char* what) {
    if (r == 0 || r % g != 0) {
        throw std::invalid_argument(std::string("reduction length must be a positive multiple of ") + what + " (" +
                                    std::to_string(g) + ")");
    }
}

AreaBreakdown bdr_area(const FormatPreset& fmt, std::size_t r) {
    const BdrConfig& c = fmt.cfg;
    require_multiple(r, c.k1, "k1");
    const auto rd = static_cast<double>(r);
    const auto nb = static_cast<double>(r / c.k1);
    const auto m = static_cast<double>(c.m);
    const double beta = c.beta();
    const auto subs = static_cast<double>(c.subblocks());
    const int w = partial_width(c);
    const int f = default_accumulator_width(c);

    AreaBreakdown a;
    a.multipliers = rd * m * m;
    a.adder_tree = nb * tree_cost(c.k1, 2.0 * m, static_cast<int>(clog2(c.k2)), 2.0 * beta);
    if (c.beta() > 0) {
        a.sub_scale = nb * subs * (2.0 * m + clog2(c.k2)) * clog2(2 * c.beta() + 1);
    }
    const double d1 = fmt.policy == ScalingPolicy::PerCoarseBlockSw ? 0.0 : c.d1;
    a.exponent_logic = nb * (d1 + 1.0) + (nb - 1.0) * (d1 + 2.0);
    if (c.beta() > 0) {
        a.exponent_logic += nb * subs * (c.d2 + 1.0);
    }
    a.normalization = nb * w * clog2(static_cast<std::size_t>(f) + 1);
    a.accumulate = tree_cost(r / c.k1, f);
    if (fmt.policy == ScalingPolicy::PerCoarseBlockSw) {
        // One FP32 scale product per block partial, plus its exponent add.
        a.software_scale = nb * (w * kFp32SignificandBits + kFp32ExponentBits + 1.0);
    }
    return a;
}

AreaBreakdown fp8_area(std::size_t r) {
    const auto rd = static_cast<double>(r);
    const double w = kFp8SignificandBits;
    const double e = kFp8ExponentBits;
    AreaBreakdown a;
    a.multipliers = rd * w * w;
    a.exponent_logic = rd * (e + 1.0) + (rd - 1.0) * (e + 2.0);
    a.normalization = rd * 2.0 * w * clog2(kFp8AccumulatorBits + 1);
    a.adder_tree = tree_cost(r, kFp8AccumulatorBits);
    return a;
}

AreaBreakdown int_area(const FormatPreset& fmt, std::size_t r) {
    const auto rd = static_cast<double>(r);
    const double b = fmt.int_bits();
    AreaBreakdown a;
    a.multipliers = rd * b * b;
    a.adder_tree = tree_cost(r, 2.0 * b);
    a.accumulate = 2.0 * b + clog2(r);
    return a;
}

AreaBreakdown vsq_area(const FormatPreset& fmt, std::size_t r) {
    const std::size_t k2 = fmt.cfg.k2;
    require_multiple(r, k2, "k2");
    const auto rd = static_cast<double>(r);
    const double b = fmt.int_bits();
    const double d2 = fmt.cfg.d2;
    const auto groups = static_cast<double>(r / k2);
    const double group_width = 2.0 * b + clog2(k2);
    AreaBreakdown a;
    a.multipliers = rd * b * b;
    a.adder_tree = groups * tree_cost(k2, 2.0 * b) + tree_cost(r / k2, group_width + 2.0 * d2);
    // Each group sum is multiplied by the product of the two d2-bit sub-scales.
    a.sub_scale = groups * group_width * 2.0 * d2;
    a.accumulate = group_width + 2.0 * d2 + clog2(r / k2);
    return a;
}

}  // namespace

Rational packing_efficiency_exact(const FormatPreset& fmt, std::size_t tile, std::size_t line_bits) {
    if (tile == 0 || line_bits == 0) {
        throw std::invalid_argument("tile and line width must be positive");
    }
    const std::size_t g = tile_granularity(fmt);
    if (tile % g != 0) {
        throw std::invalid_argument("tile of " + std::to_string(tile) + " elements does not hold whole groups of " +
                                    std::to_string(g));
    }
    const Rational bits = preset_bits_per_element(fmt) * static_cast<std::int64_t>(tile);
    const std::int64_t stored = (bits.numerator() + bits.denominator() - 1) / bits.denominator();
    const auto line = static_cast<std::int64_t>(line_bits);
    const std::int64_t lines = (stored + line - 1) / line;
    return bits / (lines * line);
}

double packing_efficiency(const FormatPreset& fmt, std::size_t tile, std::size_t line_bits) {
    return boost::rational_cast<double>(packing_efficiency_exact(fmt, tile, line_bits));
}

AreaBreakdown area_breakdown(const FormatPreset& fmt, std::size_t r) {
    if (r == 0) {
        throw std::invalid_argument("reduction length must be positive");
    }
    switch (fmt.family) {
    case FormatFamily::Bdr: return bdr_area(fmt, r);
    case FormatFamily::Fp8: return fp8_area(r);
    case FormatFamily::Int: return int_area(fmt, r);
    case FormatFamily::Vsq: return vsq_area(fmt, r);
    }
    return {};
}

double area_proxy(const FormatPreset& fmt, std::size_t r) { return area_breakdown(fmt, r).total(); }

double normalized_area_proxy(const FormatPreset& fmt, std::size_t r) { return area_proxy(fmt, r) / fp8_area(r).total(); }

AreaTable AreaTable::parse(std::istream& in) {
    AreaTable t;
    std::string text;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '#') {
            t.provenance += line.substr(1);
            t.provenance += '\n';
        } else {
            text += line;
            text += '\n';
        }
    }
    const auto rows = parse_csv(std::string_view(text));
    if (rows.empty() || rows.front() != CsvRow{"format", "r", "area_units"}) {
        throw DataError("area table must start with the header format,r,area_units");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (row.size() == 1 && row[0].empty()) {
            continue;
        }
        if (row.size() != 3) {
            throw DataError("area table row " + std::to_string(i + 1) + " needs 3 fields");
        }
        const double r = parse_double(row[1]);
        const double area = parse_double(row[2]);
        if (!(r >= 1.0) || r != std::floor(r) || !(area > 0.0) || !std::isfinite(area)) {
            throw DataError("area table row " + std::to_string(i + 1) + " has an invalid r or area");
        }
        t.set(row[0], static_cast<std::size_t>(r), area);
    }
    return t;
}

AreaTable AreaTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open area table '" + path + "'");
    }
    return parse(in);
}

void AreaTable::set(const std::string& format, std::size_t r, double area) { entries_[{format, r}] = area; }

std::optional<double> AreaTable::lookup(const std::string& format, std::size_t r) const {
    const auto it = entries_.find({format, r});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

double AreaTable::normalized(const std::string& format, std::size_t r) const {
    const auto base = lookup(kBaseline, r);
    if (!base) {
        throw DataError("area table has no " + std::string(kBaseline) + " baseline at r = " + std::to_string(r));
    }
    const auto area = lookup(format, r);
    if (!area) {
        throw DataError("area table has no entry for " + format + " at r = " + std::to_string(r));
    }
    return *area / *base;
}

CostPoint make_cost_point(const FormatPreset& fmt, double qsnr_db, std::size_t r, const AreaTable* table) {
    CostPoint p;
    p.name = fmt.name;
    p.qsnr_db = qsnr_db;
    if (table == nullptr) {
        p.area = normalized_area_proxy(fmt, r);
    } else if (fmt.family == FormatFamily::Fp8 && !table->lookup(fmt.name, r)) {
        p.area = table->normalized(AreaTable::kBaseline, r);
    } else {
        p.area = table->normalized(fmt.name, r);
    }
    const Rational eff = packing_efficiency_exact(fmt);
    p.mem_cost = boost::rational_cast<double>(Rational(1) / eff);
    p.combined = p.area * p.mem_cost;
    return p;
}

bool dominates(const CostPoint& a, const CostPoint& b) noexcept {
    const bool no_worse = a.qsnr_db >= b.qsnr_db && a.combined <= b.combined;
    const bool better = a.qsnr_db > b.qsnr_db || a.combined < b.combined;
    return no_worse && better;
}

std::vector<CostPoint> pareto_frontier(std::span<const CostPoint> points) {
    for (const CostPoint& p : points) {
        if (std::isnan(p.qsnr_db) || std::isnan(p.combined)) {
            throw std::invalid_argument("cost point '" + p.name + "' has a NaN coordinate");
        }
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (points[i].combined != points[j].combined) {
            return points[i].combined < points[j].combined;
        }
        return points[i].qsnr_db > points[j].qsnr_db;
    });
    std::vector<CostPoint> front;
    for (std::size_t i : order) {
        const CostPoint& p = points[i];
        if (front.empty() || p.qsnr_db > front.back().qsnr_db) {
            front.push_back(p);
        } else if (p.qsnr_db == front.back().qsnr_db && p.combined == front.back().combined) {
            front.push_back(p);
        }
    }
    return front;
}

void write_cost_points(std::ostream& out, std::span<const CostPoint> points) {
    const std::vector<std::string> header{"name", "qsnr_db", "area", "mem_cost", "combined"};
    write_csv_row(out, header);
    for (const CostPoint& p : points) {
        const std::vector<std::string> row{p.name, format_double(p.qsnr_db), format_double(p.area),
                                           format_double(p.mem_cost), format_double(p.combined)};
        write_csv_row(out, row);
    }
}

std::vector<CostPoint> read_cost_points(std::istream& in) {
    const auto rows = parse_csv(in);
    if (rows.empty() || rows.front() != CsvRow{"name", "qsnr_db", "area", "mem_cost", "combined"}) {
        throw DataError("cost CSV must start with the header name,qsnr_db,area,mem_cost,combined");
    }
    std::vector<CostPoint> points;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (row.size() == 1 && row[0].empty()) {
            continue;
        }
        if (row.size() != 5) {
            throw DataError("cost CSV row " + std::to_string(i + 1) + " needs 5 fields");
        }
        points.push_back({row[0], parse_double(row[1]), parse_double(row[2]), parse_double(row[3]),
                          parse_double(row[4])});
    }
    return points;
}

}  // namespace bdr
