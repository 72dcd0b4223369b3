// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bdr/config.hpp"
#include "bdr/formats.hpp"

namespace bdr {

/// Fraction of line bits carrying payload when `tile` elements are bit-packed
/// contiguously into `line_bits`-wide lines (blocks may straddle lines).
/// The tile must hold whole scale groups (see tile_granularity()).
[[nodiscard]] Rational packing_efficiency_exact(const FormatPreset& fmt, std::size_t tile = 256,
                                                std::size_t line_bits = 512);
[[nodiscard]] double packing_efficiency(const FormatPreset& fmt, std::size_t tile = 256,
                                        std::size_t line_bits = 512);

/// Structural cost of the dot-product datapath in adder-bit units.
struct AreaBreakdown {
    double multipliers = 0.0;
    double adder_tree = 0.0;
    double sub_scale = 0.0;  // conditional shifters or integer sub-scale multipliers
    double exponent_logic = 0.0;
    double normalization = 0.0;
    double accumulate = 0.0;
    double software_scale = 0.0;

    [[nodiscard]] double total() const noexcept {
        return multipliers + adder_tree + sub_scale + exponent_logic + normalization + accumulate +
               software_scale;
    }
};

[[nodiscard]] AreaBreakdown area_breakdown(const FormatPreset& fmt, std::size_t r);
[[nodiscard]] double area_proxy(const FormatPreset& fmt, std::size_t r);

constexpr std::size_t kDefaultReduction = 64;

/// Area of `fmt` divided by the FP8 baseline at the same r. Both FP8 variants
/// map to one datapath wide enough for either (4-bit significands, 5-bit
/// exponents).
[[nodiscard]] double normalized_area_proxy(const FormatPreset& fmt, std::size_t r = kDefaultReduction);

/// Externally supplied areas, e.g. from synthesis. CSV header
/// `format,r,area_units`; the baseline row is named "FP8".
class AreaTable {
public:
    static constexpr const char* kBaseline = "FP8";

    static AreaTable parse(std::istream& in);
    static AreaTable load(const std::string& path);

    void set(const std::string& format, std::size_t r, double area);
    [[nodiscard]] std::optional<double> lookup(const std::string& format, std::size_t r) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// area(format, r) / area(FP8, r). Throws DataError when either is missing.
    [[nodiscard]] double normalized(const std::string& format, std::size_t r) const;

    std::string provenance;

private:
    std::map<std::pair<std::string, std::size_t>, double> entries_;
};

struct CostPoint {
    std::string name;
    double qsnr_db = 0.0;
    double area = 1.0;
    double mem_cost = 1.0;
    double combined = 1.0;

    bool operator==(const CostPoint&) const = default;
};

/// Cost of a preset at reduction length r; areas from `table` when given,
/// otherwise from the proxy. FP8 presets without their own table row use the
/// baseline row.
[[nodiscard]] CostPoint make_cost_point(const FormatPreset& fmt, double qsnr_db, std::size_t r = kDefaultReduction,
                                        const AreaTable* table = nullptr);

/// a has at least the QSNR and at most the cost of b, and is strictly better in one.
[[nodiscard]] bool dominates(const CostPoint& a, const CostPoint& b) noexcept;

/// Points no other point dominates, sorted by combined cost ascending
/// (input order among equal costs). Duplicated points are all kept.
[[nodiscard]] std::vector<CostPoint> pareto_frontier(std::span<const CostPoint> points);

/// CostPoint CSV with header `name,qsnr_db,area,mem_cost,combined`.
void write_cost_points(std::ostream& out, std::span<const CostPoint> points);
[[nodiscard]] std::vector<CostPoint> read_cost_points(std::istream& in);

}  // namespace bdr
