// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bdr/config.hpp"
#include "bdr/fp8.hpp"
#include "bdr/scale_state.hpp"
#include "bdr/tensor.hpp"

namespace bdr {

enum class FormatFamily {
    Bdr,  // MX, MSFP/BFP and every other power-of-two two-level point
    Int,  // two's-complement integers under one software scale
    Fp8,  // scalar 8-bit floats under one software scale
    Vsq,  // software scale plus per-vector integer sub-scales
};

enum class ScalingPolicy {
    PerBlockHw,          // hardware shared exponent per k1 block
    PerTensorSwDelayed,  // software scale from a window of past maxima
    PerCoarseBlockSw,    // software scale fitted to each k1 block's maximum
};

/// Software scales for per-vector (INT, FP8, VSQ) formats live outside the
/// tile and are not counted in cfg.d1; see preset_bits_per_element().
struct FormatPreset {
    std::string name;
    FormatFamily family = FormatFamily::Bdr;
    BdrConfig cfg;
    ScalingPolicy policy = ScalingPolicy::PerBlockHw;
    std::optional<Fp8Variant> fp8;
    std::size_t window = 1024;  // delayed-scaling history length

    /// Two's-complement width for INT and VSQ elements.
    [[nodiscard]] int int_bits() const noexcept { return cfg.m + 1; }
};

/// Resolves a preset name. Accepted forms:
///   MX9 MX6 MX4 MSFP12 MSFP16 INT8 INT4 FP8-E4M3 FP8-E5M2
///   BFP(k1,m)  VSQ(bits)  VSQ(bits,d2)  BDR(m,d2,k1,k2[,hw|swblock|swdelayed])
/// Throws std::invalid_argument listing the accepted forms otherwise.
[[nodiscard]] FormatPreset preset(std::string_view name);

[[nodiscard]] const std::vector<std::string>& known_preset_names();

/// Canonical name of a BDR grid point, e.g. "BDR(4,1,16,2,hw)".
[[nodiscard]] std::string bdr_name(const BdrConfig& cfg, ScalingPolicy policy);
[[nodiscard]] FormatPreset bdr_preset(const BdrConfig& cfg, ScalingPolicy policy);

[[nodiscard]] std::string to_string(ScalingPolicy policy);
[[nodiscard]] std::string to_string(FormatFamily family);

/// Memory bits per element as stored in a tile. Per-block software scales
/// count as 32-bit values amortized over k1.
[[nodiscard]] Rational preset_bits_per_element(const FormatPreset& p);

/// Granularity a tile must respect to hold whole scale groups.
[[nodiscard]] std::size_t tile_granularity(const FormatPreset& p);

// --- INT ------------------------------------------------------------------

/// max|x| / (2^(bits-1) - 1), or 1 for an all-zero input.
[[nodiscard]] double max_scale(std::span<const double> x, int bits);

/// RoundToInt(x / s), ties to even, saturated to [-2^(bits-1), 2^(bits-1) - 1].
[[nodiscard]] std::vector<std::int32_t> int_quantize(std::span<const double> x, int bits, double s);
[[nodiscard]] std::vector<double> int_dequantize(std::span<const std::int32_t> q, double s);

// --- VSQ ------------------------------------------------------------------

struct VsqBlock {
    double coarse_scale = 1.0;
    int element_bits = 4;
    std::size_t k2 = 16;
    std::vector<std::int32_t> sub_scales;
    std::vector<std::int32_t> codes;
};

/// Coarse software scale `s` (default: fitted so the largest group uses the
/// top sub-scale), integer sub-scales ss_i = ceil(max|group| / (s * intmax))
/// clamped to [1, 2^d2 - 1], and codes RoundToInt(x / (s * ss_i)).
[[nodiscard]] VsqBlock vsq_quantize(std::span<const double> x, int element_bits, int d2, std::size_t k2,
                                    std::optional<double> coarse_scale = std::nullopt);
[[nodiscard]] std::vector<double> vsq_dequantize(const VsqBlock& block);

// --- Full pipelines ----------------------------------------------------------

/// The value the software scale maps the observed maximum onto
/// (448 for E4M3, 2^(b-1) - 1 for INT, grid top for BDR, ...).
[[nodiscard]] double software_format_max(const FormatPreset& p);

[[nodiscard]] bool uses_delayed_scale(const FormatPreset& p) noexcept;

/// Quantize then dequantize one vector with the preset's whole pipeline.
/// `software_scale` is used when the policy is PerTensorSwDelayed and ignored
/// otherwise.
void fake_quantize(const FormatPreset& p, std::span<const double> x, std::span<double> out,
                   double software_scale = 1.0);

/// Software scale for the next vector under delayed scaling: derived from
/// past observations only, or from the current maximum when there is no
/// history yet. Records `current_amax` afterwards.
[[nodiscard]] double next_delayed_scale(ScaleState& state, double current_amax, double format_max);

/// Direct cast of a whole tensor along `axis`. Per-block hardware formats go
/// through quantize_tensor_along_axis(); software-scaled paths use one scale
/// fitted to the tensor's absolute maximum (there is no history to delay on).
[[nodiscard]] Tensor fake_quantize_tensor(const FormatPreset& p, const Tensor& t, std::size_t axis);

}  // namespace bdr
