// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bdr/config.hpp"
#include "bdr/formats.hpp"

namespace bdr {

enum class DistributionKind {
    GaussianVariableVariance,  // sigma = |N(0,1)| drawn per vector
    GaussianFixed,
    Uniform,
    Lognormal,                 // exp(N(mu, sigma^2)) magnitudes, random signs
    TwoMagnitudeAdversarial,   // interleaved big/small magnitudes, random signs
};

struct DistributionSpec {
    DistributionKind kind = DistributionKind::GaussianVariableVariance;
    double sigma = 1.0;  // gaussian-fixed and lognormal shape
    double mu = 0.0;     // lognormal location
    double low = -1.0;   // uniform range
    double high = 1.0;
    double big = 1.0;  // adversarial levels; element i is big when
    double small = 0x1p-20;  // floor((i + 1) * ratio) > floor(i * ratio)
    double ratio = 0.5;
    std::uint64_t seed = 0;
};

[[nodiscard]] std::string to_string(DistributionKind kind);
/// Accepts the names produced by to_string(), e.g. "gaussian-variable-variance".
[[nodiscard]] DistributionKind parse_distribution_kind(std::string_view name);
[[nodiscard]] const std::vector<DistributionKind>& all_distribution_kinds();

/// The `index`-th vector of the stream described by `dist`. Each vector has
/// its own generator seeded from (seed, index). Values are rounded to FP32.
[[nodiscard]] std::vector<double> sample_vector(const DistributionSpec& dist, std::size_t len,
                                                std::uint64_t index = 0);

/// n_vectors x vec_len samples stored as FP32, row i = sample_vector(dist, vec_len, i).
struct Dataset {
    std::size_t n_vectors = 0;
    std::size_t vec_len = 0;
    std::vector<float> values;

    [[nodiscard]] std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values).subspan(i * vec_len, vec_len);
    }
};

[[nodiscard]] Dataset make_dataset(const DistributionSpec& dist, std::size_t n_vectors, std::size_t vec_len,
                                   unsigned threads = 0);

/// -10 log10(|Q - X|^2 / |X|^2); +infinity when Q == X. Throws DataError for
/// an all-zero X and std::invalid_argument on a length mismatch.
[[nodiscard]] double qsnr(std::span<const double> x, std::span<const double> q);

struct QsnrReport {
    double mean_db = 0.0;
    double std_db = 0.0;
    std::size_t n_vectors = 0;
    std::size_t vec_len = 0;
    std::size_t n_exact = 0;  // vectors reproduced exactly (infinite QSNR)
};

struct QsnrOptions {
    /// Report -10 log10(sum noise / sum signal) instead of the mean of
    /// per-vector decibels.
    bool pooled = false;
    unsigned threads = 0;
};

/// QSNR of every vector through the preset's whole pipeline, in row order.
/// Delayed software scales run over the rows in order. All-zero rows are
/// rejected.
[[nodiscard]] std::vector<double> per_vector_qsnr(const FormatPreset& fmt, const Dataset& data,
                                                  unsigned threads = 0);

[[nodiscard]] QsnrReport estimate_qsnr(const FormatPreset& fmt, const Dataset& data, const QsnrOptions& opts = {});
[[nodiscard]] QsnrReport estimate_qsnr(const FormatPreset& fmt, const DistributionSpec& dist, std::size_t n_vectors,
                                       std::size_t vec_len, const QsnrOptions& opts = {});

/// Summary statistics of per-vector decibels: mean and sample standard
/// deviation of the finite entries; +infinity mean when every entry is.
[[nodiscard]] QsnrReport summarize_qsnr(std::span<const double> per_vector_db, std::size_t vec_len);

struct BoundParams {
    std::size_t n = 1024;  // vector length
    int m = 7;
    std::size_t k1 = 16;
    std::size_t k2 = 2;
    std::uint32_t beta = 1;
};

[[nodiscard]] BoundParams bound_params(const BdrConfig& cfg, std::size_t n);

/// 6.02 m + 10 log10(2^(2 beta) / (min(N, k1) + (2^(2 beta) - 1) k2)), with
/// 6.02 taken as 20 log10(2).
[[nodiscard]] double theorem1_bound(const BoundParams& p);

/// Least-squares slope of ys against xs.
[[nodiscard]] double linear_slope(std::span<const double> xs, std::span<const double> ys);

struct DominanceOptions {
    std::size_t n_configs = 100;
    std::size_t n_vectors = 64;  // per (config, distribution)
    std::size_t vec_len = 256;
    std::size_t slope_vectors = 2000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct DominanceReport {
    std::size_t configs = 0;
    std::size_t distributions = 0;
    std::size_t measurements = 0;
    std::size_t violations = 0;
    double worst_margin_db = 0.0;  // min over measurements of (QSNR - bound)
    std::vector<std::string> failures;  // first few violations, described
    double bound_slope = 0.0;     // dB per mantissa bit, m = 2..8 at MX geometry
    double measured_slope = 0.0;  // same, from measured mean QSNR
};

/// Random valid power-of-two BDR configs with d1 = 8, k1 <= 64, m <= 10.
[[nodiscard]] std::vector<BdrConfig> random_bound_configs(std::size_t n, std::uint64_t seed);

/// Checks every per-vector QSNR against theorem1_bound over random configs and
/// all distribution kinds, then fits the mantissa slope.
[[nodiscard]] DominanceReport verify_bound_dominance(const DominanceOptions& opts);

}  // namespace bdr
