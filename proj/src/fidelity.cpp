// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bdr/parallel.hpp"
#include "bdr/random.hpp"
#include "bdr/scale_state.hpp"

namespace bdr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kRowsPerTask = 32;

double signed_level(Xoshiro256pp& rng, double level) {
    const double v = level * (1.0 + rng.uniform());
    return rng.uniform() < 0.5 ? -v : v;
}

struct Energy {
    double noise = 0.0;
    double signal = 0.0;
};

Energy energies(std::span<const double> x, std::span<const double> q) {
    Energy e;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = q[i] - x[i];
        e.noise += d * d;
        e.signal += x[i] * x[i];
    }
    return e;
}

double to_db(const Energy& e) { return e.noise == 0.0 ? kInf : -10.0 * std::log10(e.noise / e.signal); }

// Quantizes every row through `fmt`, handing (row, x, q) to `sink`.
template <typename Sink>
void run_rows(const FormatPreset& fmt, const Dataset& data, unsigned threads, Sink&& sink) {
    std::vector<double> scales;
    if (uses_delayed_scale(fmt)) {
        std::vector<double> amax(data.n_vectors);
        for (std::size_t i = 0; i < data.n_vectors; ++i) {
            float a = 0.0F;
            for (float v : data.row(i)) {
                a = std::max(a, std::fabs(v));
            }
            amax[i] = a;
        }
        scales = delayed_scale_sequence(amax, fmt.window, software_format_max(fmt));
    }
    const std::size_t tasks = (data.n_vectors + kRowsPerTask - 1) / kRowsPerTask;
    parallel_for(
        tasks,
        [&](std::size_t t) {
            std::vector<double> x(data.vec_len);
            std::vector<double> q(data.vec_len);
            const std::size_t end = std::min(data.n_vectors, (t + 1) * kRowsPerTask);
            for (std::size_t i = t * kRowsPerTask; i < end; ++i) {
                const auto row = data.row(i);
                std::copy(row.begin(), row.end(), x.begin());
                fake_quantize(fmt, x, q, scales.empty() ? 1.0 : scales[i]);
                sink(i, std::span<const double>(x), std::span<const double>(q));
            }
        },
        threads);
}

}  // namespace

std::string to_string(DistributionKind kind) {
    switch (kind) {
    case DistributionKind::GaussianVariableVariance: return "gaussian-variable-variance";
    case DistributionKind::GaussianFixed: return "gaussian-fixed";
    case DistributionKind::Uniform: return "uniform";
    case DistributionKind::Lognormal: return "lognormal";
    case DistributionKind::TwoMagnitudeAdversarial: return "two-magnitude-adversarial";
    }
    return "?";
}

const std::vector<DistributionKind>& all_distribution_kinds() {
    static const std::vector<DistributionKind> kinds = {
        DistributionKind::GaussianVariableVariance, DistributionKind::GaussianFixed, DistributionKind::Uniform,
        DistributionKind::Lognormal, DistributionKind::TwoMagnitudeAdversarial};
    return kinds;
}

DistributionKind parse_distribution_kind(std::string_view name) {
    for (DistributionKind k : all_distribution_kinds()) {
        if (to_string(k) == name) {
            return k;
        }
    }
    std::string known;
    for (DistributionKind k : all_distribution_kinds()) {
        known += " " + to_string(k);
    }
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "'; known:" + known);
}

std::vector<double> sample_vector(const DistributionSpec& dist, std::size_t len, std::uint64_t index) {
    if (len == 0) {
        throw std::invalid_argument("vector length must be positive");
    }
    Xoshiro256pp rng(stream_seed(dist.seed, index));
    std::vector<double> v(len);
    switch (dist.kind) {
    case DistributionKind::GaussianVariableVariance: {
        const double sigma = std::fabs(rng.normal());
        for (auto& x : v) x = sigma * rng.normal();
        break;
    }
    case DistributionKind::GaussianFixed:
        for (auto& x : v) x = dist.sigma * rng.normal();
        break;
    case DistributionKind::Uniform:
        for (auto& x : v) x = dist.low + (dist.high - dist.low) * rng.uniform();
        break;
    case DistributionKind::Lognormal:
        for (auto& x : v) {
            const double mag = std::exp(dist.mu + dist.sigma * rng.normal());
            x = rng.uniform() < 0.5 ? -mag : mag;
        }
        break;
    case DistributionKind::TwoMagnitudeAdversarial:
        for (std::size_t i = 0; i < len; ++i) {
            const auto di = static_cast<double>(i);
            const bool is_big = std::floor((di + 1.0) * dist.ratio) > std::floor(di * dist.ratio);
            v[i] = signed_level(rng, is_big ? dist.big : dist.small);
        }
        break;
    }
    for (auto& x : v) {
        x = static_cast<double>(static_cast<float>(x));
    }
    return v;
}

Dataset make_dataset(const DistributionSpec& dist, std::size_t n_vectors, std::size_t vec_len, unsigned threads) {
    if (n_vectors == 0 || vec_len == 0) {
        throw std::invalid_argument("dataset needs at least one vector of positive length");
    }
    Dataset d{n_vectors, vec_len, std::vector<float>(n_vectors * vec_len)};
    parallel_for(
        n_vectors,
        [&](std::size_t i) {
            const auto v = sample_vector(dist, vec_len, i);
            std::transform(v.begin(), v.end(), d.values.begin() + static_cast<std::ptrdiff_t>(i * vec_len),
                           [](double x) { return static_cast<float>(x); });
        },
        threads);
    return d;
}

double qsnr(std::span<const double> x, std::span<const double> q) {
    if (x.size() != q.size()) {
        throw std::invalid_argument("qsnr: length mismatch");
    }
    const Energy e = energies(x, q);
    if (e.signal == 0.0) {
        throw DataError("qsnr undefined for an all-zero signal");
    }
    return to_db(e);
}

QsnrReport summarize_qsnr(std::span<const double> per_vector_db, std::size_t vec_len) {
    QsnrReport r;
    r.n_vectors = per_vector_db.size();
    r.vec_len = vec_len;
    double sum = 0.0;
    std::size_t finite = 0;
    for (double v : per_vector_db) {
        if (std::isinf(v)) {
            ++r.n_exact;
        } else {
            sum += v;
            ++finite;
        }
    }
    if (finite == 0) {
        r.mean_db = kInf;
        return r;
    }
    r.mean_db = sum / static_cast<double>(finite);
    if (finite > 1) {
        double ss = 0.0;
        for (double v : per_vector_db) {
            if (!std::isinf(v)) {
                ss += (v - r.mean_db) * (v - r.mean_db);
            }
        }
        r.std_db = std::sqrt(ss / static_cast<double>(finite - 1));
    }
    return r;
}

std::vector<double> per_vector_qsnr(const FormatPreset& fmt, const Dataset& data, unsigned threads) {
    std::vector<double> db(data.n_vectors);
    run_rows(fmt, data, threads, [&](std::size_t i, std::span<const double> x, std::span<const double> q) {
        const Energy e = energies(x, q);
        if (e.signal == 0.0) {
            throw DataError("vector " + std::to_string(i) + " is all zero; QSNR undefined");
        }
        db[i] = to_db(e);
    });
    return db;
}

QsnrReport estimate_qsnr(const FormatPreset& fmt, const Dataset& data, const QsnrOptions& opts) {
    if (!opts.pooled) {
        return summarize_qsnr(per_vector_qsnr(fmt, data, opts.threads), data.vec_len);
    }
    std::vector<Energy> parts(data.n_vectors);
    run_rows(fmt, data, opts.threads, [&](std::size_t i, std::span<const double> x, std::span<const double> q) {
        parts[i] = energies(x, q);
    });
    std::vector<double> db(data.n_vectors);
    Energy total;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].signal == 0.0) {
            throw DataError("vector " + std::to_string(i) + " is all zero; QSNR undefined");
        }
        db[i] = to_db(parts[i]);
        total.noise += parts[i].noise;
        total.signal += parts[i].signal;
    }
    QsnrReport r = summarize_qsnr(db, data.vec_len);
    r.mean_db = to_db(total);
    return r;
}

QsnrReport estimate_qsnr(const FormatPreset& fmt, const DistributionSpec& dist, std::size_t n_vectors,
                         std::size_t vec_len, const QsnrOptions& opts) {
    return estimate_qsnr(fmt, make_dataset(dist, n_vectors, vec_len, opts.threads), opts);
}

BoundParams bound_params(const BdrConfig& cfg, std::size_t n) {
    validate(cfg);
    if (n == 0) {
        throw std::invalid_argument("vector length must be positive");
    }
    return {n, cfg.m, cfg.k1, cfg.k2, cfg.beta()};
}

double theorem1_bound(const BoundParams& p) {
    if (p.n == 0 || p.k1 == 0 || p.k2 == 0 || p.m < 1 || p.beta > 65535) {
        throw std::invalid_argument("invalid bound parameters");
    }
    const double two_2beta = std::ldexp(1.0, 2 * static_cast<int>(p.beta));
    const double denom =
        static_cast<double>(std::min(p.n, p.k1)) + (two_2beta - 1.0) * static_cast<double>(p.k2);
    // log10 of the ratio without forming 2^(2 beta) / denom, which overflows for wide beta
    const double log_ratio = 2.0 * p.beta * std::log10(2.0) - std::log10(denom);
    return 20.0 * std::log10(2.0) * p.m + 10.0 * log_ratio;
}

double linear_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("slope needs at least two paired points");
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("slope undefined for constant x");
    }
    return sxy / sxx;
}

std::vector<BdrConfig> random_bound_configs(std::size_t n, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    auto pick = [&rng](std::uint64_t count) { return static_cast<int>(rng() % count); };
    std::vector<BdrConfig> out;
    out.reserve(n);
    while (out.size() < n) {
        BdrConfig c;
        c.m = 1 + pick(10);
        c.d1 = 8;
        c.d2 = pick(4);
        const int log_k1 = pick(7);
        c.k1 = std::size_t{1} << log_k1;
        c.k2 = std::size_t{1} << pick(log_k1 + 1);
        c.scale_kind = ScaleKind::PowerOfTwo;
        c.sub_scale_kind = c.d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo;
        out.push_back(c);
    }
    return out;
}

DominanceReport verify_bound_dominance(const DominanceOptions& opts) {
    DominanceReport rep;
    rep.worst_margin_db = kInf;
    const auto configs = random_bound_configs(opts.n_configs, opts.seed);
    const auto& kinds = all_distribution_kinds();
    rep.configs = configs.size();
    rep.distributions = kinds.size();

    std::vector<Dataset> datasets;
    for (std::size_t d = 0; d < kinds.size(); ++d) {
        DistributionSpec spec;
        spec.kind = kinds[d];
        spec.seed = stream_seed(opts.seed, 1000 + d);
        datasets.push_back(make_dataset(spec, opts.n_vectors, opts.vec_len, opts.threads));
    }
    for (const BdrConfig& cfg : configs) {
        const FormatPreset fmt = bdr_preset(cfg, ScalingPolicy::PerBlockHw);
        const double bound = theorem1_bound(bound_params(cfg, opts.vec_len));
        for (std::size_t d = 0; d < kinds.size(); ++d) {
            const auto db = per_vector_qsnr(fmt, datasets[d], opts.threads);
            for (std::size_t i = 0; i < db.size(); ++i) {
                ++rep.measurements;
                const double margin = db[i] - bound;
                rep.worst_margin_db = std::min(rep.worst_margin_db, margin);
                if (margin < 0.0) {
                    ++rep.violations;
                    if (rep.failures.size() < 10) {
                        std::ostringstream os;
                        os << describe(cfg) << " " << to_string(kinds[d]) << " vector " << i << ": " << db[i]
                           << " dB < bound " << bound << " dB";
                        rep.failures.push_back(os.str());
                    }
                }
            }
        }
    }

    std::vector<double> ms;
    std::vector<double> bounds;
    std::vector<double> measured;
    DistributionSpec spec;
    spec.seed = opts.seed;
    const Dataset slope_data = make_dataset(spec, opts.slope_vectors, 1024, opts.threads);
    for (int m = 2; m <= 8; ++m) {
        const BdrConfig cfg{m, 8, 1, 16, 2, ScaleKind::PowerOfTwo, SubScaleKind::PowerOfTwo};
        ms.push_back(m);
        bounds.push_back(theorem1_bound(bound_params(cfg, 1024)));
        measured.push_back(estimate_qsnr(bdr_preset(cfg, ScalingPolicy::PerBlockHw), slope_data,
                                         {false, opts.threads})
                               .mean_db);
    }
    rep.bound_slope = linear_slope(ms, bounds);
    rep.measured_slope = linear_slope(ms, measured);
    return rep;
}

}  // namespace bdr
