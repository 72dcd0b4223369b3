// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/formats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "bdr/block.hpp"

namespace bdr {

namespace {

constexpr std::size_t kSoftwareGranularity = 1024;
constexpr int kDefaultVsqScaleBits = 4;

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

[[noreturn]] void unknown_preset(std::string_view name, const std::string& why = {}) {
    std::ostringstream os;
    os << "unknown preset '" << name << "'";
    if (!why.empty()) {
        os << " (" << why << ")";
    }
    os << "; known presets:";
    for (const auto& n : known_preset_names()) {
        os << ' ' << n;
    }
    throw std::invalid_argument(os.str());
}

// Splits "NAME(a,b,c)" into its comma-separated arguments.
std::optional<std::vector<std::string>> call_args(const std::string& s, const std::string& head) {
    if (s.size() < head.size() + 2 || s.compare(0, head.size() + 1, head + "(") != 0 || s.back() != ')') {
        return std::nullopt;
    }
    std::vector<std::string> args;
    std::string inner = s.substr(head.size() + 1, s.size() - head.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        args.push_back(item);
    }
    return args;
}

long parse_int(std::string_view name, const std::string& text) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used != text.size()) {
            unknown_preset(name, "bad integer '" + text + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        unknown_preset(name, "bad integer '" + text + "'");
    }
}

ScalingPolicy parse_policy(std::string_view name, const std::string& token) {
    if (token == "HW") return ScalingPolicy::PerBlockHw;
    if (token == "SWBLOCK") return ScalingPolicy::PerCoarseBlockSw;
    if (token == "SWDELAYED") return ScalingPolicy::PerTensorSwDelayed;
    unknown_preset(name, "policy must be hw, swblock or swdelayed");
}

BdrConfig mx_config(int m) { return {m, 8, 1, 16, 2, ScaleKind::PowerOfTwo, SubScaleKind::PowerOfTwo}; }

BdrConfig bfp_config(std::size_t k1, int m) { return {m, 8, 0, k1, k1, ScaleKind::PowerOfTwo, SubScaleKind::None}; }

FormatPreset int_preset(int bits) {
    FormatPreset p;
    p.name = "INT" + std::to_string(bits);
    p.family = FormatFamily::Int;
    p.cfg = {bits - 1, 0, 0, kSoftwareGranularity, kSoftwareGranularity, ScaleKind::Software, SubScaleKind::None};
    p.policy = ScalingPolicy::PerTensorSwDelayed;
    return p;
}

FormatPreset fp8_preset(Fp8Variant v) {
    const Fp8Layout l = fp8_layout(v);
    FormatPreset p;
    p.name = v == Fp8Variant::E4M3 ? "FP8-E4M3" : "FP8-E5M2";
    p.family = FormatFamily::Fp8;
    p.cfg = {l.man_bits, 0, l.exp_bits, kSoftwareGranularity, 1, ScaleKind::Software,
             SubScaleKind::PerElementExponent};
    p.policy = ScalingPolicy::PerTensorSwDelayed;
    p.fp8 = v;
    return p;
}

FormatPreset vsq_preset(int bits, int d2) {
    FormatPreset p;
    p.name = "VSQ(" + std::to_string(bits) + "," + std::to_string(d2) + ")";
    p.family = FormatFamily::Vsq;
    p.cfg = {bits - 1, 0, d2, kSoftwareGranularity, 16, ScaleKind::Software, SubScaleKind::Integer};
    p.policy = ScalingPolicy::PerTensorSwDelayed;
    return p;
}

std::int32_t round_saturate(double v, int bits) {
    const double lo = -std::ldexp(1.0, bits - 1);
    const double hi = std::ldexp(1.0, bits - 1) - 1.0;
    return static_cast<std::int32_t>(std::clamp(std::nearbyint(v), lo, hi));
}

double abs_max(std::span<const double> x) {
    double a = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw DataError("non-finite input");
        }
        a = std::max(a, std::fabs(v));
    }
    return a;
}

// Runs `fn(chunk_in, chunk_out)` over consecutive chunks of `len`, handing the
// final partial chunk over zero-padded.
template <typename Fn>
void over_chunks(std::span<const double> x, std::span<double> out, std::size_t len, Fn&& fn) {
    std::vector<double> pin(len);
    std::vector<double> pout(len);
    for (std::size_t i = 0; i < x.size(); i += len) {
        const std::size_t n = std::min(len, x.size() - i);
        if (n == len) {
            fn(x.subspan(i, len), out.subspan(i, len));
        } else {
            std::fill(pin.begin(), pin.end(), 0.0);
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(i), n, pin.begin());
            fn(std::span<const double>(pin), std::span<double>(pout));
            std::copy_n(pout.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
}

void fake_int(std::span<const double> x, std::span<double> out, int bits, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = s * round_saturate(x[i] / s, bits);
    }
}

void fake_fp8(std::span<const double> x, std::span<double> out, Fp8Variant v, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = fp8_decode(fp8_encode(x[i], v, s)) * s;
    }
}

void fake_vsq(std::span<const double> x, std::span<double> out, const FormatPreset& p,
              std::optional<double> coarse) {
    const auto block = vsq_quantize(x, p.int_bits(), p.cfg.d2, p.cfg.k2, coarse);
    const auto values = vsq_dequantize(block);
    std::copy(values.begin(), values.end(), out.begin());
}

}  // namespace

const std::vector<std::string>& known_preset_names() {
    static const std::vector<std::string> names = {
        "MX9",      "MX6",      "MX4",       "MSFP12",        "MSFP16",
        "BFP(k1,m)", "INT8",    "INT4",      "FP8-E4M3",      "FP8-E5M2",
        "VSQ(bits)", "VSQ(bits,d2)", "BDR(m,d2,k1,k2[,hw|swblock|swdelayed])"};
    return names;
}

std::string to_string(ScalingPolicy policy) {
    switch (policy) {
    case ScalingPolicy::PerBlockHw: return "hw";
    case ScalingPolicy::PerTensorSwDelayed: return "swdelayed";
    case ScalingPolicy::PerCoarseBlockSw: return "swblock";
    }
    return "?";
}

std::string to_string(FormatFamily family) {
    switch (family) {
    case FormatFamily::Bdr: return "bdr";
    case FormatFamily::Int: return "int";
    case FormatFamily::Fp8: return "fp8";
    case FormatFamily::Vsq: return "vsq";
    }
    return "?";
}

std::string bdr_name(const BdrConfig& cfg, ScalingPolicy policy) {
    std::ostringstream os;
    os << "BDR(" << cfg.m << ',' << cfg.d2 << ',' << cfg.k1 << ',' << cfg.k2 << ',' << to_string(policy) << ')';
    return os.str();
}

FormatPreset bdr_preset(const BdrConfig& cfg, ScalingPolicy policy) {
    validate_codec(cfg);
    FormatPreset p;
    p.name = bdr_name(cfg, policy);
    p.family = FormatFamily::Bdr;
    p.cfg = cfg;
    p.policy = policy;
    return p;
}

FormatPreset preset(std::string_view name) {
    const std::string key = upper(name);
    auto named_bdr = [](std::string n, const BdrConfig& cfg) {
        FormatPreset p = bdr_preset(cfg, ScalingPolicy::PerBlockHw);
        p.name = std::move(n);
        return p;
    };
    if (key == "MX9") return named_bdr("MX9", mx_config(7));
    if (key == "MX6") return named_bdr("MX6", mx_config(4));
    if (key == "MX4") return named_bdr("MX4", mx_config(2));
    if (key == "MSFP16") return named_bdr("MSFP16", bfp_config(16, 7));
    if (key == "MSFP12") return named_bdr("MSFP12", bfp_config(16, 3));
    if (key == "INT8") return int_preset(8);
    if (key == "INT4") return int_preset(4);
    if (key == "FP8-E4M3" || key == "E4M3") return fp8_preset(Fp8Variant::E4M3);
    if (key == "FP8-E5M2" || key == "E5M2") return fp8_preset(Fp8Variant::E5M2);

    try {
        if (auto args = call_args(key, "BFP")) {
            if (args->size() != 2) unknown_preset(name, "BFP takes (k1,m)");
            const long k1 = parse_int(name, (*args)[0]);
            const long m = parse_int(name, (*args)[1]);
            if (k1 < 1) unknown_preset(name, "k1 must be positive");
            FormatPreset p = named_bdr("", bfp_config(static_cast<std::size_t>(k1), static_cast<int>(m)));
            p.name = "BFP(" + std::to_string(k1) + "," + std::to_string(m) + ")";
            return p;
        }
        if (auto args = call_args(key, "VSQ")) {
            if (args->empty() || args->size() > 2) unknown_preset(name, "VSQ takes (bits) or (bits,d2)");
            const long bits = parse_int(name, (*args)[0]);
            const long d2 = args->size() == 2 ? parse_int(name, (*args)[1]) : kDefaultVsqScaleBits;
            if (bits < 2 || bits > kMaxMantissaBits + 1) unknown_preset(name, "VSQ element bits out of range");
            if (d2 < 1 || d2 > kMaxSubScaleBits) unknown_preset(name, "VSQ d2 out of range");
            return vsq_preset(static_cast<int>(bits), static_cast<int>(d2));
        }
        if (auto args = call_args(key, "BDR")) {
            if (args->size() != 4 && args->size() != 5) unknown_preset(name, "BDR takes (m,d2,k1,k2[,policy])");
            const long m = parse_int(name, (*args)[0]);
            const long d2 = parse_int(name, (*args)[1]);
            const long k1 = parse_int(name, (*args)[2]);
            const long k2 = parse_int(name, (*args)[3]);
            if (k1 < 1 || k2 < 1) unknown_preset(name, "k1 and k2 must be positive");
            const ScalingPolicy policy =
                args->size() == 5 ? parse_policy(name, (*args)[4]) : ScalingPolicy::PerBlockHw;
            BdrConfig cfg{static_cast<int>(m), 8, static_cast<int>(d2), static_cast<std::size_t>(k1),
                          static_cast<std::size_t>(k2), ScaleKind::PowerOfTwo,
                          d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo};
            return bdr_preset(cfg, policy);
        }
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.rfind("unknown preset", 0) == 0) {
            throw;
        }
        unknown_preset(name, what);
    }
    unknown_preset(name);
}

Rational preset_bits_per_element(const FormatPreset& p) {
    if (p.family == FormatFamily::Bdr && p.policy == ScalingPolicy::PerCoarseBlockSw) {
        BdrConfig c = p.cfg;
        c.d1 = 0;
        return bits_per_element(c) + Rational(32, static_cast<std::int64_t>(c.k1));
    }
    return bits_per_element(p.cfg);
}

std::size_t tile_granularity(const FormatPreset& p) {
    switch (p.family) {
    case FormatFamily::Bdr: return p.cfg.k1;
    case FormatFamily::Vsq: return p.cfg.k2;
    case FormatFamily::Int:
    case FormatFamily::Fp8: return 1;
    }
    return 1;
}

double max_scale(std::span<const double> x, int bits) {
    if (bits < 2) {
        throw std::invalid_argument("integer width must be at least 2 bits");
    }
    const double a = abs_max(x);
    return a > 0.0 ? a / (std::ldexp(1.0, bits - 1) - 1.0) : 1.0;
}

std::vector<std::int32_t> int_quantize(std::span<const double> x, int bits, double s) {
    if (bits < 2 || bits > 31) {
        throw std::invalid_argument("integer width must lie in [2, 31]");
    }
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("integer scale must be finite and positive");
    }
    std::vector<std::int32_t> q(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw DataError("non-finite input at index " + std::to_string(i));
        }
        q[i] = round_saturate(x[i] / s, bits);
    }
    return q;
}

std::vector<double> int_dequantize(std::span<const std::int32_t> q, double s) {
    std::vector<double> out(q.size());
    std::transform(q.begin(), q.end(), out.begin(), [s](std::int32_t v) { return s * v; });
    return out;
}

VsqBlock vsq_quantize(std::span<const double> x, int element_bits, int d2, std::size_t k2,
                      std::optional<double> coarse_scale) {
    if (k2 == 0 || x.size() % k2 != 0) {
        throw std::invalid_argument("VSQ group size must divide the block length");
    }
    if (element_bits < 2 || element_bits > 31 || d2 < 1 || d2 > kMaxSubScaleBits) {
        throw std::invalid_argument("VSQ widths out of range");
    }
    const double intmax = std::ldexp(1.0, element_bits - 1) - 1.0;
    const double ss_max = std::ldexp(1.0, d2) - 1.0;
    const double amax = abs_max(x);

    VsqBlock b;
    b.element_bits = element_bits;
    b.k2 = k2;
    if (coarse_scale) {
        if (!(*coarse_scale > 0.0) || !std::isfinite(*coarse_scale)) {
            throw std::invalid_argument("VSQ coarse scale must be finite and positive");
        }
        b.coarse_scale = *coarse_scale;
    } else {
        b.coarse_scale = amax > 0.0 ? amax / (intmax * ss_max) : 1.0;
    }
    b.sub_scales.resize(x.size() / k2);
    b.codes.resize(x.size());
    for (std::size_t g = 0; g < b.sub_scales.size(); ++g) {
        const auto group = x.subspan(g * k2, k2);
        double gmax = 0.0;
        for (double v : group) {
            gmax = std::max(gmax, std::fabs(v));
        }
        const double ss = std::clamp(std::ceil(gmax / (b.coarse_scale * intmax)), 1.0, ss_max);
        b.sub_scales[g] = static_cast<std::int32_t>(ss);
        const double step = b.coarse_scale * ss;
        for (std::size_t j = 0; j < k2; ++j) {
            b.codes[g * k2 + j] = round_saturate(group[j] / step, element_bits);
        }
    }
    return b;
}

std::vector<double> vsq_dequantize(const VsqBlock& block) {
    std::vector<double> out(block.codes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = block.coarse_scale * block.sub_scales[i / block.k2] * block.codes[i];
    }
    return out;
}

double software_format_max(const FormatPreset& p) {
    switch (p.family) {
    case FormatFamily::Bdr: return 2.0 - std::ldexp(1.0, 1 - p.cfg.m);
    case FormatFamily::Int: return std::ldexp(1.0, p.int_bits() - 1) - 1.0;
    case FormatFamily::Fp8: return fp8_layout(*p.fp8).max_finite;
    case FormatFamily::Vsq:
        return (std::ldexp(1.0, p.int_bits() - 1) - 1.0) * (std::ldexp(1.0, p.cfg.d2) - 1.0);
    }
    return 1.0;
}

bool uses_delayed_scale(const FormatPreset& p) noexcept { return p.policy == ScalingPolicy::PerTensorSwDelayed; }

double next_delayed_scale(ScaleState& state, double current_amax, double format_max) {
    const double s = state.empty() ? (current_amax > 0.0 ? current_amax / format_max : 1.0) : state.scale(format_max);
    state.observe(current_amax);
    return s;
}

void fake_quantize(const FormatPreset& p, std::span<const double> x, std::span<double> out, double software_scale) {
    if (out.size() != x.size()) {
        throw std::invalid_argument("fake_quantize: output size mismatch");
    }
    const bool delayed = uses_delayed_scale(p);
    if (delayed && (!(software_scale > 0.0) || !std::isfinite(software_scale))) {
        throw std::invalid_argument("software scale must be finite and positive");
    }
    const double top = software_format_max(p);

    switch (p.family) {
    case FormatFamily::Bdr:
        if (p.policy == ScalingPolicy::PerBlockHw) {
            fake_quantize(x, p.cfg, out);
        } else if (p.policy == ScalingPolicy::PerTensorSwDelayed) {
            std::vector<double> scaled(x.size());
            std::transform(x.begin(), x.end(), scaled.begin(), [&](double v) { return v / software_scale; });
            fake_quantize(scaled, p.cfg, out);
            std::transform(out.begin(), out.end(), out.begin(), [&](double v) { return v * software_scale; });
        } else {
            validate_codec(p.cfg);
            std::vector<double> scaled(p.cfg.k1);
            over_chunks(x, out, p.cfg.k1, [&](std::span<const double> in, std::span<double> o) {
                const double a = abs_max(in);
                if (a == 0.0) {
                    std::fill(o.begin(), o.end(), 0.0);
                    return;
                }
                const double s = a / top;
                std::transform(in.begin(), in.end(), scaled.begin(), [s](double v) { return v / s; });
                fake_quantize_block(scaled, p.cfg, o);
                std::transform(o.begin(), o.end(), o.begin(), [s](double v) { return v * s; });
            });
        }
        return;
    case FormatFamily::Int:
        if (delayed) {
            fake_int(x, out, p.int_bits(), software_scale);
        } else {
            over_chunks(x, out, p.cfg.k1, [&](std::span<const double> in, std::span<double> o) {
                fake_int(in, o, p.int_bits(), max_scale(in, p.int_bits()));
            });
        }
        return;
    case FormatFamily::Fp8:
        if (delayed) {
            fake_fp8(x, out, *p.fp8, software_scale);
        } else {
            over_chunks(x, out, p.cfg.k1, [&](std::span<const double> in, std::span<double> o) {
                const double a = abs_max(in);
                fake_fp8(in, o, *p.fp8, a > 0.0 ? a / top : 1.0);
            });
        }
        return;
    case FormatFamily::Vsq:
        over_chunks(x, out, p.cfg.k1, [&](std::span<const double> in, std::span<double> o) {
            fake_vsq(in, o, p, delayed ? std::optional<double>(software_scale) : std::nullopt);
        });
        return;
    }
}

Tensor fake_quantize_tensor(const FormatPreset& p, const Tensor& t, std::size_t axis) {
    if (t.rank() == 0 || t.size() == 0) {
        throw std::invalid_argument("cannot quantize an empty tensor");
    }
    if (axis >= t.rank()) {
        throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for rank " +
                                    std::to_string(t.rank()));
    }
    if (p.family == FormatFamily::Bdr && p.policy == ScalingPolicy::PerBlockHw) {
        return dequantize(quantize_tensor_along_axis(t, axis, p.cfg));
    }
    const double amax = abs_max(t.data);
    const double s = amax > 0.0 ? amax / software_format_max(p) : 1.0;
    Tensor out = t;
    std::vector<double> q;
    for_each_fiber(out, axis, [&](std::span<double> fiber) {
        q.resize(fiber.size());
        fake_quantize(p, fiber, q, s);
        std::copy(q.begin(), q.end(), fiber.begin());
    });
    return out;
}

}  // namespace bdr
