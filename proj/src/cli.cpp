// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bdr/cost.hpp"
#include "bdr/csv.hpp"
#include "bdr/dot.hpp"
#include "bdr/fidelity.hpp"
#include "bdr/formats.hpp"
#include "bdr/sweep.hpp"
#include "bdr/tensor_file.hpp"

namespace bdr {

namespace {

using nlohmann::json;

json db_json(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

struct DistOptions {
    std::string kind = "gaussian-variable-variance";
    DistributionSpec spec;

    void attach(CLI::App* app) {
        app->add_option("--dist", kind, "distribution kind")->capture_default_str();
        app->add_option("--sigma", spec.sigma, "gaussian-fixed / lognormal sigma")->capture_default_str();
        app->add_option("--mu", spec.mu, "lognormal mu")->capture_default_str();
        app->add_option("--low", spec.low, "uniform lower bound")->capture_default_str();
        app->add_option("--high", spec.high, "uniform upper bound")->capture_default_str();
        app->add_option("--big", spec.big, "adversarial large magnitude")->capture_default_str();
        app->add_option("--small", spec.small, "adversarial small magnitude")->capture_default_str();
        app->add_option("--ratio", spec.ratio, "adversarial share of large elements")->capture_default_str();
        app->add_option("--seed", spec.seed, "random seed")->capture_default_str();
    }

    DistributionSpec resolve() const {
        DistributionSpec s = spec;
        s.kind = parse_distribution_kind(kind);
        return s;
    }
};

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) {
        throw DataError("cannot write '" + path + "'");
    }
    f << j.dump(2) << '\n';
}

// --- quantize ----------------------------------------------------------------

struct QuantizeArgs {
    std::string input;
    std::string output;
    std::string preset_name;
    std::size_t axis = 0;
    std::string report;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
    const FormatPreset p = preset(a.preset_name);
    const Tensor t = read_tensor_file(a.input);
    const Tensor q = fake_quantize_tensor(p, t, a.axis);
    write_tensor_file(a.output, q);

    double max_err = 0.0;
    bool zero = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        max_err = std::max(max_err, std::fabs(q.data[i] - t.data[i]));
        zero = zero && t.data[i] == 0.0;
    }
    json report{{"preset", p.name}, {"axis", a.axis}, {"max_abs_err", max_err}};
    report["qsnr_db"] = zero ? json(nullptr) : db_json(qsnr(t.data, q.data));
    out << report.dump() << '\n';
    if (!a.report.empty()) {
        write_json_file(a.report, report);
    }
    return kExitOk;
}

// --- qsnr --------------------------------------------------------------------

struct QsnrArgs {
    std::string preset_name;
    DistOptions dist;
    std::size_t n = 10000;
    std::size_t len = 1024;
    std::size_t window = 1024;
    bool pooled = false;
    unsigned threads = 0;
};

int cmd_qsnr(const QsnrArgs& a, std::ostream& out) {
    FormatPreset p = preset(a.preset_name);
    p.window = a.window;
    const DistributionSpec d = a.dist.resolve();
    const QsnrReport r = estimate_qsnr(p, d, a.n, a.len, {a.pooled, a.threads});
    const std::vector<std::string> header{"format", "distribution", "n", "len", "mean_db", "std_db", "seed"};
    const std::vector<std::string> row{p.name,
                                       to_string(d.kind),
                                       std::to_string(r.n_vectors),
                                       std::to_string(r.vec_len),
                                       format_double(r.mean_db),
                                       format_double(r.std_db),
                                       std::to_string(d.seed)};
    write_csv_row(out, header);
    write_csv_row(out, row);
    return kExitOk;
}

// --- bound -------------------------------------------------------------------

struct BoundArgs {
    std::string preset_name;
    int m = 7;
    int d2 = 1;
    std::size_t k1 = 16;
    std::size_t k2 = 2;
    std::size_t n = 1024;
};

int cmd_bound(const BoundArgs& a, std::ostream& out) {
    BdrConfig cfg{a.m, 8, a.d2, a.k1, a.k2, ScaleKind::PowerOfTwo,
                  a.d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo};
    if (!a.preset_name.empty()) {
        const FormatPreset p = preset(a.preset_name);
        if (p.family != FormatFamily::Bdr) {
            throw std::invalid_argument("the bound applies to block formats; " + p.name + " is not one");
        }
        cfg = p.cfg;
    }
    out << std::fixed << std::setprecision(4) << theorem1_bound(bound_params(cfg, a.n)) << '\n';
    return kExitOk;
}

// --- dot ---------------------------------------------------------------------

struct DotArgs {
    std::string preset_name = "MX9";
    std::string a_path;
    std::string b_path;
    std::size_t r = 64;
    int f = 0;
    int guard = -1;
    DistOptions dist;
};

std::vector<double> dot_operand(const DotArgs& a, const std::string& path, std::uint64_t index) {
    if (!path.empty()) {
        const Tensor t = read_tensor_file(path);
        return t.data;
    }
    return sample_vector(a.dist.resolve(), a.r, index);
}

int cmd_dot(DotArgs a, std::ostream& out) {
    const FormatPreset p = preset(a.preset_name);
    if (p.family != FormatFamily::Bdr) {
        throw std::invalid_argument("the dot pipeline models block formats; " + p.name + " is not one");
    }
    if (a.a_path.empty() != a.b_path.empty()) {
        throw std::invalid_argument("--a and --b must be given together");
    }
    const auto x = dot_operand(a, a.a_path, 0);
    const auto y = dot_operand(a, a.b_path, 1);
    if (x.size() != y.size()) {
        throw DataError("operands have different lengths");
    }
    a.r = x.size();
    const DotConfig dc{p.cfg, a.r, a.f, a.guard};
    const DotResult res = mx_dot(x, y, dc);
    std::vector<double> xq(x.size());
    std::vector<double> yq(y.size());
    fake_quantize(x, p.cfg, xq);
    fake_quantize(y, p.cfg, yq);
    const json report{{"preset", p.name},
                      {"r", a.r},
                      {"f", dc.accumulator_width()},
                      {"guard", dc.guard_bits()},
                      {"value", res.value},
                      {"overflow", res.overflow},
                      {"reference_quantized", reference_dot(xq, yq)},
                      {"reference_exact", reference_dot(x, y)}};
    out << report.dump() << '\n';
    return kExitOk;
}

// --- sweep -------------------------------------------------------------------

struct SweepArgs {
    SweepSpec spec;
    DistOptions dist;
    std::vector<std::string> policies;
    bool no_baselines = false;
    std::string out_path;
    std::string area_table;
    bool quiet = false;
};

ScalingPolicy parse_policy_name(const std::string& s) {
    if (s == "hw") return ScalingPolicy::PerBlockHw;
    if (s == "swblock") return ScalingPolicy::PerCoarseBlockSw;
    if (s == "swdelayed") return ScalingPolicy::PerTensorSwDelayed;
    throw std::invalid_argument("unknown scaling policy '" + s + "' (hw, swblock, swdelayed)");
}

int cmd_sweep(SweepArgs a, std::ostream& out, std::ostream& err) {
    a.spec.dist = a.dist.resolve();
    a.spec.baselines = !a.no_baselines;
    if (!a.policies.empty()) {
        a.spec.policies.clear();
        for (const auto& s : a.policies) {
            a.spec.policies.push_back(parse_policy_name(s));
        }
    }
    std::optional<AreaTable> table;
    if (!a.area_table.empty()) {
        table = AreaTable::load(a.area_table);
    }
    SweepIo io;
    io.checkpoint_path = a.out_path + ".ckpt";
    io.area_table = table ? &*table : nullptr;
    io.progress = a.quiet ? nullptr : &err;
    const SweepResult res = run_sweep(a.spec, io);

    std::ofstream f(a.out_path);
    if (!f) {
        throw DataError("cannot write '" + a.out_path + "'");
    }
    write_cost_points(f, res.rows);
    out << "wrote " << res.rows.size() << " rows to " << a.out_path << " (" << res.skipped << " skipped, "
        << res.resumed << " resumed)\n";
    return kExitOk;
}

// --- pareto ------------------------------------------------------------------

int cmd_pareto(const std::string& in_path, const std::string& out_path, std::ostream& out, std::ostream& err) {
    std::ifstream in(in_path);
    if (!in) {
        throw DataError("cannot open '" + in_path + "'");
    }
    const auto points = read_cost_points(in);
    if (points.empty()) {
        throw DataError("no cost points in '" + in_path + "'");
    }
    const auto front = pareto_frontier(points);
    if (out_path.empty()) {
        write_cost_points(out, front);
    } else {
        std::ofstream f(out_path);
        if (!f) {
            throw DataError("cannot write '" + out_path + "'");
        }
        write_cost_points(f, front);
    }
    err << "frontier: " << front.size() << " of " << points.size() << " points\n";
    return kExitOk;
}

// --- verify ------------------------------------------------------------------

constexpr double kSlopeTarget = 6.02;
constexpr double kSlopeTolerance = 0.5;

int cmd_verify(const DominanceOptions& opts, std::ostream& out) {
    const DominanceReport rep = verify_bound_dominance(opts);
    out << "bound dominance: " << rep.configs << " configs x " << rep.distributions << " distributions, "
        << rep.measurements << " vectors, " << rep.violations << " violations, worst margin "
        << format_double(rep.worst_margin_db) << " dB\n";
    for (const auto& f : rep.failures) {
        out << "  violation: " << f << '\n';
    }
    const bool bound_ok = std::fabs(rep.bound_slope - kSlopeTarget) <= kSlopeTolerance;
    const bool measured_ok = std::fabs(rep.measured_slope - kSlopeTarget) <= kSlopeTolerance;
    out << "mantissa slope: bound " << format_double(rep.bound_slope) << " dB/bit, measured "
        << format_double(rep.measured_slope) << " dB/bit\n";
    const bool ok = rep.violations == 0 && bound_ok && measured_ok;
    out << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
    return ok ? kExitOk : kExitData;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Block data representation laboratory", "bdrlab"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: BDR_THREADS or all cores)");

    QuantizeArgs qa;
    auto* quantize = app.add_subcommand("quantize", "direct-cast a tensor file and report fidelity");
    quantize->add_option("--input,-i", qa.input, "input tensor file")->required();
    quantize->add_option("--output,-o", qa.output, "output tensor file")->required();
    quantize->add_option("--preset,-p", qa.preset_name, "format preset")->required();
    quantize->add_option("--axis", qa.axis, "reduction axis")->capture_default_str();
    quantize->add_option("--report", qa.report, "also write the JSON report here");

    QsnrArgs sa;
    auto* qsnr_cmd = app.add_subcommand("qsnr", "estimate QSNR of a preset over sampled vectors");
    qsnr_cmd->add_option("--preset,-p", sa.preset_name, "format preset")->required();
    qsnr_cmd->add_option("--n", sa.n, "number of vectors")->capture_default_str()->check(CLI::PositiveNumber);
    qsnr_cmd->add_option("--len", sa.len, "vector length")->capture_default_str()->check(CLI::PositiveNumber);
    qsnr_cmd->add_option("--window", sa.window, "delayed-scaling window")->capture_default_str()->check(
        CLI::PositiveNumber);
    qsnr_cmd->add_flag("--pooled", sa.pooled, "pool noise and signal energy before the log");
    sa.dist.attach(qsnr_cmd);

    BoundArgs ba;
    auto* bound = app.add_subcommand("bound", "evaluate the QSNR lower bound");
    bound->add_option("--preset,-p", ba.preset_name, "block format preset (overrides raw parameters)");
    bound->add_option("--m", ba.m, "mantissa bits")->capture_default_str();
    bound->add_option("--d2", ba.d2, "sub-scale bits")->capture_default_str();
    bound->add_option("--k1", ba.k1, "block size")->capture_default_str();
    bound->add_option("--k2", ba.k2, "sub-block size")->capture_default_str();
    bound->add_option("--n", ba.n, "vector length")->capture_default_str();

    DotArgs da;
    auto* dot = app.add_subcommand("dot", "run the fixed-point dot-product model");
    dot->add_option("--preset,-p", da.preset_name, "block format preset")->capture_default_str();
    dot->add_option("--a", da.a_path, "first operand tensor file");
    dot->add_option("--b", da.b_path, "second operand tensor file");
    dot->add_option("--r", da.r, "reduction length for sampled operands")->capture_default_str()->check(
        CLI::PositiveNumber);
    dot->add_option("--f", da.f, "accumulator width (0 = default)")->capture_default_str();
    dot->add_option("--guard", da.guard, "accumulator headroom bits (-1 = ceil(log2(r / k1)))")
        ->capture_default_str();
    da.dist.attach(dot);

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "sweep the design space into a cost CSV");
    sweep->add_option("--out,-o", wa.out_path, "output CSV (checkpoint at <out>.ckpt)")->required();
    sweep->add_option("--n", wa.spec.n_vectors, "vectors per configuration")->capture_default_str()->check(
        CLI::PositiveNumber);
    sweep->add_option("--len", wa.spec.vec_len, "vector length")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--m", wa.spec.m, "mantissa bit grid");
    sweep->add_option("--d2", wa.spec.d2, "sub-scale bit grid");
    sweep->add_option("--k1", wa.spec.k1, "block size grid");
    sweep->add_option("--k2", wa.spec.k2, "sub-block size grid");
    sweep->add_option("--policies", wa.policies, "scaling policies: hw swblock swdelayed");
    sweep->add_option("--r", wa.spec.r, "reduction length for the area model")->capture_default_str();
    sweep->add_option("--area-table", wa.area_table, "CSV of measured areas (format,r,area_units)");
    sweep->add_flag("--no-baselines", wa.no_baselines, "skip INT/FP8/MSFP/VSQ reference rows");
    sweep->add_flag("--pooled", wa.spec.pooled, "pooled-energy QSNR");
    sweep->add_flag("--quiet,-q", wa.quiet, "no progress output");
    wa.dist.attach(sweep);

    std::string pin;
    std::string pout;
    auto* pareto = app.add_subcommand("pareto", "extract the Pareto frontier of a cost CSV");
    pareto->add_option("--in,-i", pin, "cost CSV")->required();
    pareto->add_option("--out,-o", pout, "write the frontier here instead of stdout");

    DominanceOptions vo;
    auto* verify = app.add_subcommand("verify", "check measured QSNR against the lower bound");
    verify->add_option("--configs", vo.n_configs, "random configurations")->capture_default_str();
    verify->add_option("--vectors", vo.n_vectors, "vectors per configuration and distribution")
        ->capture_default_str();
    verify->add_option("--len", vo.vec_len, "vector length")->capture_default_str();
    verify->add_option("--slope-vectors", vo.slope_vectors, "vectors for the slope fit")->capture_default_str();
    verify->add_option("--seed", vo.seed, "random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*quantize) return cmd_quantize(qa, out);
        if (*qsnr_cmd) {
            sa.threads = threads;
            return cmd_qsnr(sa, out);
        }
        if (*bound) return cmd_bound(ba, out);
        if (*dot) return cmd_dot(da, out);
        if (*sweep) {
            wa.spec.threads = threads;
            return cmd_sweep(wa, out, err);
        }
        if (*pareto) return cmd_pareto(pin, pout, out, err);
        if (*verify) {
            vo.threads = threads;
            return cmd_verify(vo, out);
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("bdrlab");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bdr
