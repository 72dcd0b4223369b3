// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "bdr/csv.hpp"

namespace bdr {

namespace {

constexpr const char* kCheckpointTag = "# sweep ";

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? " " : "") << v[i];
    }
    return os.str();
}

std::string mx_name(const BdrConfig& cfg) {
    if (cfg.d1 == 8 && cfg.d2 == 1 && cfg.k1 == 16 && cfg.k2 == 2) {
        switch (cfg.m) {
        case 7: return "MX9";
        case 4: return "MX6";
        case 2: return "MX4";
        default: break;
        }
    }
    return {};
}

std::map<std::string, CostPoint> read_checkpoint(const std::string& path, const std::string& fingerprint,
                                                 std::vector<std::string>& warnings) {
    std::map<std::string, CostPoint> done;
    std::ifstream in(path);
    if (!in) {
        return done;
    }
    std::string first;
    std::getline(in, first);
    if (first != kCheckpointTag + fingerprint) {
        warnings.push_back("checkpoint " + path + " belongs to a different sweep; starting over");
        return done;
    }
    std::stringstream rest;
    rest << in.rdbuf();
    std::vector<CostPoint> rows;
    try {
        rows = read_cost_points(rest);
    } catch (const DataError& e) {
        warnings.push_back("checkpoint " + path + " unreadable (" + e.what() + "); starting over");
        return done;
    }
    for (auto& p : rows) {
        done.emplace(p.name, p);
    }
    return done;
}

}  // namespace

const std::vector<std::string>& baseline_preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n = {"INT8", "INT4", "FP8-E4M3", "FP8-E5M2", "MSFP12", "MSFP16"};
        for (int bits : {4, 6, 8}) {
            for (int d2 : {4, 6, 8, 10}) {
                n.push_back("VSQ(" + std::to_string(bits) + "," + std::to_string(d2) + ")");
            }
        }
        return n;
    }();
    return names;
}

SweepPlan plan_sweep(const SweepSpec& spec) {
    SweepPlan plan;
    for (int m : spec.m) {
        for (int d2 : spec.d2) {
            for (std::size_t k1 : spec.k1) {
                for (std::size_t k2 : spec.k2) {
                    const BdrConfig cfg{m, 8, d2, k1, k2, ScaleKind::PowerOfTwo,
                                        d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo};
                    for (ScalingPolicy policy : spec.policies) {
                        try {
                            FormatPreset p = bdr_preset(cfg, policy);
                            if (spec.r % k1 != 0) {
                                throw std::invalid_argument("k1 does not divide the reduction length " +
                                                            std::to_string(spec.r));
                            }
                            const std::string mx = mx_name(cfg);
                            if (policy == ScalingPolicy::PerBlockHw && !mx.empty()) {
                                p.name = mx;
                            }
                            plan.presets.push_back(std::move(p));
                        } catch (const std::invalid_argument& e) {
                            plan.warnings.push_back("skipping " + bdr_name(cfg, policy) + ": " + e.what());
                        }
                    }
                }
            }
        }
    }
    if (spec.baselines) {
        for (const auto& name : baseline_preset_names()) {
            plan.presets.push_back(preset(name));
        }
    }
    return plan;
}

std::string sweep_fingerprint(const SweepSpec& spec) {
    std::ostringstream os;
    os << "m=" << join(spec.m) << "; d2=" << join(spec.d2) << "; k1=" << join(spec.k1) << "; k2=" << join(spec.k2)
       << "; policies=";
    for (ScalingPolicy p : spec.policies) {
        os << to_string(p) << ' ';
    }
    const DistributionSpec& d = spec.dist;
    os << "; baselines=" << spec.baselines << "; dist=" << to_string(d.kind) << '(' << format_double(d.sigma) << ','
       << format_double(d.mu) << ',' << format_double(d.low) << ',' << format_double(d.high) << ','
       << format_double(d.big) << ',' << format_double(d.small) << ',' << format_double(d.ratio)
       << "); seed=" << d.seed << "; n=" << spec.n_vectors << "; len=" << spec.vec_len << "; r=" << spec.r
       << "; pooled=" << spec.pooled;
    return os.str();
}

SweepResult run_sweep(const SweepSpec& spec, const SweepIo& io) {
    SweepPlan plan = plan_sweep(spec);
    SweepResult res;
    res.planned = plan.presets.size() + plan.warnings.size();
    res.skipped = plan.warnings.size();
    res.warnings = std::move(plan.warnings);
    const std::string fingerprint = sweep_fingerprint(spec);

    std::map<std::string, CostPoint> done;
    std::ofstream ckpt;
    if (!io.checkpoint_path.empty()) {
        done = read_checkpoint(io.checkpoint_path, fingerprint, res.warnings);
        if (done.empty()) {
            ckpt.open(io.checkpoint_path, std::ios::trunc);
            ckpt << kCheckpointTag << fingerprint << '\n';
            write_cost_points(ckpt, {});
        } else {
            ckpt.open(io.checkpoint_path, std::ios::app);
        }
        if (!ckpt) {
            throw DataError("cannot write checkpoint " + io.checkpoint_path);
        }
    }
    if (io.progress != nullptr) {
        *io.progress << "sweep: " << plan.presets.size() << " configurations (" << res.skipped << " skipped, "
                     << done.size() << " from checkpoint)\n";
    }

    Dataset data;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < plan.presets.size(); ++i) {
        const FormatPreset& p = plan.presets[i];
        if (auto it = done.find(p.name); it != done.end()) {
            res.rows.push_back(it->second);
            ++res.resumed;
            continue;
        }
        CostPoint point;
        try {
            point = make_cost_point(p, 0.0, spec.r, io.area_table);
        } catch (const DataError& e) {
            res.warnings.push_back("skipping " + p.name + ": " + e.what());
            ++res.skipped;
            continue;
        }
        if (data.n_vectors == 0) {
            data = make_dataset(spec.dist, spec.n_vectors, spec.vec_len, spec.threads);
        }
        point.qsnr_db = estimate_qsnr(p, data, {spec.pooled, spec.threads}).mean_db;
        res.rows.push_back(point);
        if (ckpt.is_open()) {
            write_csv_row(ckpt, std::vector<std::string>{point.name, format_double(point.qsnr_db),
                                                         format_double(point.area), format_double(point.mem_cost),
                                                         format_double(point.combined)});
            ckpt.flush();
        }
        if (io.progress != nullptr) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            *io.progress << '[' << (i + 1) << '/' << plan.presets.size() << "] " << p.name << ' '
                         << format_double(point.qsnr_db) << " dB (" << static_cast<long>(secs) << " s)\n";
        }
    }
    for (const auto& w : res.warnings) {
        if (io.progress != nullptr) {
            *io.progress << "warning: " << w << '\n';
        }
    }
    if (ckpt.is_open()) {
        ckpt.close();
        std::error_code ec;
        std::filesystem::remove(io.checkpoint_path, ec);
    }
    return res;
}

}  // namespace bdr
