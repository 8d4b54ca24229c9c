#include "specdim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace specdim::harness {

namespace {

std::vector<std::size_t> window_indices(const Trajectory& traj, Window w, std::size_t cap = 64) {
    if (w.lo < 2) throw ValidationError("windows start at k >= 2");
    if (w.hi <= w.lo) throw ValidationError("empty check window");
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < traj.k.size(); ++j)
        if (traj.k[j] >= double(w.lo) && traj.k[j] <= double(w.hi)) idx.push_back(j);
    if (idx.empty()) throw ValidationError("window contains no stored points");
    if (idx.size() <= cap) return idx;
    // geometric subsample
    std::vector<std::size_t> out;
    const double lo = traj.k[idx.front()], hi = traj.k[idx.back()];
    const double ratio = std::pow(hi / lo, 1.0 / double(cap - 1));
    double target = lo;
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < cap; ++s, target *= ratio) {
        while (cursor + 1 < idx.size() && traj.k[idx[cursor]] < target) ++cursor;
        if (out.empty() || out.back() != idx[cursor]) out.push_back(idx[cursor]);
    }
    return out;
}

}  // namespace

Trajectory ratio_curve(const Trajectory& traj, const Equivalent& eq) {
    Trajectory out;
    out.meta = traj.meta;
    out.meta.algorithm = traj.meta.algorithm + "_ratio";
    for (std::size_t j = 0; j < traj.k.size(); ++j) {
        if (traj.k[j] < 2.0) continue;
        const double pred = eq.eval(traj.k[j]);
        if (pred == 0.0) throw ValidationError("prediction vanishes on the ratio window");
        out.k.push_back(traj.k[j]);
        out.value.push_back(traj.value[j] / pred);
        if (!traj.stderr_.empty()) out.stderr_.push_back(traj.stderr_[j] / std::abs(pred));
    }
    if (out.k.empty()) throw ValidationError("no points with k >= 2 for the ratio");
    return out;
}

std::pair<double, double> fit_slope(const Trajectory& traj, Window w, bool log_correction) {
    const auto idx = window_indices(traj, w);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t j : idx) {
        if (!(traj.value[j] > 0.0))
            throw ValidationError("slope fit requires positive values on the window");
        const double x = std::log(traj.k[j]);
        double y = std::log(traj.value[j]);
        if (log_correction) y -= std::log(std::log(traj.k[j]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw ValidationError("slope fit needs at least two points");
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {-slope, std::exp(intercept)};
}

std::vector<double> cesaro(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += v[i];
        out[i] = s / double(i + 1);
    }
    return out;
}

double window_median(const Trajectory& traj, Window w) {
    const auto idx = window_indices(traj, w);
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (std::size_t j : idx) vals.push_back(traj.value[j]);
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

double oscillation_amplitude(const Trajectory& traj, Window w) {
    double mn = 0.0, mx = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < traj.k.size(); ++j) {
        if (traj.k[j] < double(w.lo) || traj.k[j] > double(w.hi)) continue;
        if (first) {
            mn = mx = traj.value[j];
            first = false;
        } else {
            mn = std::min(mn, traj.value[j]);
            mx = std::max(mx, traj.value[j]);
        }
    }
    if (first) throw ValidationError("window contains no stored points");
    return 0.5 * (mx - mn);
}

RateCheck check_ratio_median(std::string name, const Trajectory& traj, const Equivalent& eq,
                             Window w, double tol) {
    RateCheck c;
    c.name = std::move(name);
    c.metric = "ratio_to_one";
    c.window = w;
    c.tolerance = tol;
    c.target = 1.0;
    c.observed = window_median(ratio_curve(traj, eq), w);
    c.passed = std::abs(c.observed - 1.0) <= tol;
    return c;
}

RateCheck check_cesaro_ratio(std::string name, const Trajectory& traj, const Equivalent& eq,
                             double tol) {
    RateCheck c;
    c.name = std::move(name);
    c.metric = "cesaro";
    c.tolerance = tol;
    c.target = 1.0;
    const Trajectory r = ratio_curve(traj, eq);
    c.window = {2, static_cast<std::int64_t>(r.k.back())};
    c.observed = cesaro(r.value).back();
    c.passed = std::abs(c.observed - 1.0) <= tol;
    return c;
}

RateCheck check_slope(std::string name, const Trajectory& traj, Window w, double target,
                      double tol, bool log_correction) {
    RateCheck c;
    c.name = std::move(name);
    c.metric = "slope";
    c.window = w;
    c.tolerance = tol;
    c.target = target;
    c.observed = fit_slope(traj, w, log_correction).first;
    c.passed = std::abs(c.observed - target) <= tol;
    return c;
}

RateCheck check_min_amplitude(std::string name, const Trajectory& traj, const Equivalent& eq,
                              Window w, double min_amp) {
    RateCheck c;
    c.name = std::move(name);
    c.metric = "oscillation_amplitude";
    c.window = w;
    c.tolerance = min_amp;
    c.target = min_amp;
    c.observed = oscillation_amplitude(ratio_curve(traj, eq), w);
    c.passed = c.observed >= min_amp;
    return c;
}

RateCheck check_constant_limit(std::string name, const Trajectory& traj, double target,
                               double rel_tol) {
    RateCheck c;
    c.name = std::move(name);
    c.metric = "constant_limit";
    c.window = {2, static_cast<std::int64_t>(traj.k.back())};
    c.tolerance = rel_tol;
    c.target = target;
    c.observed = traj.value.back();
    c.passed = std::abs(c.observed - target) <= rel_tol * std::abs(target);
    return c;
}

std::uint64_t fnv1a(std::span<const char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char b : bytes) {
        h ^= static_cast<unsigned char>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(std::span<const char>(s.data(), s.size())); }

std::uint64_t emit_csv(const Trajectory& traj, const std::filesystem::path& path,
                       const Equivalent* prediction) {
    std::ostringstream os;
    os << "k,value";
    const bool has_se = !traj.stderr_.empty();
    if (has_se) os << ",stderr";
    if (prediction) os << ",ratio,prediction";
    os << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t j = 0; j < traj.k.size(); ++j) {
        os << static_cast<long long>(traj.k[j]) << ",";
        put(traj.value[j]);
        if (has_se) {
            os << ",";
            put(traj.stderr_[j]);
        }
        if (prediction) {
            const double p = traj.k[j] >= 2.0 ? prediction->eval(traj.k[j]) : 0.0;
            os << ",";
            put(p != 0.0 ? traj.value[j] / p : 0.0);
            os << ",";
            put(p);
        }
        os << "\n";
    }
    const std::string text = os.str();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
    return fnv1a(text);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& config_text, std::uint64_t seed,
                    const std::vector<ManifestEntry>& entries) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config_hash"] = fnv1a(config_text);
    j["seed"] = seed;
    auto files = nlohmann::json::array();
    for (const auto& e : entries) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(e.content_id));
        files.push_back({{"file", e.file}, {"content_id", hex}});
    }
    j["files"] = files;
    std::ofstream f(dir / "manifest.json");
    if (!f) throw IoError("cannot write manifest in " + dir.string());
    f << j.dump(2) << "\n";
}

namespace {

const char* kPlotScript = R"(#!/usr/bin/env python3
"""Log-log plot of the CSVs written next to this script."""
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
fig, (ax_v, ax_r) = plt.subplots(1, 2, figsize=(11, 4))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    ks = [float(r["k"]) for r in rows if float(r["k"]) >= 2]
    vals = [float(r["value"]) for r in rows if float(r["k"]) >= 2]
    label = os.path.splitext(os.path.basename(path))[0]
    ax_v.loglog(ks, vals, label=label)
    if rows and "prediction" in rows[0]:
        preds = [float(r["prediction"]) for r in rows if float(r["k"]) >= 2]
        ax_v.loglog(ks, preds, "--", alpha=0.6)
        ax_r.semilogx(ks, [v / p if p else float("nan") for v, p in zip(vals, preds)],
                      label=label)
ax_v.set_xlabel("k"); ax_v.set_ylabel("value"); ax_v.legend(fontsize=7)
ax_r.set_xlabel("k"); ax_r.set_ylabel("value / prediction"); ax_r.axhline(1.0, color="k", lw=0.5)
fig.tight_layout()
out = os.path.join(here, "figure.png")
fig.savefig(out, dpi=150)
print(out)
)";

PowerLawSpectrum figure_spectrum(double alpha, double beta, double gamma_l, std::size_t n,
                                 double l = 1.0) {
    PowerLawSpectrum s;
    s.alpha = alpha;
    s.beta = beta;
    s.gamma_l = gamma_l;
    s.l_top = l;
    s.n_modes = n;
    return s;
}

Trajectory subsample_log(const Trajectory& t) {
    if (!t.dense()) return t;
    Trajectory out;
    out.meta = t.meta;
    for (std::int64_t k : log_k_grid(static_cast<std::int64_t>(t.k.back()))) {
        out.k.push_back(double(k));
        out.value.push_back(t.value[k]);
        if (!t.stderr_.empty()) out.stderr_.push_back(t.stderr_[k]);
    }
    return out;
}

}  // namespace

std::vector<std::string> figure(const std::string& name, const FigureOptions& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::vector<ManifestEntry> entries;
    std::vector<std::string> written;
    auto emit = [&](const Trajectory& t, const std::string& file, const Equivalent* eq) {
        const auto id = emit_csv(subsample_log(t), opt.out_dir / file, eq);
        entries.push_back({file, id});
        written.push_back(file);
    };
    std::ostringstream cfg;
    cfg << "figure=" << name << " steps=" << opt.steps << " seed=" << opt.seed;

    if (name == "nesterov") {
        const std::int64_t K = opt.steps > 0 ? opt.steps : 20000;
        for (auto [beta, tag] : {std::pair{0.5, "omega0.75"}, {1.0, "omega1"}, {2.0, "omega1.5"}}) {
            IterationConfig c;
            c.algorithm = Algorithm::nesterov;
            c.spectrum = figure_spectrum(2.0, beta, 0.5, 60000);
            c.steps = K;
            c.tail_correction = true;
            const Trajectory t = run_nesterov(c);
            const Equivalent eq = eq_nesterov(spectral_dimension(c.spectrum), 1.0);
            emit(t, std::string("nesterov_") + tag + ".csv", &eq);
        }
    } else if (name == "heavyball") {
        const std::int64_t K = opt.steps > 0 ? opt.steps : 20000;
        for (auto [beta, tag] : {std::pair{0.5, "omega0.75"}, {2.0, "omega1.5"}}) {
            IterationConfig c;
            c.algorithm = Algorithm::heavy_ball;
            c.spectrum = figure_spectrum(2.0, beta, 0.5, 40000);
            c.steps = K;
            c.tail_correction = true;
            const Trajectory t = run_heavy_ball(c);
            const Equivalent eq = eq_heavy_ball(c.spectrum);
            emit(t, std::string("heavyball_") + tag + ".csv", &eq);
        }
    } else if (name == "nesterov_rho") {
        const std::int64_t K = opt.steps > 0 ? opt.steps : 20000;
        for (double rho : {1.0, 2.0, 3.0}) {
            IterationConfig c;
            c.algorithm = Algorithm::nesterov;
            c.rho = rho;
            c.spectrum = figure_spectrum(2.0, 5.0, 0.5, 8000);
            c.steps = K;
            c.tail_correction = true;
            const Trajectory t = run_nesterov(c);
            const Equivalent eq = eq_nesterov(spectral_dimension(c.spectrum), rho);
            std::ostringstream tag;
            tag << "nesterov_rho" << rho << ".csv";
            emit(t, tag.str(), &eq);
        }
    } else if (name == "noise") {
        const std::int64_t K = opt.steps > 0 ? opt.steps : 20000;
        for (auto [bp, tag] : {std::pair{0.0, "isotropic"}, {2.0, "lsq"}}) {
            IterationConfig c;
            c.algorithm = Algorithm::nesterov;
            c.spectrum = figure_spectrum(2.0, 2.0, 0.5, 30000);
            c.spectrum.delta = 0.0;
            c.steps = K;
            c.tail_correction = true;
            c.noise = NoiseConfig{bp, 1.0, false, 1, std::nullopt};
            const Trajectory t = run_nesterov_noisy(c);
            const Equivalent eq = eq_nesterov_noise_var(c.spectrum, bp, 1.0);
            emit(t, std::string("noise_") + tag + ".csv", &eq);
        }
    } else if (name == "lms") {
        const std::int64_t K = opt.steps > 0 ? opt.steps : 20000;
        for (auto [beta, tag] : {std::pair{1.0, "omega1"}, {1.5, "omega1.25"}, {4.0, "omega2.5"}}) {
            LmsConfig c;
            c.d = 2000;
            c.alpha = 2.0;
            c.beta = beta;
            c.gamma = 0.6;
            c.kurtosis = -2.0;
            const Trajectory t = evolve_expected(c, K);
            const Equivalent eq = eq_lms_bias(c);
            emit(t, std::string("lms_exact_") + tag + ".csv", &eq);
            LmsConfig mc = c;
            mc.d = 200;
            mc.replications = 20;
            mc.seed = opt.seed;
            const Trajectory tm = run_lms_mc(mc, K);
            emit(tm, std::string("lms_mc_") + tag + ".csv", &eq);
        }
    } else {
        throw ValidationError("unknown figure name: " + name);
    }

    {
        std::ofstream f(opt.out_dir / "plot.py");
        if (!f) throw IoError("cannot write plot script");
        f << kPlotScript;
        entries.push_back({"plot.py", fnv1a(std::string(kPlotScript))});
        written.push_back("plot.py");
    }
    write_manifest(opt.out_dir, "figure " + name, cfg.str(), opt.seed, entries);
    written.push_back("manifest.json");
    return written;
}

}  // namespace specdim::harness
