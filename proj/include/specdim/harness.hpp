#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specdim/asymptotics.hpp"
#include "specdim/iterate.hpp"

namespace specdim::harness {

struct Window {
    std::int64_t lo;
    std::int64_t hi;
};

/// a_k / prediction(k) at the trajectory's stored points with k >= 2.
Trajectory ratio_curve(const Trajectory& traj, const Equivalent& eq);

/// Least-squares fit of log a_k on log k over a geometric subsample (at most
/// 64 points) of the window; returns (p_hat, c_hat) for a ~ c_hat k^-p_hat.
/// With log_correction, log log k is subtracted first (q = 1 assumed).
std::pair<double, double> fit_slope(const Trajectory& traj, Window w, bool log_correction = false);

/// Running average s_k = (1/(k+1)) sum_{i<=k} r_i.
std::vector<double> cesaro(const std::vector<double>& v);

/// Median of stored values with k inside the window (geometric subsample).
double window_median(const Trajectory& traj, Window w);

/// Half peak-to-peak of stored values inside the window.
double oscillation_amplitude(const Trajectory& traj, Window w);

struct RateCheck {
    std::string name;
    std::string metric;  // ratio_to_one | slope | oscillation_amplitude | constant_limit | cesaro
    Window window{2, 0};
    double tolerance = 0.0;
    double target = 0.0;
    double observed = 0.0;
    bool passed = false;
    std::string note;
};

RateCheck check_ratio_median(std::string name, const Trajectory& traj, const Equivalent& eq,
                             Window w, double tol);
/// Cesaro mean of the ratio over all stored k >= 2, evaluated at the end.
RateCheck check_cesaro_ratio(std::string name, const Trajectory& traj, const Equivalent& eq,
                             double tol);
RateCheck check_slope(std::string name, const Trajectory& traj, Window w, double target,
                      double tol, bool log_correction = false);
/// Passes when the ratio amplitude over the window is at least min_amp.
RateCheck check_min_amplitude(std::string name, const Trajectory& traj, const Equivalent& eq,
                              Window w, double min_amp);
/// Passes when the last value matches the target within rel_tol.
RateCheck check_constant_limit(std::string name, const Trajectory& traj, double target,
                               double rel_tol);

/// FNV-1a 64-bit content id.
std::uint64_t fnv1a(std::span<const char> bytes);
std::uint64_t fnv1a(const std::string& s);

/// CSV with header k,value[,stderr][,ratio][,prediction], 17 significant
/// digits. Returns the content id of the written bytes.
std::uint64_t emit_csv(const Trajectory& traj, const std::filesystem::path& path,
                       const Equivalent* prediction = nullptr);

struct ManifestEntry {
    std::string file;
    std::uint64_t content_id;
};
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& config_text, std::uint64_t seed,
                    const std::vector<ManifestEntry>& entries);

struct FigureOptions {
    std::filesystem::path out_dir = "figures";
    std::int64_t steps = 0;  // 0: per-figure default
    std::uint64_t seed = 1;
};

/// Reproduces the data behind one of the five standard figures
/// (nesterov | heavyball | nesterov_rho | noise | lms): trajectory CSVs, a
/// manifest, and a plotting script. Returns the written file names.
std::vector<std::string> figure(const std::string& name, const FigureOptions& opt);

}  // namespace specdim::harness
