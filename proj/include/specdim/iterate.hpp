#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specdim/spectral.hpp"

namespace specdim {

enum class Algorithm { gd, nesterov, heavy_ball, avg_gd };
enum class Criterion { function_value, iterate_norm };

struct NoiseConfig {
    double beta_prime = 0.0;
    double varsigma = 1.0;
    bool monte_carlo = false;
    int replications = 1;
    std::optional<std::uint64_t> seed;
};

struct IterationConfig {
    Algorithm algorithm = Algorithm::gd;
    double rho = 1.0;  // momentum family parameter; any rho > 0
    PowerLawSpectrum spectrum;
    std::int64_t steps = 2;
    Criterion criterion = Criterion::function_value;
    std::optional<NoiseConfig> noise;
    // closed-form algorithms evaluate a log-spaced k grid unless dense is set
    bool dense = false;
    // add the analytic mass of the modes beyond n_modes (their factors are
    // ~1 at the reachable horizons)
    bool tail_correction = false;

    void validate() const;
};

struct TrajectoryMeta {
    std::string algorithm;
    std::string criterion = "function_value";
    double rho = 1.0;
    std::optional<std::uint64_t> seed;
    std::size_t modes = 0;
    std::size_t deactivated_modes = 0;
    double tail_mass_added = 0.0;
    std::string spectrum;
};

/// Performance values a_k at the evaluation points meta carries. stderr_ is
/// filled by Monte Carlo runs only.
struct Trajectory {
    std::vector<double> k;
    std::vector<double> value;
    std::vector<double> stderr_;
    TrajectoryMeta meta;

    bool dense() const;
    /// value at an exact stored k (throws if absent)
    double value_at(std::int64_t kq) const;
    std::size_t index_of(std::int64_t kq) const;
};

/// 0,1,2,...,cap then geometric with at most 60 points per decade, up to K.
std::vector<std::int64_t> log_k_grid(std::int64_t K);

/// a_k = sum_i w_i (1-lambda_i)^(2k); closed form on a k grid (or dense).
Trajectory run_gd(const IterationConfig& cfg);

/// b_0 = b_1 = 1, b_{k+1} = (1-l)[2(k+rho-1) b_k - (k-1) b_{k-1}]/(k+2rho-1);
/// a_k = sum_i w_i b_k(lambda_i)^2, every k.
Trajectory run_nesterov(const IterationConfig& cfg);

/// theta_{k+1} = (1 - l k/(k+2rho-1)) b_k + (k-1)/(k+2rho-1) (b_k - b_{k-1}).
Trajectory run_heavy_ball(const IterationConfig& cfg);

/// Averaged factor m_k = (1-(1-l)^(k+1))/((k+1) l), a_k = sum w_i m_k^2.
Trajectory run_avg_gd(const IterationConfig& cfg);

/// Additive noise on gradient descent: exact expectation in closed form, or
/// Monte Carlo over per-mode AR(1) recursions.
Trajectory run_gd_noisy(const IterationConfig& cfg);

/// Additive noise on Nesterov (rho = 1): exact second-moment propagation or
/// Monte Carlo.
Trajectory run_nesterov_noisy(const IterationConfig& cfg);

/// Random initial coordinates delta_i * r_i with E r^2 = 1, E r^4 = kurt+3;
/// sampling supports kurt = -2 (Rademacher) and 0 (Gaussian). Returns the
/// empirical mean and variance trajectories across replications.
std::pair<Trajectory, Trajectory> run_gd_random_init(const IterationConfig& cfg, double kurtosis,
                                                     int replications, std::uint64_t seed);

/// Closed-form variance of a_k under random initialization.
Trajectory gd_random_init_var_exact(const IterationConfig& cfg, double kurtosis);

/// Richardson extrapolation b_k = (2^a * a_k - a_{floor(k/2)})/(2^a - 1).
Trajectory richardson(const Trajectory& traj, double alpha_exp);

}  // namespace specdim
