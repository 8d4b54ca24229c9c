#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace specdim::kernels {

enum class Recursion { nesterov, heavy_ball };

struct RecursionResult {
    std::vector<double> trajectory;  // a_0..a_K, a_k = sum_i w_i b_k(lambda_i)^2
    std::size_t deactivated = 0;
};

/// Dense trajectory of the weighted squared mode recursion. Modes are
/// processed in fixed-size blocks (parallel with OpenMP); per-block partial
/// trajectories combine in a fixed tree order, so the output is bit-identical
/// for any thread count. Deactivation freezes a mode at zero once its |b|
/// running maximum over the last 64 steps falls below 1e-14 of its historical
/// maximum.
RecursionResult mode_recursion_sum(std::span<const double> lambda, std::span<const double> weight,
                                   Recursion rec, double rho, std::int64_t steps,
                                   bool deactivate = true);

/// Single-mode sequence b_0..b_K.
std::vector<double> mode_sequence(double lambda, Recursion rec, double rho, std::int64_t steps);

/// Closed-form weighted sums at selected k: out[j] = sum_i w_i * f(k_j, lambda_i).
/// gd:      f = (1-lambda)^(2k)
/// gd4:     f = (1-lambda)^(4k)
/// avg_gd:  f = ((1 - (1-lambda)^(k+1)) / ((k+1) lambda))^2
/// noise_g: f = (1 - (1-lambda)^(2k)) / (lambda (2-lambda))
enum class Factor { gd, gd4, avg_gd, noise_g };
void factor_sum(std::span<const double> lambda, std::span<const double> weight,
                std::span<const std::int64_t> ks, Factor f, double* out);

/// Second moments of the noisy Nesterov recursion (rho = 1, theta_1 = theta_0):
/// out[k] = sum_i out_weight[i] * E[theta_{k,i}^2] under per-step noise of
/// variance noise_var[i]. init holds theta_0 per mode.
std::vector<double> noisy_nesterov_moments(std::span<const double> lambda,
                                           std::span<const double> init,
                                           std::span<const double> noise_var,
                                           std::span<const double> out_weight,
                                           std::int64_t steps);

/// Unit-noise, lambda = 0 moment sequence (tail correction for the above).
std::vector<double> noisy_nesterov_zero_mode(std::int64_t steps);

/// Serial single-pass references used by the tests and the benchmark.
namespace reference {
RecursionResult mode_recursion_sum(std::span<const double> lambda, std::span<const double> weight,
                                   Recursion rec, double rho, std::int64_t steps);
void factor_sum(std::span<const double> lambda, std::span<const double> weight,
                std::span<const std::int64_t> ks, Factor f, double* out);
std::vector<double> noisy_nesterov_moments(std::span<const double> lambda,
                                           std::span<const double> init,
                                           std::span<const double> noise_var,
                                           std::span<const double> out_weight,
                                           std::int64_t steps);
}  // namespace reference

}  // namespace specdim::kernels
