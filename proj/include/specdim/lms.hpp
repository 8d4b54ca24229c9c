#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "specdim/iterate.hpp"

namespace specdim {

/// Single-pass least-mean-squares / SGD on the streaming quadratic model
/// with h_i = l_top i^-alpha, initial coordinates delta i^-beta/2, inputs
/// x = sum h_i^(1/2) z_i u_i with unit-variance z of excess kurtosis
/// `kurtosis`, and observation noise of variance varsigma^2.
struct LmsConfig {
    std::size_t d = 100;
    double alpha = 2.0;
    double beta = 2.0;
    double l_top = 1.0;
    double delta = 1.0;
    double gamma = 0.1;
    double varsigma = 0.0;
    double kurtosis = -2.0;
    int replications = 1;
    std::uint64_t seed = 0;

    void validate() const;
    double h(std::size_t i) const;         // i in 1..d
    double init_coord_sq(std::size_t i) const;
};

/// Step-size functional sum gamma h_i / (2 - (kurtosis+2) gamma h_i);
/// stability requires upsilon < 1. Throws StepSizeError when a denominator
/// is not positive.
double upsilon(const LmsConfig& cfg);

/// Largest step size with upsilon = 1, by bisection (exact 2/tr H when
/// kurtosis = -2).
double gamma_max(const LmsConfig& cfg);

/// tau = 1/2 sum delta_i^2 / (2 - (kurtosis+2) gamma h_i).
double lms_bias_limit_constant(const LmsConfig& cfg);

/// Exact expectation of a_k = 1/2 <h, E[theta_k o theta_k]> via the
/// diagonal-plus-rank-one update, O(d) per step. Runs even when
/// upsilon >= 1 (flagged in the metadata) to demonstrate divergence.
Trajectory evolve_expected(const LmsConfig& cfg, std::int64_t steps);

/// Monte Carlo over the full d-dimensional recursion; mean and standard
/// errors over replications at a log-spaced k grid.
Trajectory run_lms_mc(const LmsConfig& cfg, std::int64_t steps);

/// Fourth-moment propagation for Rademacher inputs without observation
/// noise: b_k = E[((theta_k o theta_k)' h)^2], exact for kurtosis = -2.
/// The variance of the un-halved performance is b_k - (2 a_k)^2.
std::vector<double> variance_of_performance(const LmsConfig& cfg, std::int64_t steps);

/// The exact fourth-moment operator on vec((theta o theta)(theta o theta)')
/// for Rademacher inputs (valid on symmetric arguments).
Eigen::MatrixXd fourth_moment_operator(const LmsConfig& cfg);

/// One application of the second-moment operator T to a symmetric matrix
/// (test-scale validation of the diagonal reduction; d <= 64).
Eigen::MatrixXd t_apply(const LmsConfig& cfg, const Eigen::MatrixXd& m);

}  // namespace specdim
