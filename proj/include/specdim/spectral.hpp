#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "specdim/errors.hpp"

namespace specdim {

/// Power-law description of a quadratic problem: Hessian eigenvalues
/// h_i = l_top * i^-alpha and initial-error coordinates delta * i^-beta/2,
/// truncated to n_modes. gamma_l is the product (step size) * l_top, i.e.
/// the top normalized eigenvalue lambda_1.
struct PowerLawSpectrum {
    double alpha = 2.0;
    double beta = 2.0;
    double gamma_l = 0.5;
    double delta = 1.0;
    double l_top = 1.0;
    std::size_t n_modes = 1000;

    void validate() const;

    double step_size() const { return gamma_l / l_top; }
    /// lambda_i = gamma_l * i^-alpha (eigenvalue of gamma*H, in (0,1)).
    double eigenvalue(std::size_t i) const;
    /// h_i = l_top * i^-alpha (eigenvalue of H).
    double hessian_eigenvalue(std::size_t i) const;
    /// Measure weight l_top*delta^2/2 * i^-(alpha+beta).
    double weight(std::size_t i) const;
    /// Squared initial coordinate delta^2 * i^-beta.
    double init_coord_sq(std::size_t i) const;
};

struct Atom {
    double weight;
    double location;
};

/// Density coeff * x^(omega-1) on [0, upper].
struct PowerDensity {
    double coeff;
    double omega;
    double upper;
};

/// Weighted measure on [0,1): Dirac atoms plus an optional power-law
/// continuous part.
struct SpectralMeasure {
    std::vector<Atom> atoms;
    std::optional<PowerDensity> density;

    double total_mass() const;
    void validate() const;
};

struct SpectralDimension {
    double omega;
    double c;
};

/// Atoms (weight_i, lambda_i) with weight_i = l*delta^2/2 * i^-(alpha+beta).
SpectralMeasure spectrum_to_measure(const PowerLawSpectrum& spec);

/// omega = (beta-1)/alpha + 1, c = l*delta^2 / (2*alpha*gamma_l^omega).
SpectralDimension spectral_dimension(const PowerLawSpectrum& spec);

/// m-th derivative of the Stieltjes transform,
/// S^(m)(u) = (-1)^m m! * sum_j w_j/(lambda_j+u)^(m+1), plus the continuous
/// part by graded Gauss-Legendre quadrature. Throws PoleError when u hits
/// the support.
double stieltjes(const SpectralMeasure& measure, double u, int order = 0);

/// Step-size measure: atoms (gamma*h_i, gamma*h_i). Its spectral dimension is
/// (1 - 1/alpha, (gamma*l)^(1/alpha)/alpha). Throws StepSizeError when some
/// gamma*h_i >= 1.
SpectralMeasure tau_measure(const PowerLawSpectrum& spec, double gamma);
SpectralDimension tau_dimension(const PowerLawSpectrum& spec, double gamma);

/// Mass of the dropped tail sum_{i>n} l*delta^2/2 * i^-(alpha+beta)
/// (Euler-Maclaurin, three terms).
double tail_mass(const PowerLawSpectrum& spec, std::size_t n);
/// Plain power-sum tail sum_{i>n} i^-s for s > 1.
double power_tail(double s, std::size_t n);

/// Smallest truncation with tail_mass <= eps_rel * total mass.
std::size_t modes_for_tail(const PowerLawSpectrum& spec, double eps_rel = 1e-12);

/// Right-hand side of the small-u law: c*(-1)^m m-dependent
/// Gamma(m+1-omega)*Gamma(omega) * u^(omega-m-1). Requires m+1 > omega.
double stieltjes_asymptote(const SpectralDimension& sd, double u, int order);

/// Analytic bound on the truncated-tail contribution to stieltjes(measure,u,m)
/// for a power-law spectrum truncated at n.
double stieltjes_tail_bound(const PowerLawSpectrum& spec, std::size_t n, double u, int order);

}  // namespace specdim
