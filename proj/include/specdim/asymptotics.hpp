#pragma once

#include <optional>
#include <string>

#include "specdim/lms.hpp"
#include "specdim/spectral.hpp"

namespace specdim {

struct EquivalentTerm {
    double c_hat;
    double p;
    int q;
};

/// Predicted asymptote c_hat * k^-p * (log k)^q, optionally with a second
/// term at a regime boundary.
struct Equivalent {
    double c_hat = 0.0;
    double p = 0.0;
    int q = 0;
    std::string regime;
    std::optional<EquivalentTerm> second;

    double eval(double k) const;
};

/// Gamma with a guard: arguments within 1e-6 of a nonpositive integer raise
/// BoundaryError. Evaluated through log-Gamma (reflection below 0.5).
double checked_gamma(double x);

/// a_k ~ c Gamma(omega) / (2k)^omega.
Equivalent eq_gd(const SpectralDimension& sd);

/// Distance to optimum: |theta_k|^2 ~ (delta^2/(alpha (gamma l)^p)) k^-p with
/// p = (beta-1)/alpha; rejected when p <= 0.
Equivalent eq_gd_norm(const PowerLawSpectrum& spec);

/// var(a_k) ~ c' Gamma(omega')/(4k)^omega' with omega' = 2 omega + 1/alpha.
Equivalent eq_gd_random_init_var(const PowerLawSpectrum& spec, double kurtosis);

/// Momentum family: omega < rho, omega = rho (log) and omega > rho cases;
/// rho = 1 reduces to the classical three-case form.
Equivalent eq_nesterov(const SpectralDimension& sd, double rho);

/// Heavy ball: the omega < 1 equivalent coincides with eq_nesterov(sd, 1);
/// for omega > 1 the normalized trajectory k^2 a_k oscillates around
/// (S(0) - S(-4))/2 without converging.
Equivalent eq_heavy_ball(const PowerLawSpectrum& spec);

/// Variance term of noisy gradient descent; omega' < 1 grows like k^(1-omega'),
/// omega' > 1 converges to a constant; omega' = 1 is a flagged boundary.
Equivalent eq_gd_noise_var(const PowerLawSpectrum& spec, double beta_prime, double varsigma);

/// Variance term of noisy Nesterov; growth k^(3-2 omega') for omega' in (0,1)
/// and k^(2-omega') for omega' in (1,2).
Equivalent eq_nesterov_noise_var(const PowerLawSpectrum& spec, double beta_prime, double varsigma);

/// Averaged gradient descent; omega in (0,2) decays like k^-omega (log-2
/// limit factor at omega = 1), omega > 2 like a problem constant over k^2.
Equivalent eq_avg_gd(const PowerLawSpectrum& spec);

/// LMS bias term; rate omega below 2 - 1/alpha and 2 - 1/alpha above, both
/// terms at the boundary.
Equivalent eq_lms_bias(const LmsConfig& cfg);

/// Limit of the LMS variance term: varsigma^2 upsilon / (2 (1 - upsilon)).
double eq_lms_variance_limit(const LmsConfig& cfg);

/// Max relative discrepancy, over j <= K, between the specific derivative of
/// the shifted momentum transform and the closed-form power transform:
/// (j+2rho-1)!/j! b_{j+1}(lambda) against (2rho-1)! [z^j] ((1-z)^2(1-lambda)
/// + lambda)^-rho. The constant (2rho-1)! comes from the Leibniz expansion
/// of the (2rho-1)-th derivative of z^(2rho-2)(B-1) at zero.
double verify_lemma_nest2(int rho, double lambda, int K);

}  // namespace specdim
