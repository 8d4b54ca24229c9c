#include "specdim/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include "specdim/kernels.hpp"
#include "specdim/ztrans.hpp"

namespace specdim {

namespace {

constexpr double kPoleWindow = 1e-6;
constexpr double kBoundaryWindow = 1e-9;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

double checked_gamma(double x) {
    if (x <= 0.5) {
        const double nearest = std::round(x);
        if (nearest <= 0.0 && std::abs(x - nearest) < kPoleWindow)
            throw BoundaryError("Gamma argument within 1e-6 of a nonpositive integer");
        if (x < 0.5) {
            // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x))
            return std::numbers::pi / (std::sin(std::numbers::pi * x) * checked_gamma(1.0 - x));
        }
    }
    return std::exp(std::lgamma(x));
}

double Equivalent::eval(double k) const {
    double v = c_hat * std::pow(k, -p);
    if (q != 0) v *= std::pow(std::log(k), q);
    if (second) {
        double w = second->c_hat * std::pow(k, -second->p);
        if (second->q != 0) w *= std::pow(std::log(k), second->q);
        v += w;
    }
    return v;
}

Equivalent eq_gd(const SpectralDimension& sd) {
    if (!(sd.omega > 0.0)) throw ValidationError("omega must be positive");
    Equivalent e;
    e.c_hat = sd.c * checked_gamma(sd.omega) / std::pow(2.0, sd.omega);
    e.p = sd.omega;
    e.regime = "power";
    return e;
}

Equivalent eq_gd_norm(const PowerLawSpectrum& spec) {
    spec.validate();
    const double p = (spec.beta - 1.0) / spec.alpha;
    if (!(p > 0.0))
        throw ValidationError("iterate-norm rate requires beta > 1 (non-decaying otherwise)");
    Equivalent e;
    e.c_hat = spec.delta * spec.delta / (spec.alpha * std::pow(spec.gamma_l, p));
    e.p = p;
    e.regime = "power";
    return e;
}

Equivalent eq_gd_random_init_var(const PowerLawSpectrum& spec, double kurtosis) {
    spec.validate();
    if (!(kurtosis >= -2.0)) throw ValidationError("excess kurtosis is at least -2");
    Equivalent e;
    if (kurtosis == -2.0) {
        e.regime = "degenerate (deterministic coordinates)";
        return e;  // identically zero
    }
    const auto sd = spectral_dimension(spec);
    const double omega_p = 2.0 * sd.omega + 1.0 / spec.alpha;
    const double c_p = spec.l_top * spec.l_top * std::pow(spec.delta, 4) * (kurtosis + 2.0) /
                       (4.0 * spec.alpha * std::pow(spec.gamma_l, omega_p));
    e.c_hat = c_p * checked_gamma(omega_p) / std::pow(4.0, omega_p);
    e.p = omega_p;
    e.regime = "power";
    return e;
}

Equivalent eq_nesterov(const SpectralDimension& sd, double rho) {
    if (!(sd.omega > 0.0 && rho > 0.0)) throw ValidationError("omega and rho must be positive");
    const double pre = sd.c * checked_gamma(2.0 * rho) * checked_gamma(2.0 * rho) /
                       (checked_gamma(rho) * checked_gamma(rho));
    Equivalent e;
    if (std::abs(sd.omega - rho) <= kBoundaryWindow) {
        e.c_hat = pre * std::pow(2.0, 1.0 - 2.0 * rho);
        e.p = 2.0 * rho;
        e.q = 1;
        e.regime = "omega = rho (log)";
        return e;
    }
    if (sd.omega < rho) {
        e.c_hat = pre * checked_gamma(rho - sd.omega) * checked_gamma(sd.omega) /
                  checked_gamma(4.0 * rho - 1.0 - 2.0 * sd.omega) *
                  checked_gamma(2.0 * rho - 0.5 - sd.omega) /
                  checked_gamma(rho + 0.5 - sd.omega) * std::pow(2.0, 2.0 * rho - 1.0) /
                  std::pow(4.0, sd.omega);
        e.p = 2.0 * sd.omega;
        e.regime = "omega < rho";
        return e;
    }
    e.c_hat = pre * std::pow(2.0, 1.0 - 2.0 * rho) * checked_gamma(sd.omega - rho);
    e.p = sd.omega + rho;
    e.regime = "omega > rho";
    return e;
}

Equivalent eq_heavy_ball(const PowerLawSpectrum& spec) {
    const auto sd = spectral_dimension(spec);
    if (sd.omega < 1.0 - kBoundaryWindow) {
        Equivalent e = eq_nesterov(sd, 1.0);
        e.regime = "omega < 1 (shared with the momentum equivalent)";
        return e;
    }
    Equivalent e;
    if (std::abs(sd.omega - 1.0) <= kBoundaryWindow) {
        e.c_hat = sd.c;
        e.p = 2.0;
        e.q = 1;
        e.regime = "omega = 1 (log)";
        return e;
    }
    // k^2 a_k oscillates around (S(0) - S(-4))/2; S(0) needs beta > 1
    const auto measure = spectrum_to_measure(spec);
    const double gamma = spec.step_size();
    const double s0 = stieltjes(measure, 0.0, 0) +
                      spec.delta * spec.delta / (2.0 * gamma) * power_tail(spec.beta, spec.n_modes);
    const double sm4 = stieltjes(measure, -4.0, 0) - 0.25 * tail_mass(spec, spec.n_modes);
    e.c_hat = 0.5 * (s0 - sm4);
    e.p = 2.0;
    e.regime = "omega > 1 (non-vanishing oscillation level)";
    return e;
}

Equivalent eq_gd_noise_var(const PowerLawSpectrum& spec, double beta_prime, double varsigma) {
    spec.validate();
    const double omega_p = (beta_prime - 1.0) / spec.alpha + 1.0;
    if (std::abs(omega_p - 1.0) <= kBoundaryWindow)
        throw BoundaryError("omega' = 1 separates growth from saturation; no equivalent");
    Equivalent e;
    if (omega_p < 1.0) {
        const double c_p = spec.l_top * varsigma * varsigma /
                           (2.0 * spec.alpha * std::pow(spec.gamma_l, omega_p));
        e.c_hat = c_p / std::pow(2.0, omega_p) * checked_gamma(omega_p) *
                  checked_gamma(1.0 - omega_p) / checked_gamma(2.0 - omega_p);
        e.p = omega_p - 1.0;  // negative: growth k^(1-omega')
        e.regime = "omega' < 1 (growth)";
        return e;
    }
    // saturation: varsigma^2/(2 gamma) sum i^-beta' / (2 - lambda_i)
    const double gamma = spec.step_size();
    double s = 0.0;
    for (std::size_t i = spec.n_modes; i >= 1; --i)
        s += std::pow(double(i), -beta_prime) / (2.0 - spec.eigenvalue(i));
    s += 0.5 * power_tail(beta_prime, spec.n_modes);
    e.c_hat = varsigma * varsigma / (2.0 * gamma) * s;
    e.p = 0.0;
    e.regime = "omega' > 1 (constant)";
    return e;
}

Equivalent eq_nesterov_noise_var(const PowerLawSpectrum& spec, double beta_prime,
                                 double varsigma) {
    spec.validate();
    if (!(spec.alpha > 1.0)) throw ValidationError("the variance equivalents require alpha > 1");
    const double omega_p = (beta_prime - 1.0) / spec.alpha + 1.0;
    if (std::abs(omega_p - 1.0) <= kBoundaryWindow || omega_p >= 2.0 || omega_p <= 0.0)
        throw BoundaryError("omega' must lie in (0,1) or (1,2)");
    const double c_p =
        spec.l_top * varsigma * varsigma / (2.0 * spec.alpha * std::pow(spec.gamma_l, omega_p));
    Equivalent e;
    if (omega_p < 1.0) {
        e.c_hat = c_p * checked_gamma(1.0 - omega_p) * checked_gamma(omega_p) /
                  checked_gamma(6.0 - 2.0 * omega_p) * std::pow(4.0, 1.0 - omega_p);
        e.p = -(3.0 - 2.0 * omega_p);
        e.regime = "omega' < 1 (growth k^(3-2 omega'))";
        return e;
    }
    e.c_hat = c_p * checked_gamma(2.0 - omega_p) / checked_gamma(5.0 - omega_p) *
              checked_gamma(omega_p) / (omega_p - 1.0);
    e.p = -(2.0 - omega_p);
    e.regime = "omega' in (1,2) (growth k^(2-omega'))";
    return e;
}

Equivalent eq_avg_gd(const PowerLawSpectrum& spec) {
    const auto sd = spectral_dimension(spec);
    if (std::abs(sd.omega - 2.0) <= kBoundaryWindow)
        throw BoundaryError("omega = 2 separates the averaging regimes");
    Equivalent e;
    if (sd.omega < 2.0) {
        // 2 c Gamma(1-omega) Gamma(omega) (2^(1-omega) - 1) / Gamma(3-omega),
        // written through the log-2 limit factor at omega = 1
        const double f = std::abs(sd.omega - 1.0) <= kBoundaryWindow
                             ? std::numbers::ln2
                             : (std::pow(2.0, 1.0 - sd.omega) - 1.0) / (1.0 - sd.omega);
        e.c_hat = 2.0 * sd.c * checked_gamma(sd.omega) * f / (2.0 - sd.omega);
        e.p = sd.omega;
        e.regime = "omega < 2";
        return e;
    }
    // k^2 a_k -> sum_i w_i / lambda_i^2 (equal to <theta_0, H^-1 theta_0>/2
    // when gamma = 1)
    const double gamma = spec.step_size();
    double s = 0.0;
    for (std::size_t i = spec.n_modes; i >= 1; --i)
        s += spec.weight(i) / (spec.eigenvalue(i) * spec.eigenvalue(i));
    s += spec.delta * spec.delta / (2.0 * gamma * gamma * spec.l_top) *
         power_tail(spec.beta - spec.alpha, spec.n_modes);
    e.c_hat = s;
    e.p = 2.0;
    e.regime = "omega > 2 (problem constant)";
    return e;
}

Equivalent eq_lms_bias(const LmsConfig& cfg) {
    cfg.validate();
    const double u = upsilon(cfg);
    if (!(u < 1.0)) throw StepSizeError("the bias equivalent requires upsilon < 1");
    const double omega = (cfg.beta - 1.0) / cfg.alpha + 1.0;
    const double edge = 2.0 - 1.0 / cfg.alpha;
    const double gl = cfg.gamma * cfg.l_top;
    const double c = cfg.l_top * cfg.delta * cfg.delta / (2.0 * cfg.alpha * std::pow(gl, omega));
    auto slow_term = [&]() {
        return EquivalentTerm{c / (1.0 - u) * checked_gamma(omega) / std::pow(2.0, omega), omega,
                              0};
    };
    auto fast_term = [&]() {
        const double tau = lms_bias_limit_constant(cfg);
        // the feedback route carries Gamma(1+1/alpha) = Gamma(1/alpha)/alpha
        // and the measure normalization 1/gamma
        const double ch = tau / (cfg.gamma * cfg.alpha * (1.0 - u) * (1.0 - u)) *
                          std::pow(2.0 * gl, 1.0 / cfg.alpha) *
                          checked_gamma(1.0 - 1.0 / cfg.alpha) * 0.25 * (1.0 - 1.0 / cfg.alpha);
        return EquivalentTerm{ch, edge, 0};
    };
    Equivalent e;
    if (std::abs(omega - edge) <= 1e-9) {
        const auto s = slow_term();
        e.c_hat = s.c_hat;
        e.p = s.p;
        e.second = fast_term();
        e.regime = "omega = 2 - 1/alpha (both terms)";
        return e;
    }
    if (omega < edge) {
        const auto s = slow_term();
        e.c_hat = s.c_hat;
        e.p = s.p;
        e.regime = "omega < 2 - 1/alpha";
        return e;
    }
    const auto f = fast_term();
    e.c_hat = f.c_hat;
    e.p = f.p;
    e.regime = "omega > 2 - 1/alpha";
    return e;
}

double eq_lms_variance_limit(const LmsConfig& cfg) {
    const double u = upsilon(cfg);
    if (!(u < 1.0)) throw StepSizeError("the variance limit requires upsilon < 1");
    return 0.5 * cfg.varsigma * cfg.varsigma * u / (1.0 - u);
}

double verify_lemma_nest2(int rho, double lambda, int K) {
    if (rho < 1 || rho > 4) throw ValidationError("rho must be an integer in 1..4");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in (0,1)");
    if (K < 1 || K > 500) throw ValidationError("K must lie in 1..500");
    const auto b = kernels::mode_sequence(lambda, kernels::Recursion::nesterov, rho, K + 2);
    // ((1-z)^2 (1-lambda) + lambda)^rho as a polynomial denominator
    ztrans::RationalZ base{{1.0}, {1.0, -2.0 * (1.0 - lambda), 1.0 - lambda}};
    base.normalize();
    const ztrans::RationalZ target = ztrans::pow(base, rho);
    const auto e = ztrans::taylor_coeffs(target, K);
    // D^(2rho-1)(0) = (2rho-1)! b_1 by the Leibniz rule on z^(2rho-2)(B-1),
    // which fixes the constant of the closed-form derivative
    const double rhs_scale = factorial(2 * rho - 1);
    // both sides oscillate through zero, so measure each discrepancy against
    // the local envelope rather than the pointwise value
    std::vector<double> env(K + 1, 0.0);
    for (int j = 0; j <= K; ++j) {
        const int lo = std::max(0, j - 8), hi = std::min(K, j + 8);
        for (int m = lo; m <= hi; ++m) env[j] = std::max(env[j], std::abs(rhs_scale * e[m]));
    }
    double worst = 0.0;
    for (int j = 0; j <= K; ++j) {
        double ratio = 1.0;  // (j+2rho-1)!/j!
        for (int m = j + 1; m <= j + 2 * rho - 1; ++m) ratio *= m;
        const double lhs = ratio * b[j + 1];
        const double rhs = rhs_scale * e[j];
        const double scale = std::max({std::abs(lhs), std::abs(rhs), env[j], 1e-280});
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

}  // namespace specdim
