#include "specdim/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "specdim/parallel.hpp"

namespace specdim {

namespace {

double pow_i(std::size_t i, double e) { return std::pow(static_cast<double>(i), e); }

double factorial(int m) {
    double f = 1.0;
    for (int j = 2; j <= m; ++j) f *= j;
    return f;
}

// Continuous part: integral of coeff * x^(omega-1)/(x+u)^k on [0, upper].
// The substitution x = upper * t^(2/omega) removes the endpoint singularity
// (integrand becomes ~t near 0); geometric panels in t resolve the
// (x+u)^-k layer when u is small.
double density_integral(const PowerDensity& d, double u, int k) {
    static const double gl_x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                   0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                   0.9445750230732326, 0.9894009349916499};
    static const double gl_w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                   0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                   0.0622535239386479, 0.0271524594117541};
    const double s = 2.0 / d.omega;
    const double t0 = 1e-8;
    const int panels = 48;
    double sum = 0.0;
    double lo = 0.0;
    for (int p = 0; p <= panels; ++p) {
        const double hi = (p == panels) ? 1.0 : t0 * std::pow(1.0 / t0, static_cast<double>(p) / panels);
        if (hi <= lo) continue;
        const double c0 = 0.5 * (hi + lo), c1 = 0.5 * (hi - lo);
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) {
            for (double sgn : {-1.0, 1.0}) {
                const double t = c0 + sgn * c1 * gl_x[q];
                const double x = d.upper * std::pow(t, s);
                acc += gl_w[q] * std::pow(t, s * d.omega - 1.0) / std::pow(x + u, k);
            }
        }
        sum += acc * c1;
        lo = hi;
    }
    return d.coeff * std::pow(d.upper, d.omega) * s * sum;
}

}  // namespace

void PowerLawSpectrum::validate() const {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!(beta > 1.0 - alpha)) throw ValidationError("beta must exceed 1 - alpha");
    if (!(gamma_l > 0.0 && gamma_l <= 1.0)) throw ValidationError("gamma_l must lie in (0,1]");
    if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
    if (!(l_top > 0.0)) throw ValidationError("l_top must be positive");
    if (n_modes == 0) throw ValidationError("n_modes must be positive");
}

double PowerLawSpectrum::eigenvalue(std::size_t i) const { return gamma_l * pow_i(i, -alpha); }
double PowerLawSpectrum::hessian_eigenvalue(std::size_t i) const { return l_top * pow_i(i, -alpha); }
double PowerLawSpectrum::weight(std::size_t i) const {
    return 0.5 * l_top * delta * delta * pow_i(i, -(alpha + beta));
}
double PowerLawSpectrum::init_coord_sq(std::size_t i) const { return delta * delta * pow_i(i, -beta); }

void SpectralMeasure::validate() const {
    for (const auto& a : atoms) {
        if (a.weight < 0.0) throw ValidationError("atom weight must be nonnegative");
        if (!(a.location >= 0.0 && a.location < 1.0)) throw ValidationError("atom location must lie in [0,1)");
    }
    if (density) {
        if (!(density->coeff > 0.0 && density->omega > 0.0))
            throw ValidationError("density parameters must be positive");
        if (!(density->upper > 0.0 && density->upper < 1.0))
            throw ValidationError("density upper limit must lie in (0,1)");
    }
}

double SpectralMeasure::total_mass() const {
    std::vector<double> w(atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j) w[j] = atoms[j].weight;
    std::sort(w.begin(), w.end());
    double mass = par::compensated_sum(w);
    if (density) mass += density->coeff * std::pow(density->upper, density->omega) / density->omega;
    return mass;
}

SpectralMeasure spectrum_to_measure(const PowerLawSpectrum& spec) {
    spec.validate();
    SpectralMeasure m;
    m.atoms.resize(spec.n_modes);
    for (std::size_t i = 1; i <= spec.n_modes; ++i)
        m.atoms[i - 1] = Atom{spec.weight(i), spec.eigenvalue(i)};
    return m;
}

SpectralDimension spectral_dimension(const PowerLawSpectrum& spec) {
    spec.validate();
    const double omega = (spec.beta - 1.0) / spec.alpha + 1.0;
    const double c = spec.l_top * spec.delta * spec.delta /
                     (2.0 * spec.alpha * std::pow(spec.gamma_l, omega));
    return SpectralDimension{omega, c};
}

double stieltjes(const SpectralMeasure& measure, double u, int order) {
    if (order < 0) throw ValidationError("stieltjes order must be nonnegative");
    const int k = order + 1;
    // ascending-magnitude summation with compensation: power-law weights
    // span many orders of magnitude
    std::vector<double> terms(measure.atoms.size());
    for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
        const double den = measure.atoms[j].location + u;
        if (std::abs(den) < 1e-300) throw PoleError("stieltjes evaluated at an atom location");
        terms[j] = measure.atoms[j].weight / std::pow(den, k);
    }
    std::sort(terms.begin(), terms.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    double sum = par::compensated_sum(terms);
    if (measure.density) sum += density_integral(*measure.density, u, k);
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sign * factorial(order) * sum;
}

SpectralMeasure tau_measure(const PowerLawSpectrum& spec, double gamma) {
    spec.validate();
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    SpectralMeasure m;
    m.atoms.resize(spec.n_modes);
    for (std::size_t i = 1; i <= spec.n_modes; ++i) {
        const double gh = gamma * spec.hessian_eigenvalue(i);
        if (gh >= 1.0) throw StepSizeError("tau measure requires gamma*h_i < 1 for all modes");
        m.atoms[i - 1] = Atom{gh, gh};
    }
    return m;
}

SpectralDimension tau_dimension(const PowerLawSpectrum& spec, double gamma) {
    if (!(spec.alpha > 1.0)) throw ValidationError("tau dimension requires alpha > 1");
    const double omega = 1.0 - 1.0 / spec.alpha;
    const double c = std::pow(gamma * spec.l_top, 1.0 / spec.alpha) / spec.alpha;
    return SpectralDimension{omega, c};
}

double power_tail(double s, std::size_t n) {
    if (!(s > 1.0)) throw ValidationError("power_tail requires s > 1");
    const double x = static_cast<double>(n);
    return std::pow(x, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(x, -s) + (s / 12.0) * std::pow(x, -s - 1.0);
}

double tail_mass(const PowerLawSpectrum& spec, std::size_t n) {
    return 0.5 * spec.l_top * spec.delta * spec.delta * power_tail(spec.alpha + spec.beta, n);
}

std::size_t modes_for_tail(const PowerLawSpectrum& spec, double eps_rel) {
    spec.validate();
    if (!(eps_rel > 0.0)) throw ValidationError("eps_rel must be positive");
    const double s = spec.alpha + spec.beta;
    std::size_t n = 16;
    double partial = 0.0;
    std::size_t covered = 0;
    while (true) {
        for (std::size_t i = covered + 1; i <= n; ++i) partial += pow_i(i, -s);
        covered = n;
        const double tail = power_tail(s, n);
        if (tail <= eps_rel * (partial + tail)) return n;
        if (n >= (std::size_t{1} << 27)) return n;  // hard cap
        n *= 2;
    }
}

double stieltjes_asymptote(const SpectralDimension& sd, double u, int order) {
    const int k = order + 1;
    if (!(k > sd.omega)) throw ValidationError("asymptote requires order+1 > omega");
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sd.c * sign * std::exp(std::lgamma(k - sd.omega) + std::lgamma(sd.omega)) *
           std::pow(u, sd.omega - k);
}

double stieltjes_tail_bound(const PowerLawSpectrum& spec, std::size_t n, double u, int order) {
    // each dropped term is bounded by w_i/u^(m+1)
    return factorial(order) * tail_mass(spec, n) / std::pow(u, order + 1);
}

}  // namespace specdim
