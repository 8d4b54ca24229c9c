#pragma once

#include <complex>
#include <vector>

#include "specdim/errors.hpp"

namespace specdim::ztrans {

/// Finite prefix a_0..a_K of a sequence.
using Series = std::vector<double>;

/// Rational function of z with real coefficients, stored as numerator and
/// denominator in ascending powers, normalized so den[0] == 1. The Taylor
/// series at 0 is the carried sequence.
struct RationalZ {
    std::vector<double> num;
    std::vector<double> den{1.0};

    static RationalZ zero() { return RationalZ{{}, {1.0}}; }
    static RationalZ one() { return RationalZ{{1.0}, {1.0}}; }
    static RationalZ z() { return RationalZ{{0.0, 1.0}, {1.0}}; }
    static RationalZ polynomial(std::vector<double> coeffs) { return RationalZ{std::move(coeffs), {1.0}}; }
    /// 1/(a - u z); requires a != 0.
    static RationalZ simple_pole(double a, double u);

    void normalize();
    bool is_zero() const { return num.empty(); }
    double eval(double zv) const;
    int num_degree() const { return static_cast<int>(num.size()) - 1; }
    int den_degree() const { return static_cast<int>(den.size()) - 1; }
};

RationalZ operator+(const RationalZ& a, const RationalZ& b);
RationalZ operator-(const RationalZ& a, const RationalZ& b);
RationalZ operator*(const RationalZ& a, const RationalZ& b);
RationalZ operator/(const RationalZ& a, const RationalZ& b);
RationalZ operator*(double s, const RationalZ& a);
RationalZ pow(const RationalZ& a, int e);

/// scale / (a - u z)^power.
struct PoleTerm {
    std::complex<double> scale{1.0, 0.0};
    std::complex<double> a{1.0, 0.0};
    std::complex<double> u{0.0, 0.0};
    int power = 1;
};

/// Coefficients a_0..a_K of the Taylor series at 0 (denominator recurrence).
Series taylor_coeffs(const RationalZ& r, int K);

/// Convolution (Hadamard-product transform) of 1/(a-uz) and 1/(b-vz):
/// 1/(ab - uv z). Requires |u/a| < 1 and |v/b| < 1.
RationalZ convolve_basic(double a, double u, double b, double v);

/// Leibniz expansion of 1/(a-uz)^(k+1) * 1/(b-vz)^(l+1) into powers of
/// 1/(ab-uvz); scales multiply through.
std::vector<PoleTerm> convolve_pole_powers(const PoleTerm& p, const PoleTerm& q);

/// Convolution of 1/((1-z)^2+lambda) with 1/((1-z)^2+mu) in closed form.
RationalZ convolve_quadratic(double lambda, double mu);

/// General convolution of rational transforms with absolutely summable
/// coefficient sequences (all poles strictly outside the closed unit disk).
RationalZ convolve(const RationalZ& a, const RationalZ& b);

/// z R'(z): the transform of (k a_k).
RationalZ derivative_transform(const RationalZ& r);

/// D R = (z R(z))': the transform of ((k+1) a_k), the averaging operator.
RationalZ averaging_transform(const RationalZ& r);

struct AbelPoint {
    double z;
    double value;       // (1-z)^alpha * sum_{k<=K} a_k z^k
    double tail_bound;  // geometric bound on the dropped tail of the sum
    bool truncation_flagged;
};

/// Finite Abel evaluation on a grid of z in (0,1); flagged when the
/// truncation bound exceeds 1% of the value.
std::vector<AbelPoint> abel_estimate(const Series& seq, double alpha_exp,
                                     const std::vector<double>& z_grid);

/// Default grid z = 1 - 2^-j, j = 1..levels.
std::vector<double> abel_grid(int levels);

/// Partial-fraction decomposition: polynomial part plus pole terms
/// c/(z0 - z)^t written as PoleTerm{c', a=z0, u=1, power=t}.
struct PartialFractions {
    std::vector<double> poly;
    std::vector<PoleTerm> terms;
};
PartialFractions partial_fractions(const RationalZ& r);

/// Roots of a real polynomial (ascending coefficients), clustered into
/// multiple roots when closer than the merge tolerance.
struct PolyRoot {
    std::complex<double> z;
    int multiplicity;
};
std::vector<PolyRoot> poly_roots(const std::vector<double>& coeffs);

std::string to_string(const RationalZ& r);

}  // namespace specdim::ztrans
