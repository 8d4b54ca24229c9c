#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "specdim/rng.hpp"
#include "specdim/ztrans.hpp"
#include "random_rational.hpp"

using namespace specdim;
using namespace specdim::ztrans;

namespace {

// Hadamard oracle: the convolution of transforms carries the pointwise
// product of the coefficient sequences.
double hadamard_error(const RationalZ& a, const RationalZ& b, const RationalZ& conv, int K) {
    const Series ca = taylor_coeffs(a, K);
    const Series cb = taylor_coeffs(b, K);
    const Series cc = taylor_coeffs(conv, K);
    double scale = 0.0;
    for (int k = 0; k <= K; ++k) scale = std::max(scale, std::abs(ca[k] * cb[k]));
    double err = 0.0;
    for (int k = 0; k <= K; ++k) err = std::max(err, std::abs(cc[k] - ca[k] * cb[k]));
    return err / (scale > 0 ? scale : 1.0);
}

using testutil::random_stable_rational;

}  // namespace

TEST_CASE("taylor coefficients of basic transforms") {
    const Series geo = taylor_coeffs(RationalZ{{1.0}, {1.0, -1.0}}, 4);
    for (double v : geo) CHECK(v == doctest::Approx(1.0));
    const Series ramp = taylor_coeffs(RationalZ{{1.0}, {1.0, -2.0, 1.0}}, 4);
    for (int k = 0; k <= 4; ++k) CHECK(ramp[k] == doctest::Approx(k + 1.0));
    CHECK_THROWS_AS(taylor_coeffs(RationalZ{{1.0}, {0.0, 1.0}}, 3), ValidationError);
}

TEST_CASE("harmonic numbers match the log transform numerically") {
    const int K = 6000;
    Series h(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) h[k] = h[k - 1] + 1.0 / k;
    for (double z : {0.5, 0.9, 0.99}) {
        double s = 0.0;
        for (int k = K; k >= 0; --k) s = s * z + h[k];
        const double target = -std::log(1.0 - z) / (1.0 - z);
        CHECK(s == doctest::Approx(target).epsilon(1e-8));
    }
}

TEST_CASE("convolve_basic") {
    const RationalZ r = convolve_basic(1.0, 0.5, 1.0, 0.5);
    CHECK(r.num.size() == 1);
    CHECK(r.num[0] == doctest::Approx(1.0));
    REQUIRE(r.den.size() == 2);
    CHECK(r.den[1] == doctest::Approx(-0.25));

    const RationalZ c = convolve_basic(1.0, 0.0, 1.0, 0.9);
    CHECK(c.den_degree() == 0);  // constant transform
    CHECK(c.eval(0.3) == doctest::Approx(1.0));

    CHECK_THROWS_AS(convolve_basic(1.0, 1.1, 1.0, 0.5), PoleError);

    SplitRng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = 0.5 + rng.uniform(), u = (2 * rng.uniform() - 1) * 0.9 * a;
        const double b = 0.5 + rng.uniform(), v = (2 * rng.uniform() - 1) * 0.9 * b;
        const RationalZ lhs = RationalZ::simple_pole(a, u);
        const RationalZ rhs = RationalZ::simple_pole(b, v);
        CHECK(hadamard_error(lhs, rhs, convolve_basic(a, u, b, v), 200) < 1e-12);
    }
}

TEST_CASE("convolve_pole_powers") {
    PoleTerm p{1.0, 1.0, 0.5, 1}, q{1.0, 1.0, 0.5, 1};
    auto basic = convolve_pole_powers(p, q);
    REQUIRE(basic.size() == 1);
    CHECK(basic[0].power == 1);
    CHECK(basic[0].a.real() == doctest::Approx(1.0));
    CHECK(basic[0].u.real() == doctest::Approx(0.25));

    // (power 2) x (power 2): coefficients ((k+1) 0.5^k)^2
    PoleTerm p2{1.0, 1.0, 0.5, 2};
    auto conv = convolve_pole_powers(p2, p2);
    RationalZ sum = RationalZ::zero();
    for (const auto& t : conv)
        sum = sum + t.scale.real() * pow(RationalZ{{1.0}, {t.a.real(), -t.u.real()}}, t.power);
    const Series got = taylor_coeffs(sum, 100);
    double err = 0.0, scale = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double want = (k + 1.0) * (k + 1.0) * std::pow(0.5, 2 * k);
        scale = std::max(scale, std::abs(want));
        err = std::max(err, std::abs(got[k] - want));
    }
    CHECK(err / scale < 1e-10);

    // (power 2) x (power 1): a single output term
    PoleTerm q1{1.0, 1.0, 0.5, 1};
    auto conv21 = convolve_pole_powers(p2, q1);
    REQUIRE(conv21.size() == 1);
    RationalZ r21 = conv21[0].scale.real() *
                    pow(RationalZ{{1.0}, {conv21[0].a.real(), -conv21[0].u.real()}}, conv21[0].power);
    const Series g21 = taylor_coeffs(r21, 100);
    for (int k = 0; k <= 100; ++k)
        CHECK(g21[k] == doctest::Approx((k + 1.0) * std::pow(0.25, k)).epsilon(1e-10));
}

TEST_CASE("convolve_quadratic") {
    const double l = 0.25;
    const RationalZ r = convolve_quadratic(l, l);
    const RationalZ a{{1.0}, {1.0 + l, -2.0, 1.0}};  // 1/((1-z)^2 + l)
    CHECK(hadamard_error(a, a, r, 200) < 1e-9);
    // (A*B)(0) = a_0 b_0
    CHECK(r.eval(0.0) == doctest::Approx(a.eval(0.0) * a.eval(0.0)));

    const RationalZ r2 = convolve_quadratic(0.15, 0.45);
    const RationalZ a1{{1.0}, {1.15, -2.0, 1.0}};
    const RationalZ a2{{1.0}, {1.45, -2.0, 1.0}};
    CHECK(hadamard_error(a1, a2, r2, 200) < 1e-9);
    CHECK(r2.eval(0.0) == doctest::Approx(a1.eval(0.0) * a2.eval(0.0)));
}

TEST_CASE("general convolve on closed forms") {
    const RationalZ g = RationalZ::simple_pole(1.0, 0.5);
    const RationalZ c = convolve(g, g);
    CHECK(hadamard_error(g, g, c, 200) < 1e-12);
    CHECK(c.den_degree() == 1);
    CHECK(c.den[1] == doctest::Approx(-0.25));

    // R * 1: the constant transform carries (a_0, 0, 0, ...)
    const RationalZ rc = convolve(g, RationalZ::one());
    const Series s = taylor_coeffs(rc, 10);
    CHECK(s[0] == doctest::Approx(1.0));
    for (int k = 1; k <= 10; ++k) CHECK(s[k] == doctest::Approx(0.0));

    // quadratic-denominator instance through the general path
    const RationalZ a1{{1.0}, {1.25, -2.0, 1.0}};
    CHECK(hadamard_error(a1, a1, convolve(a1, a1), 200) < 1e-9);

    CHECK_THROWS_AS(convolve(RationalZ{{1.0}, {1.0, -1.0}}, g), PoleError);
}

TEST_CASE("convolve random stable rationals vs Hadamard oracle") {
    SplitRng rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        const RationalZ a = random_stable_rational(rng, 4);
        const RationalZ b = random_stable_rational(rng, 4);
        CHECK(hadamard_error(a, b, convolve(a, b), 200) < 1e-9);
    }
}

TEST_CASE("convolution is commutative and bilinear") {
    SplitRng rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const RationalZ a = random_stable_rational(rng, 3);
        const RationalZ b = random_stable_rational(rng, 3);
        const RationalZ c = random_stable_rational(rng, 2);
        const Series ab = taylor_coeffs(convolve(a, b), 80);
        const Series ba = taylor_coeffs(convolve(b, a), 80);
        double scale = 1e-30;
        for (int k = 0; k <= 80; ++k) scale = std::max(scale, std::abs(ab[k]));
        for (int k = 0; k <= 80; ++k) CHECK(std::abs(ab[k] - ba[k]) / scale < 1e-10);
        const Series lhs = taylor_coeffs(convolve(a + 2.0 * b, c), 80);
        const Series r1 = taylor_coeffs(convolve(a, c), 80);
        const Series r2 = taylor_coeffs(convolve(b, c), 80);
        scale = 1e-30;
        for (int k = 0; k <= 80; ++k) scale = std::max(scale, std::abs(lhs[k]));
        for (int k = 0; k <= 80; ++k)
            CHECK(std::abs(lhs[k] - (r1[k] + 2.0 * r2[k])) / scale < 1e-9);
    }
}

TEST_CASE("shift compatibility: (z^m A) * (z^m B) = z^m (A*B)") {
    SplitRng rng(11);
    const RationalZ a = random_stable_rational(rng, 3);
    const RationalZ b = random_stable_rational(rng, 3);
    const RationalZ base = convolve(a, b);
    for (int m = 1; m <= 5; ++m) {
        RationalZ za = a, zb = b;
        za.num.insert(za.num.begin(), m, 0.0);
        zb.num.insert(zb.num.begin(), m, 0.0);
        const Series got = taylor_coeffs(convolve(za, zb), 60 + m);
        const Series want = taylor_coeffs(base, 60);
        for (int k = 0; k < m; ++k) CHECK(std::abs(got[k]) < 1e-9);
        double scale = 1e-30;
        for (int k = 0; k <= 60; ++k) scale = std::max(scale, std::abs(want[k]));
        for (int k = 0; k <= 60; ++k) CHECK(std::abs(got[k + m] - want[k]) / scale < 1e-8);
    }
}

TEST_CASE("derivative transform") {
    const RationalZ g{{1.0}, {1.0, -1.0}};
    const RationalZ d = derivative_transform(g);  // z/(1-z)^2
    const Series s = taylor_coeffs(d, 6);
    for (int k = 0; k <= 6; ++k) CHECK(s[k] == doctest::Approx(double(k)));

    const Series s2 = taylor_coeffs(derivative_transform(RationalZ{{1.0}, {1.0, -2.0, 1.0}}), 6);
    for (int k = 0; k <= 6; ++k) CHECK(s2[k] == doctest::Approx(double(k) * (k + 1.0)));

    CHECK(derivative_transform(RationalZ::one()).is_zero());
}

TEST_CASE("averaging operator commutes with convolution") {
    // D(A*B) = (DA)*B with D A = (zA)'
    SplitRng rng(42);
    const RationalZ a = random_stable_rational(rng, 3);
    const RationalZ b = random_stable_rational(rng, 3);
    const Series lhs = taylor_coeffs(averaging_transform(convolve(a, b)), 60);
    const Series rhs = taylor_coeffs(convolve(averaging_transform(a), b), 60);
    const Series ca = taylor_coeffs(a, 60), cb = taylor_coeffs(b, 60);
    double scale = 1e-30;
    for (int k = 0; k <= 60; ++k) scale = std::max(scale, std::abs((k + 1.0) * ca[k] * cb[k]));
    for (int k = 0; k <= 60; ++k) {
        CHECK(std::abs(lhs[k] - (k + 1.0) * ca[k] * cb[k]) / scale < 1e-9);
        CHECK(std::abs(rhs[k] - (k + 1.0) * ca[k] * cb[k]) / scale < 1e-9);
    }
}

TEST_CASE("abel_estimate") {
    Series ones(301, 1.0);
    for (const auto& p : abel_estimate(ones, 1.0, abel_grid(6))) {
        CHECK(p.value == doctest::Approx(1.0 - std::pow(p.z, 301)).epsilon(1e-12));
        CHECK(!p.truncation_flagged);
    }

    // harmonic numbers: (1-z) A(z) + log(1-z) -> 0
    const int K = 20000;
    Series h(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) h[k] = h[k - 1] + 1.0 / k;
    for (const auto& p : abel_estimate(h, 1.0, abel_grid(8)))
        CHECK(std::abs(p.value + std::log(1.0 - p.z)) < 2e-3 * std::abs(std::log(1 - p.z)) + 1e-6);

    // a_k = Gamma(k+1/2)/(Gamma(1/2)Gamma(k+1)): (1-z)^0.5 A(z) -> 1
    Series bin(K + 1);
    bin[0] = 1.0;
    for (int k = 1; k <= K; ++k) bin[k] = bin[k - 1] * (k - 0.5) / k;
    auto bp = abel_estimate(bin, 0.5, abel_grid(8));
    CHECK(std::abs(bp.back().value - 1.0) < 5e-3);

    // geometric-tail bound dominates for a short prefix at z near 1
    Series shortones(20, 1.0);
    CHECK(abel_estimate(shortones, 1.0, {0.999})[0].truncation_flagged);
}

TEST_CASE("final-value consistency for a sequence with a known limit") {
    Series geo(200);
    for (int k = 0; k < 200; ++k) geo[k] = 2.0 + std::pow(0.8, k);  // limit 2
    for (const auto& p : abel_estimate(geo, 1.0, abel_grid(7))) {
        CHECK(p.value + p.tail_bound >= 2.0 - 1e-9);
        CHECK(p.value <= 2.0 + (1.0 - p.z) / (1.0 - 0.8 * p.z) + 1e-9);
    }
}

TEST_CASE("partial fractions reproduce the function") {
    SplitRng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const RationalZ r = random_stable_rational(rng, 4);
        const auto pf = partial_fractions(r);
        for (double zv : {0.0, 0.1, -0.2, 0.35, 0.5}) {
            std::complex<double> s(0.0, 0.0);
            for (const auto& t : pf.terms)
                s += t.scale / std::pow(t.a - std::complex<double>(zv) * t.u, t.power);
            double pv = 0.0;
            for (std::size_t i = pf.poly.size(); i-- > 0;) pv = pv * zv + pf.poly[i];
            CHECK(std::abs(s.imag()) < 1e-9 * (1.0 + std::abs(s.real())));
            CHECK(s.real() + pv == doctest::Approx(r.eval(zv)).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(partial_fractions(RationalZ{{1.0}, std::vector<double>(14, 1.0)}),
                    ValidationError);
}

TEST_CASE("transform printing") {
    CHECK(to_string(convolve_basic(1.0, 0.5, 1.0, 0.5)) == "(1) / (1 - 0.25*z)");
}
