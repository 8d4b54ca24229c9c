#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specdim/lms.hpp"
#include "specdim/rng.hpp"

using namespace specdim;

namespace {
LmsConfig make_cfg(std::size_t d, double alpha, double beta, double gamma, double kurt = -2.0) {
    LmsConfig c;
    c.d = d;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.kurtosis = kurt;
    return c;
}

double fitted_slope(const Trajectory& t, std::int64_t lo, std::int64_t hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t j = 0; j < t.k.size(); ++j) {
        if (t.k[j] < lo || t.k[j] > hi || t.value[j] <= 0) continue;
        const double x = std::log(t.k[j]), y = std::log(t.value[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("upsilon and gamma_max") {
    // kurtosis = -2: upsilon = gamma/2 tr H, gamma_max = 2/tr H
    auto c = make_cfg(1000, 2.0, 2.0, 0.3, -2.0);
    double trh = 0.0;
    for (std::size_t i = 1; i <= c.d; ++i) trh += c.h(i);
    CHECK(upsilon(c) == doctest::Approx(0.3 / 2.0 * trh).epsilon(1e-12));
    CHECK(gamma_max(c) == doctest::Approx(2.0 / trh).epsilon(1e-12));

    // single mode h = 1, kurtosis = 0, gamma = 0.5
    auto one = make_cfg(1, 2.0, 2.0, 0.5, 0.0);
    CHECK(upsilon(one) == doctest::Approx(0.5));

    auto g = make_cfg(100, 2.0, 2.0, 0.1, 0.0);
    const double gm = gamma_max(g);
    g.gamma = gm;
    CHECK(std::abs(upsilon(g) - 1.0) < 1e-10);

    auto bad = make_cfg(5, 2.0, 2.0, 3.0, 0.0);  // (kurt+2) gamma h_1 = 6 > 2
    CHECK_THROWS_AS(upsilon(bad), StepSizeError);
}

TEST_CASE("evolve_expected closed forms") {
    // d = 1, varsigma = 0: pure geometric with the stated factor
    auto c1 = make_cfg(1, 2.0, 2.0, 0.4, 0.5);
    const Trajectory t1 = evolve_expected(c1, 32);
    const double h = 1.0;
    const double fac = 1.0 - c1.gamma * (2.0 * h - c1.gamma * (c1.kurtosis + 2.0) * h * h -
                                         c1.gamma * h * h);
    for (std::int64_t k = 0; k <= 32; ++k)
        CHECK(t1.value[k] == doctest::Approx(0.5 * h * std::pow(fac, double(k))).epsilon(1e-12));

    // gamma -> 0: one step changes diag by ~ -2 gamma h o diag
    auto cs = make_cfg(8, 2.0, 2.0, 1e-7, -2.0);
    const Trajectory ts = evolve_expected(cs, 1);
    double want = 0.0;
    for (std::size_t i = 1; i <= 8; ++i)
        want += 0.5 * cs.h(i) * cs.init_coord_sq(i) * (1.0 - 2.0 * cs.gamma * cs.h(i));
    CHECK(ts.value[1] == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("variance limit 0.5 varsigma^2 upsilon/(1-upsilon)") {
    auto c = make_cfg(50, 2.0, 2.0, 0.6, -2.0);
    c.varsigma = 1.0;
    c.delta = 0.1;  // keep the bias negligible at the horizon
    const double u = upsilon(c);
    REQUIRE(u < 1.0);
    const Trajectory t = evolve_expected(c, 200000);
    const double limit = 0.5 * u / (1.0 - u);
    CHECK(t.value.back() == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("tau") {
    auto c = make_cfg(100, 2.0, 4.0, 0.6, -2.0);
    double s = 0.0;
    for (std::size_t i = 1; i <= 100; ++i) s += c.init_coord_sq(i);
    CHECK(lms_bias_limit_constant(c) == doctest::Approx(0.25 * s).epsilon(1e-12));

    auto one = make_cfg(1, 2.0, 2.0, 0.5, 0.0);  // gamma h = 0.5, kurt = 0 -> denom 1
    CHECK(lms_bias_limit_constant(one) == doctest::Approx(0.5));

    // direct-sum oracle
    auto d100 = make_cfg(100, 2.0, 4.0, 0.3, 0.0);
    double direct = 0.0;
    for (std::size_t i = 1; i <= 100; ++i)
        direct += 0.5 * d100.init_coord_sq(i) / (2.0 - 2.0 * 0.3 * d100.h(i));
    CHECK(lms_bias_limit_constant(d100) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("monte carlo matches the exact expectation") {
    auto c = make_cfg(20, 2.0, 2.0, 0.5, -2.0);
    c.replications = 500;
    c.seed = 31;
    const std::int64_t K = 400;
    const Trajectory mc = run_lms_mc(c, K);
    const Trajectory exact = evolve_expected(c, K);
    std::size_t beyond3 = 0;
    for (std::size_t j = 0; j < mc.k.size(); ++j) {
        const double ex = exact.value_at(static_cast<std::int64_t>(mc.k[j]));
        const double dev = std::abs(mc.value[j] - ex);
        CHECK(dev <= 4.0 * mc.stderr_[j] + 1e-12);
        if (dev > 3.0 * mc.stderr_[j] + 1e-12) ++beyond3;
    }
    CHECK(beyond3 <= mc.k.size() / 20);
}

TEST_CASE("rademacher inputs have constant squared norm") {
    SplitRng rng(5);
    auto c = make_cfg(64, 2.0, 2.0, 0.1, -2.0);
    double trh = 0.0;
    for (std::size_t i = 1; i <= c.d; ++i) trh += c.h(i);
    for (int trial = 0; trial < 32; ++trial) {
        double norm2 = 0.0;
        for (std::size_t i = 1; i <= c.d; ++i) {
            const double z = rng.rademacher();
            norm2 += c.h(i) * z * z;
        }
        CHECK(norm2 == trh);  // exact equality every draw
    }
}

TEST_CASE("gamma=0 limit of the fourth-moment propagation") {
    // gamma -> 0: b_k constant = <h, theta0 o theta0>^2
    auto c = make_cfg(6, 2.0, 2.0, 1e-9, -2.0);
    const auto b = variance_of_performance(c, 10);
    double dot = 0.0;
    for (std::size_t i = 1; i <= 6; ++i) dot += c.h(i) * c.init_coord_sq(i);
    for (double v : b) CHECK(v == doctest::Approx(dot * dot).epsilon(1e-6));
}

TEST_CASE("d=1 fourth moments follow the deterministic recursion") {
    // Rademacher with d = 1 gives theta' = (1-gamma h) theta almost surely,
    // so b_k = h^2 delta^4 (1-gamma h)^(4k)
    auto c = make_cfg(1, 2.0, 2.0, 0.37, -2.0);
    const auto b = variance_of_performance(c, 24);
    for (std::int64_t k = 0; k <= 24; ++k)
        CHECK(b[k] == doctest::Approx(std::pow(1.0 - 0.37, 4.0 * k)).epsilon(1e-12));
}

TEST_CASE("fourth-moment operator matches exhaustive enumeration") {
    for (std::size_t d : {1u, 2u, 3u}) {
        auto c = make_cfg(d, 1.5, 1.0, 0.3, -2.0);
        const Eigen::MatrixXd U = fourth_moment_operator(c);
        SplitRng rng(17 + d);
        std::vector<double> h(d), th(d);
        for (std::size_t i = 0; i < d; ++i) {
            h[i] = c.h(i + 1);
            th[i] = 2.0 * rng.uniform() - 1.0;
        }
        Eigen::VectorXd v(d * d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) v(i * d + j) = th[i] * th[i] * th[j] * th[j];
        // exact one-step expectation over all sign patterns
        Eigen::VectorXd want = Eigen::VectorXd::Zero(d * d);
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            std::vector<double> tp(d);
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double z = (mask >> i) & 1 ? 1.0 : -1.0;
                dot += std::sqrt(h[i]) * z * th[i];
                tp[i] = z;
            }
            for (std::size_t i = 0; i < d; ++i)
                tp[i] = th[i] - c.gamma * std::sqrt(h[i]) * tp[i] * dot;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    want(i * d + j) += tp[i] * tp[i] * tp[j] * tp[j];
        }
        want /= static_cast<double>(std::size_t{1} << d);
        const Eigen::VectorXd got = U * v;
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("fourth-moment variance matches monte carlo") {
    auto c = make_cfg(10, 2.0, 2.0, 0.3, -2.0);
    const std::int64_t K = 50;
    const auto b = variance_of_performance(c, K);
    const Trajectory exact = evolve_expected(c, K);
    const int R = 2000;
    // replications of P_k = <theta_k o theta_k, h> at the probed ks
    const std::vector<std::int64_t> probes{1, 5, 10, 50};
    std::vector<std::vector<double>> samples(probes.size(), std::vector<double>(R));
    for (int r = 0; r < R; ++r) {
        SplitRng rng(1234, r);
        std::vector<double> th(c.d), z(c.d);
        for (std::size_t i = 0; i < c.d; ++i) th[i] = std::sqrt(c.init_coord_sq(i + 1));
        std::size_t probe = 0;
        for (std::int64_t k = 1; k <= K; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < c.d; ++i) {
                z[i] = rng.rademacher();
                dot += std::sqrt(c.h(i + 1)) * z[i] * th[i];
            }
            for (std::size_t i = 0; i < c.d; ++i)
                th[i] -= c.gamma * std::sqrt(c.h(i + 1)) * z[i] * dot;
            if (probe < probes.size() && probes[probe] == k) {
                double p = 0.0;
                for (std::size_t i = 0; i < c.d; ++i) p += c.h(i + 1) * th[i] * th[i];
                samples[probe][r] = p;
                ++probe;
            }
        }
    }
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
        const std::int64_t k = probes[pi];
        double m = 0.0;
        for (double v : samples[pi]) m += v;
        m /= R;
        double m2 = 0.0, m4 = 0.0;
        for (double v : samples[pi]) {
            m2 += (v - m) * (v - m);
            m4 += std::pow(v - m, 4);
        }
        const double sample_var = m2 / (R - 1.0);
        m2 /= R;
        m4 /= R;
        const double se_var = std::sqrt((m4 - (R - 3.0) / (R - 1.0) * m2 * m2) / R);
        const double predicted = b[k] - std::pow(2.0 * exact.value_at(k), 2);
        CHECK(std::abs(predicted - sample_var) <= 3.0 * se_var);
    }
}

TEST_CASE("t_apply lemma cases") {
    auto c = make_cfg(6, 2.0, 2.0, 0.4, 0.7);
    // off-diagonal unit: (h_i + h_j - 2 gamma h_i h_j) v_ij
    Eigen::MatrixXd vij = Eigen::MatrixXd::Zero(6, 6);
    vij(1, 3) = vij(3, 1) = 0.5;
    const Eigen::MatrixXd tij = t_apply(c, vij);
    const double want = c.h(2) + c.h(4) - 2.0 * c.gamma * c.h(2) * c.h(4);
    CHECK(tij(1, 3) == doctest::Approx(want * 0.5).epsilon(1e-13));
    CHECK(tij(0, 0) == doctest::Approx(0.0));

    // diagonal unit with kurtosis = -2: 2 h_i v_ii - gamma h_i sum_k h_k v_kk
    auto cr = make_cfg(6, 2.0, 2.0, 0.4, -2.0);
    Eigen::MatrixXd vii = Eigen::MatrixXd::Zero(6, 6);
    vii(2, 2) = 1.0;
    const Eigen::MatrixXd tii = t_apply(cr, vii);
    CHECK(tii(2, 2) ==
          doctest::Approx(2.0 * cr.h(3) - cr.gamma * cr.h(3) * cr.h(3)).epsilon(1e-13));
    for (int i = 0; i < 6; ++i) {
        if (i == 2) continue;
        CHECK(tii(i, i) == doctest::Approx(-cr.gamma * cr.h(i + 1) * cr.h(3)).epsilon(1e-13));
    }
}

TEST_CASE("block decoupling: diagonal evolution equals the full T recursion") {
    for (double kurt : {-2.0, 0.0, 1.0}) {
        auto c = make_cfg(16, 2.0, 2.0, 0.4, kurt);
        c.varsigma = 0.5;
        const std::int64_t K = 200;
        const Trajectory fast = evolve_expected(c, K);
        // full recursion E[Theta_k] = (I - gamma T) E[Theta_{k-1}] + gamma^2 s^2 H
        Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(16, 16);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(16, 16);
        for (std::size_t i = 0; i < 16; ++i) {
            theta(i, i) = c.init_coord_sq(i + 1);
            H(i, i) = c.h(i + 1);
        }
        // off-diagonal coordinates decouple as scalar geometric sequences
        theta(0, 5) = theta(5, 0) = 0.7;
        double offdiag = 0.7;
        double maxdev = 0.0;
        for (std::int64_t k = 1; k <= K; ++k) {
            theta = theta - c.gamma * t_apply(c, theta) +
                    c.gamma * c.gamma * c.varsigma * c.varsigma * H;
            double a = 0.0;
            for (std::size_t i = 0; i < 16; ++i) a += H(i, i) * theta(i, i);
            a *= 0.5;
            maxdev = std::max(maxdev, std::abs(a - fast.value[k]) / std::max(a, 1e-300));
            offdiag *= 1.0 - c.gamma * (c.h(1) + c.h(6) - 2.0 * c.gamma * c.h(1) * c.h(6));
            CHECK(theta(0, 5) == doctest::Approx(offdiag).epsilon(1e-12));
        }
        CHECK(maxdev <= 1e-12);
    }
}

TEST_CASE("bias rate dichotomy") {
    // fitted tail slope is omega below 2 - 1/alpha and 2 - 1/alpha above
    const std::int64_t K = 30000;
    auto c = make_cfg(3000, 2.0, 1.5, 0.6, -2.0);  // omega = 1.25 < 1.5
    Trajectory t = evolve_expected(c, K);
    CHECK(std::abs(fitted_slope(t, K / 4, K) - 1.25) < 0.1);
    c.beta = 4.0;  // omega = 2.5 > 1.5
    t = evolve_expected(c, K);
    CHECK(std::abs(fitted_slope(t, K / 4, K) - 1.5) < 0.1);
}

TEST_CASE("divergence above the step-size gate") {
    auto c = make_cfg(50, 2.0, 2.0, 0.9, 0.0);
    REQUIRE(upsilon(c) > 1.0);
    const Trajectory t = evolve_expected(c, 2000);
    CHECK(t.value.back() > 1e3 * t.value.front());
    CHECK(t.meta.spectrum.find("divergent") != std::string::npos);

    auto ok = make_cfg(50, 2.0, 2.0, 0.3, 0.0);
    REQUIRE(upsilon(ok) < 1.0);
    const Trajectory ts = evolve_expected(ok, 2000);
    double peak = 0.0;
    for (double v : ts.value) peak = std::max(peak, v);
    CHECK(peak <= ts.value.front() * 1.0000001);
}
