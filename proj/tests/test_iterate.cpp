#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "specdim/iterate.hpp"
#include "specdim/kernels.hpp"
#include "specdim/parallel.hpp"

using namespace specdim;

namespace {
IterationConfig base_cfg(double alpha, double beta, std::size_t n, std::int64_t steps) {
    IterationConfig cfg;
    cfg.spectrum.alpha = alpha;
    cfg.spectrum.beta = beta;
    cfg.spectrum.gamma_l = 0.5;
    cfg.spectrum.delta = 1.0;
    cfg.spectrum.l_top = 1.0;
    cfg.spectrum.n_modes = n;
    cfg.steps = steps;
    return cfg;
}

double amplitude(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double mn = v[lo], mx = v[lo];
    for (std::size_t i = lo; i < hi; ++i) {
        mn = std::min(mn, v[i]);
        mx = std::max(mx, v[i]);
    }
    return 0.5 * (mx - mn);
}
}  // namespace

TEST_CASE("gd single atom and monotonicity") {
    auto cfg = base_cfg(2.0, 2.0, 1, 64);
    cfg.dense = true;
    const Trajectory t = run_gd(cfg);
    CHECK(t.value[0] == doctest::Approx(0.5));
    CHECK(t.value[1] == doctest::Approx(0.125));
    for (std::int64_t k = 0; k <= 10; ++k)
        CHECK(t.value_at(k) == doctest::Approx(0.5 * std::pow(0.25, double(k))).epsilon(1e-13));

    auto big = base_cfg(2.0, 0.5, 4000, 20000);
    const Trajectory tb = run_gd(big);
    for (std::size_t j = 1; j < tb.value.size(); ++j) CHECK(tb.value[j] <= tb.value[j - 1] + 1e-18);
}

TEST_CASE("gd iterate-norm criterion") {
    auto cfg = base_cfg(2.0, 2.0, 3, 16);
    cfg.criterion = Criterion::iterate_norm;
    cfg.dense = true;
    const Trajectory t = run_gd(cfg);
    // sum delta^2 i^-beta (1-lambda_i)^(2k) by hand
    for (std::int64_t k : {0, 1, 5}) {
        double want = 0.0;
        for (int i = 1; i <= 3; ++i)
            want += std::pow(double(i), -2.0) * std::pow(1.0 - 0.5 * std::pow(double(i), -2.0), 2.0 * k);
        CHECK(t.value_at(k) == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("nesterov modes: lambda=0 invariance and xi cross-check") {
    const auto flat = kernels::mode_sequence(0.0, kernels::Recursion::nesterov, 1.0, 200);
    for (double v : flat) CHECK(v == doctest::Approx(1.0));

    // k b_k matches xi_{k}: xi_{k+1} = (1-l)(2 xi_k - xi_{k-1}), xi_0 = 0, xi_1 = 1
    for (double lam : {0.1, 0.5, 0.9}) {
        const auto b = kernels::mode_sequence(lam, kernels::Recursion::nesterov, 1.0, 1000);
        double xi_prev = 0.0, xi = 1.0;
        for (int k = 1; k <= 1000; ++k) {
            CHECK(std::abs(double(k) * b[k] - xi) <= 1e-12 * std::max(1.0, std::abs(xi)));
            const double nxt = (1.0 - lam) * (2.0 * xi - xi_prev);
            xi_prev = xi;
            xi = nxt;
        }
    }
}

TEST_CASE("heavy-ball modes: lambda=0 and undamped xi recursion") {
    const auto flat = kernels::mode_sequence(0.0, kernels::Recursion::heavy_ball, 1.0, 100);
    for (double v : flat) CHECK(v == doctest::Approx(1.0));

    for (double lam : {0.3, 0.8}) {
        const auto b = kernels::mode_sequence(lam, kernels::Recursion::heavy_ball, 1.0, 1000);
        double xi_prev = 0.0, xi = 1.0;
        for (int k = 1; k <= 1000; ++k) {
            CHECK(std::abs(double(k) * b[k] - xi) <= 1e-11 * std::max(1.0, std::abs(xi)));
            const double nxt = (2.0 - lam) * xi - xi_prev;
            xi_prev = xi;
            xi = nxt;
        }
    }
}

TEST_CASE("nesterov trajectory matches the serial reference") {
    auto cfg = base_cfg(2.0, 2.0, 3000, 3000);
    cfg.algorithm = Algorithm::nesterov;
    const Trajectory t = run_nesterov(cfg);
    std::vector<double> lam(3000), w(3000);
    for (std::size_t i = 1; i <= 3000; ++i) {
        lam[i - 1] = cfg.spectrum.eigenvalue(i);
        w[i - 1] = cfg.spectrum.weight(i);
    }
    const auto ref =
        kernels::reference::mode_recursion_sum(lam, w, kernels::Recursion::nesterov, 1.0, 3000);
    for (std::size_t k = 0; k < t.value.size(); ++k) {
        CHECK(std::abs(t.value[k] - ref.trajectory[k]) <=
              1e-12 * std::max(ref.trajectory[k], 1e-300));
    }
    CHECK(t.meta.deactivated_modes > 0);
}

TEST_CASE("trajectories are bit-stable across thread counts") {
    auto cfg = base_cfg(2.0, 2.0, 10000, 500);
    cfg.algorithm = Algorithm::nesterov;
    par::set_max_threads(1);
    const Trajectory t1 = run_nesterov(cfg);
    par::set_max_threads(4);
    const Trajectory t4 = run_nesterov(cfg);
    par::set_max_threads(0);
    REQUIRE(t1.value.size() == t4.value.size());
    CHECK(std::memcmp(t1.value.data(), t4.value.data(), t1.value.size() * sizeof(double)) == 0);
}

TEST_CASE("oscillation envelopes: nesterov contracts, heavy-ball does not") {
    // For a discrete power-law spectrum the normalized oscillation amplitude
    // decays like k^(-1/4), so the early window sits 64x before the late one
    // to leave a decisive margin around the 1/2 threshold.
    // lambda_N K^2 <= 2 so the truncation edge does not add oscillation
    const std::int64_t K = 40000;
    auto cfg = base_cfg(2.0, 2.0, 20000, K);  // omega = 1.5
    cfg.algorithm = Algorithm::nesterov;
    cfg.tail_correction = true;
    const Trajectory nest = run_nesterov(cfg);
    cfg.algorithm = Algorithm::heavy_ball;
    const Trajectory hb = run_heavy_ball(cfg);
    std::vector<double> rn(K + 1, 0.0), rh(K + 1, 0.0);
    for (std::int64_t k = 2; k <= K; ++k) {
        rn[k] = nest.value[k] * std::pow(double(k), 2.5);
        rh[k] = hb.value[k] * double(k) * double(k);
    }
    const double nest_early = amplitude(rn, K / 256, K / 128);
    const double nest_late = amplitude(rn, K / 2, K);
    CHECK(nest_late <= 0.5 * nest_early);
    const double hb_early = amplitude(rh, K / 256, K / 128);
    const double hb_late = amplitude(rh, K / 2, K);
    CHECK(hb_late >= 0.8 * hb_early);
}

TEST_CASE("avg_gd closed form") {
    auto cfg = base_cfg(2.0, 2.0, 1, 32);
    cfg.algorithm = Algorithm::avg_gd;
    cfg.dense = true;
    const Trajectory t = run_avg_gd(cfg);
    CHECK(t.value[0] == doctest::Approx(0.5));  // m_0 = 1
    for (std::int64_t k : {1, 3, 10}) {
        double m = 0.0;  // explicit average of (1-l)^j
        for (int j = 0; j <= k; ++j) m += std::pow(0.5, j);
        m /= (k + 1.0);
        CHECK(t.value_at(k) == doctest::Approx(0.5 * m * m).epsilon(1e-13));
    }

    // omega = 3 (gamma = 1 normalization): k^2 a_k -> sum_i w_i / lambda_i^2
    auto avg = base_cfg(2.0, 5.0, 4000, 60000);
    avg.spectrum.l_top = 0.5;  // gamma = gamma_l / l = 1
    avg.algorithm = Algorithm::avg_gd;
    const Trajectory ta = run_avg_gd(avg);
    double target = 0.0;
    for (std::size_t i = 1; i <= avg.spectrum.n_modes; ++i)
        target += avg.spectrum.weight(i) / (avg.spectrum.eigenvalue(i) * avg.spectrum.eigenvalue(i));
    const double got = ta.value.back() * ta.k.back() * ta.k.back();
    CHECK(got == doctest::Approx(target).epsilon(2e-3));
}

TEST_CASE("noisy gd reduces to gd at varsigma=0 and has the single-atom closed form") {
    auto cfg = base_cfg(2.0, 2.0, 50, 200);
    cfg.noise = NoiseConfig{1.0, 0.0, false, 1, std::nullopt};
    cfg.dense = true;
    const Trajectory noisy = run_gd_noisy(cfg);
    IterationConfig plain = cfg;
    plain.noise.reset();
    const Trajectory clean = run_gd(plain);
    for (std::size_t j = 0; j < noisy.value.size(); ++j)
        CHECK(noisy.value[j] == doctest::Approx(clean.value[j]).epsilon(1e-14));

    // theta_0 = 0, single atom: a_k = (s^2 l/(2 g)) (1-(1-l)^(2k))/(1-(1-l)^2)
    auto atom = base_cfg(2.0, 2.0, 1, 100);
    atom.spectrum.delta = 0.0;
    atom.noise = NoiseConfig{0.7, 1.3, false, 1, std::nullopt};
    atom.dense = true;
    const Trajectory t = run_gd_noisy(atom);
    const double l = 0.5, g = 0.5, s2 = 1.3 * 1.3;
    for (std::int64_t k : {1, 2, 10, 100}) {
        const double want = 0.5 * s2 * (l / g) * (1.0 - std::pow(1.0 - l, 2.0 * k)) / (1.0 - (1.0 - l) * (1.0 - l));
        CHECK(t.value_at(k) == doctest::Approx(want).epsilon(1e-12));
    }
    // decomposition: noisy = bias + variance with the variance term from
    // a zero-init run
    auto both = base_cfg(2.0, 2.0, 20, 50);
    both.noise = NoiseConfig{1.0, 0.9, false, 1, std::nullopt};
    both.dense = true;
    auto vonly = both;
    vonly.spectrum.delta = 0.0;
    auto bonly = both;
    bonly.noise.reset();
    const Trajectory tb = run_gd_noisy(both);
    const Trajectory tv = run_gd_noisy(vonly);
    const Trajectory tc = run_gd(bonly);
    for (std::size_t j = 0; j < tb.value.size(); ++j)
        CHECK(tb.value[j] == doctest::Approx(tv.value[j] + tc.value[j]).epsilon(1e-12));
}

TEST_CASE("noisy gd monte carlo agrees with the exact expectation") {
    auto cfg = base_cfg(2.0, 2.0, 50, 400);
    cfg.noise = NoiseConfig{1.0, 1.0, true, 200, 99};
    const Trajectory mc = run_gd_noisy(cfg);
    cfg.noise->monte_carlo = false;
    cfg.dense = false;
    const Trajectory exact = run_gd_noisy(cfg);
    REQUIRE(mc.value.size() == exact.value.size());
    // a three-sigma band at every grid point flips by chance over ~100
    // points, so allow isolated marginal excursions up to four sigma
    std::size_t beyond3 = 0;
    for (std::size_t j = 0; j < mc.value.size(); ++j) {
        const double dev = std::abs(mc.value[j] - exact.value[j]);
        CHECK(dev <= 4.0 * mc.stderr_[j] + 1e-12);
        if (dev > 3.0 * mc.stderr_[j] + 1e-12) ++beyond3;
    }
    CHECK(beyond3 <= mc.value.size() / 20);
}

TEST_CASE("noisy nesterov reduces to nesterov at varsigma=0") {
    auto cfg = base_cfg(2.0, 2.0, 200, 300);
    cfg.algorithm = Algorithm::nesterov;
    cfg.noise = NoiseConfig{1.0, 0.0, false, 1, std::nullopt};
    const Trajectory noisy = run_nesterov_noisy(cfg);
    auto plain = cfg;
    plain.noise.reset();
    const Trajectory clean = run_nesterov(plain);
    for (std::size_t k = 0; k < noisy.value.size(); ++k)
        CHECK(noisy.value[k] ==
              doctest::Approx(clean.value[k]).epsilon(1e-11).scale(clean.value[0]));
}

TEST_CASE("noisy nesterov exact vs monte carlo") {
    auto cfg = base_cfg(2.0, 2.0, 50, 300);
    cfg.spectrum.delta = 0.0;
    cfg.algorithm = Algorithm::nesterov;
    cfg.noise = NoiseConfig{1.0, 1.0, true, 200, 7};
    const Trajectory mc = run_nesterov_noisy(cfg);
    cfg.noise->monte_carlo = false;
    const Trajectory exact = run_nesterov_noisy(cfg);
    for (std::size_t j = 0; j < mc.k.size(); ++j) {
        const double ex = exact.value_at(static_cast<std::int64_t>(mc.k[j]));
        CHECK(std::abs(mc.value[j] - ex) <= 3.0 * mc.stderr_[j] + 1e-12);
    }
}

TEST_CASE("noisy nesterov serial reference agrees with the blocked kernel") {
    std::vector<double> lam{0.5, 0.1, 0.01}, init{1.0, 0.5, 0.25}, nv{0.3, 0.2, 0.1},
        ow{0.5, 0.05, 0.005};
    const auto a = kernels::noisy_nesterov_moments(lam, init, nv, ow, 500);
    const auto b = kernels::reference::noisy_nesterov_moments(lam, init, nv, ow, 500);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("random initial condition") {
    auto cfg = base_cfg(2.0, 2.0, 100, 100);
    cfg.dense = false;

    // Rademacher: r^2 = 1, so a_k is deterministic
    auto [mean_r, var_r] = run_gd_random_init(cfg, -2.0, 16, 5);
    const Trajectory det = run_gd(cfg);
    for (std::size_t j = 0; j < var_r.value.size(); ++j) {
        CHECK(var_r.value[j] == doctest::Approx(0.0));
        CHECK(mean_r.value[j] == doctest::Approx(det.value[j]).epsilon(1e-12));
    }

    // closed-form variance at k=0, single atom: (L^2 D^4/4)(kurt+2)
    auto one = base_cfg(2.0, 2.0, 1, 4);
    one.dense = true;
    const Trajectory v = gd_random_init_var_exact(one, 0.0);
    CHECK(v.value[0] == doctest::Approx(0.5));

    // Gaussian: empirical variance tracks the closed form within 3 stderr
    auto big = base_cfg(2.0, 2.0, 200, 2000);
    auto [mean_g, var_g] = run_gd_random_init(big, 0.0, 400, 11);
    const Trajectory exact = gd_random_init_var_exact(big, 0.0);
    std::size_t checked = 0;
    for (std::size_t j = 0; j < var_g.value.size(); ++j) {
        if (var_g.stderr_[j] == 0.0) continue;
        CHECK(std::abs(var_g.value[j] - exact.value[j]) <= 4.0 * var_g.stderr_[j] + 1e-18);
        ++checked;
    }
    CHECK(checked > 10);
    CHECK_THROWS_AS(run_gd_random_init(cfg, 1.0, 8, 1), ValidationError);
}

TEST_CASE("richardson extrapolation") {
    Trajectory c;
    c.k.resize(65);
    c.value.assign(65, 3.25);
    for (std::size_t i = 0; i < c.k.size(); ++i) c.k[i] = double(i);
    const Trajectory rc = richardson(c, 1.5);
    for (double v : rc.value) CHECK(v == doctest::Approx(3.25));

    // a_k = l + c k^-a vanishes exactly at even k
    Trajectory p = c;
    for (std::size_t i = 1; i < p.k.size(); ++i) p.value[i] = 2.0 + 3.0 * std::pow(double(i), -2.0);
    p.value[0] = 2.0 + 3.0;
    const Trajectory rp = richardson(p, 2.0);
    for (std::size_t i = 2; i < rp.k.size(); i += 2) CHECK(rp.value[i] == doctest::Approx(2.0));

    // a_k = 1 + 1/k + 1/k^2 at k = 100 with alpha = 1
    Trajectory q;
    q.k.resize(101);
    q.value.resize(101);
    for (std::size_t i = 0; i < q.k.size(); ++i) {
        q.k[i] = double(i);
        q.value[i] = i == 0 ? 3.0 : 1.0 + 1.0 / double(i) + 1.0 / double(i * i);
    }
    const Trajectory rq = richardson(q, 1.0);
    CHECK(std::abs(rq.value[100] - 1.0) <= 4e-4);
}

TEST_CASE("config validation") {
    auto cfg = base_cfg(2.0, 2.0, 10, 1);
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.steps = 100;
    cfg.rho = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.rho = 1.0;
    cfg.noise = NoiseConfig{0.0, 1.0, true, 10, std::nullopt};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);  // MC without a seed
}
