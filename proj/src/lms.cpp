#include "specdim/lms.hpp"

#include <cmath>
#include <sstream>

#include "specdim/parallel.hpp"
#include "specdim/rng.hpp"

namespace specdim {

void LmsConfig::validate() const {
    if (d == 0) throw ValidationError("d must be positive");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!(l_top > 0.0)) throw ValidationError("l_top must be positive");
    if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    if (!(varsigma >= 0.0)) throw ValidationError("varsigma must be nonnegative");
    if (!(kurtosis >= -2.0)) throw ValidationError("excess kurtosis is at least -2");
    // every diagonal entry of V must stay positive
    const double top = gamma * h(1);
    if (!(top * (2.0 - (kurtosis + 2.0) * top) > 0.0))
        throw StepSizeError("gamma h_1 (2 - (kurtosis+2) gamma h_1) must be positive");
}

double LmsConfig::h(std::size_t i) const { return l_top * std::pow(double(i), -alpha); }
double LmsConfig::init_coord_sq(std::size_t i) const {
    return delta * delta * std::pow(double(i), -beta);
}

double upsilon(const LmsConfig& cfg) {
    cfg.validate();
    double s = 0.0;
    for (std::size_t i = cfg.d; i >= 1; --i) {
        const double gh = cfg.gamma * cfg.h(i);
        const double den = 2.0 - (cfg.kurtosis + 2.0) * gh;
        if (!(den > 0.0)) throw StepSizeError("upsilon denominator is not positive");
        s += gh / den;
    }
    return s;
}

double gamma_max(const LmsConfig& cfg) {
    // upsilon is increasing in gamma on the interval with positive
    // denominators; bisect upsilon(gamma) = 1
    double trh = 0.0;
    for (std::size_t i = cfg.d; i >= 1; --i) trh += cfg.h(i);
    if (cfg.kurtosis + 2.0 <= 0.0) return 2.0 / trh;
    double hi = 2.0 / ((cfg.kurtosis + 2.0) * cfg.h(1));  // denominator barrier
    double lo = 0.0;
    auto ups = [&](double g) {
        double s = 0.0;
        for (std::size_t i = cfg.d; i >= 1; --i) {
            const double gh = g * cfg.h(i);
            s += gh / (2.0 - (cfg.kurtosis + 2.0) * gh);
        }
        return s;
    };
    // keep the bracket inside the barrier
    double g1 = hi * (1.0 - 1e-12);
    if (ups(g1) < 1.0) return g1;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + g1);
        if (ups(mid) < 1.0)
            lo = mid;
        else
            g1 = mid;
        if (g1 - lo < 1e-15 * g1) break;
    }
    return 0.5 * (lo + g1);
}

double lms_bias_limit_constant(const LmsConfig& cfg) {
    cfg.validate();
    double s = 0.0;
    for (std::size_t i = cfg.d; i >= 1; --i) {
        const double den = 2.0 - (cfg.kurtosis + 2.0) * cfg.gamma * cfg.h(i);
        if (!(den > 0.0)) throw StepSizeError("tau denominator is not positive");
        s += cfg.init_coord_sq(i) / den;
    }
    return 0.5 * s;
}

Trajectory evolve_expected(const LmsConfig& cfg, std::int64_t steps) {
    cfg.validate();
    if (steps < 1) throw ValidationError("steps must be positive");
    const std::size_t d = cfg.d;
    std::vector<double> h(d), diag(d), dscale(d);
    for (std::size_t i = 0; i < d; ++i) {
        h[i] = cfg.h(i + 1);
        diag[i] = cfg.init_coord_sq(i + 1);
        // I - gamma V = Diag(1 - gamma(2h - gamma(kurt+2) h o h)) + gamma^2 h h'
        dscale[i] = 1.0 - cfg.gamma * (2.0 * h[i] - cfg.gamma * (cfg.kurtosis + 2.0) * h[i] * h[i]);
    }
    const double g2s2 = cfg.gamma * cfg.gamma * cfg.varsigma * cfg.varsigma;
    Trajectory t;
    t.k.resize(steps + 1);
    t.value.resize(steps + 1);
    for (std::int64_t k = 0; k <= steps; ++k) t.k[k] = static_cast<double>(k);
    auto half_dot = [&]() {
        double s = 0.0;
        for (std::size_t i = d; i-- > 0;) s += h[i] * diag[i];
        return 0.5 * s;
    };
    t.value[0] = half_dot();
    for (std::int64_t k = 1; k <= steps; ++k) {
        double hdot = 0.0;
        for (std::size_t i = d; i-- > 0;) hdot += h[i] * diag[i];
        const double g2h = cfg.gamma * cfg.gamma * hdot;
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            diag[i] = dscale[i] * diag[i] + g2h * h[i] + g2s2 * h[i];
            acc += h[i] * diag[i];
        }
        t.value[k] = 0.5 * acc;
    }
    t.meta.algorithm = "lms_expected";
    std::ostringstream os;
    os << "d=" << d << " alpha=" << cfg.alpha << " beta=" << cfg.beta << " gamma=" << cfg.gamma
       << " kurtosis=" << cfg.kurtosis << " varsigma=" << cfg.varsigma;
    const double u = upsilon(cfg);
    if (u >= 1.0) os << " [upsilon=" << u << " >= 1: divergent regime]";
    t.meta.spectrum = os.str();
    t.meta.modes = d;
    return t;
}

Trajectory run_lms_mc(const LmsConfig& cfg, std::int64_t steps) {
    cfg.validate();
    const bool rademacher = std::abs(cfg.kurtosis + 2.0) < 1e-12;
    const bool gaussian = std::abs(cfg.kurtosis) < 1e-12;
    if (!rademacher && !gaussian)
        throw ValidationError("sampling supports kurtosis -2 (Rademacher) and 0 (Gaussian)");
    if (cfg.replications < 1) throw ValidationError("replications must be >= 1");
    const std::size_t d = cfg.d;
    const auto ks = log_k_grid(steps);
    std::vector<double> h(d), sqrth(d), theta0(d);
    for (std::size_t i = 0; i < d; ++i) {
        h[i] = cfg.h(i + 1);
        sqrth[i] = std::sqrt(h[i]);
        theta0[i] = cfg.delta * std::pow(double(i + 1), -0.5 * cfg.beta);
    }
    const int R = cfg.replications;
    std::vector<std::vector<double>> per_rep(R);
    par::for_blocks(R, 1, [&](std::size_t rep, std::size_t, std::size_t) {
        SplitRng rng(cfg.seed, rep);
        std::vector<double> theta = theta0;
        std::vector<double> z(d);
        std::vector<double> vals(ks.size());
        std::size_t next = 0;
        for (std::int64_t k = 0; k <= steps; ++k) {
            if (next < ks.size() && ks[next] == k) {
                double a = 0.0;
                for (std::size_t i = 0; i < d; ++i) a += h[i] * theta[i] * theta[i];
                vals[next++] = 0.5 * a;
            }
            if (k == steps) break;
            double dot = 0.0;
            if (rademacher) {
                for (std::size_t i = 0; i < d; ++i) {
                    z[i] = rng.rademacher();
                    dot += sqrth[i] * z[i] * theta[i];
                }
            } else {
                for (std::size_t i = 0; i < d; ++i) {
                    z[i] = rng.gaussian();
                    dot += sqrth[i] * z[i] * theta[i];
                }
            }
            const double eps = cfg.varsigma > 0.0 ? cfg.varsigma * rng.gaussian() : 0.0;
            const double step = cfg.gamma * (dot - eps);
            for (std::size_t i = 0; i < d; ++i) theta[i] -= step * sqrth[i] * z[i];
        }
        per_rep[rep] = std::move(vals);
    });
    Trajectory t;
    t.k.resize(ks.size());
    t.value.assign(ks.size(), 0.0);
    t.stderr_.assign(ks.size(), 0.0);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        t.k[j] = static_cast<double>(ks[j]);
        double m = 0.0;
        for (int r = 0; r < R; ++r) m += per_rep[r][j];
        m /= R;
        double v = 0.0;
        for (int r = 0; r < R; ++r) v += (per_rep[r][j] - m) * (per_rep[r][j] - m);
        t.value[j] = m;
        t.stderr_[j] = R > 1 ? std::sqrt(v / (R - 1.0) / R) : 0.0;
    }
    t.meta.algorithm = "lms_mc";
    t.meta.seed = cfg.seed;
    t.meta.modes = d;
    return t;
}

Eigen::MatrixXd fourth_moment_operator(const LmsConfig& cfg) {
    cfg.validate();
    if (cfg.d > 32) throw ValidationError("the fourth-moment operator is materialized for d <= 32");
    if (std::abs(cfg.kurtosis + 2.0) > 1e-12)
        throw ValidationError("the fourth-moment operator requires Rademacher inputs");
    const std::size_t d = cfg.d;
    const double g = cfg.gamma;
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i) h[i] = cfg.h(i + 1);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(d * d, d * d);
    auto at = [d](std::size_t i, std::size_t j) { return i * d + j; };
    const double g2 = g * g, g3 = g2 * g, g4 = g2 * g2;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t r = at(i, j);
            if (i != j) {
                U(r, at(i, j)) += 1.0 - 2.0 * g * (h[i] + h[j]) + 8.0 * g2 * h[i] * h[j];
                for (std::size_t a = 0; a < d; ++a) {
                    U(r, at(i, a)) += g2 * h[j] * h[a] - 6.0 * g3 * h[i] * h[j] * h[a];
                    U(r, at(a, j)) += g2 * h[i] * h[a] - 6.0 * g3 * h[i] * h[j] * h[a];
                    for (std::size_t b = 0; b < d; ++b)
                        U(r, at(a, b)) += 3.0 * g4 * h[i] * h[j] * h[a] * h[b];
                    U(r, at(a, a)) += -2.0 * g4 * h[i] * h[j] * h[a] * h[a];
                }
                U(r, at(i, i)) += 4.0 * g3 * h[i] * h[i] * h[j];
                U(r, at(j, j)) += 4.0 * g3 * h[i] * h[j] * h[j];
            } else {
                U(r, at(i, i)) += 1.0 - 4.0 * g * h[i] + 8.0 * g3 * h[i] * h[i] * h[i];
                for (std::size_t a = 0; a < d; ++a) {
                    U(r, at(i, a)) += 6.0 * g2 * h[i] * h[a] - 12.0 * g3 * h[i] * h[i] * h[a];
                    for (std::size_t b = 0; b < d; ++b)
                        U(r, at(a, b)) += 3.0 * g4 * h[i] * h[i] * h[a] * h[b];
                    U(r, at(a, a)) += -2.0 * g4 * h[i] * h[i] * h[a] * h[a];
                }
            }
        }
    }
    return U;
}

std::vector<double> variance_of_performance(const LmsConfig& cfg, std::int64_t steps) {
    if (cfg.varsigma != 0.0)
        throw ValidationError("the fourth-moment propagation assumes varsigma = 0");
    const Eigen::MatrixXd U = fourth_moment_operator(cfg);
    const std::size_t d = cfg.d;
    Eigen::VectorXd v(d * d), hh(d * d);
    std::vector<double> h(d), p(d);
    for (std::size_t i = 0; i < d; ++i) {
        h[i] = cfg.h(i + 1);
        p[i] = cfg.init_coord_sq(i + 1);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            v(i * d + j) = p[i] * p[j];
            hh(i * d + j) = h[i] * h[j];
        }
    std::vector<double> b(steps + 1);
    b[0] = hh.dot(v);
    for (std::int64_t k = 1; k <= steps; ++k) {
        v = U * v;
        b[k] = hh.dot(v);
    }
    return b;
}

Eigen::MatrixXd t_apply(const LmsConfig& cfg, const Eigen::MatrixXd& m) {
    cfg.validate();
    if (cfg.d > 64) throw ValidationError("t_apply is a test-scale path (d <= 64)");
    if (m.rows() != static_cast<Eigen::Index>(cfg.d) || m.cols() != m.rows())
        throw ValidationError("t_apply expects a d x d symmetric matrix");
    const std::size_t d = cfg.d;
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i) h[i] = cfg.h(i + 1);
    double diag_dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) diag_dot += h[i] * m(i, i);
    Eigen::MatrixXd out(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) {
                out(i, i) = (2.0 * h[i] - cfg.gamma * (cfg.kurtosis + 2.0) * h[i] * h[i]) * m(i, i) -
                            cfg.gamma * h[i] * diag_dot;
            } else {
                out(i, j) = (h[i] + h[j] - 2.0 * cfg.gamma * h[i] * h[j]) * m(i, j);
            }
        }
    }
    return out;
}

}  // namespace specdim
