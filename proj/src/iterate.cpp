#include "specdim/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specdim/kernels.hpp"
#include "specdim/parallel.hpp"
#include "specdim/rng.hpp"

namespace specdim {

namespace {

std::string spectrum_summary(const PowerLawSpectrum& s) {
    std::ostringstream os;
    os << "alpha=" << s.alpha << " beta=" << s.beta << " gamma_l=" << s.gamma_l
       << " delta=" << s.delta << " l=" << s.l_top << " modes=" << s.n_modes;
    return os.str();
}

std::vector<double> mode_lambdas(const PowerLawSpectrum& s) {
    std::vector<double> v(s.n_modes);
    for (std::size_t i = 1; i <= s.n_modes; ++i) v[i - 1] = s.eigenvalue(i);
    return v;
}

std::vector<double> mode_weights(const PowerLawSpectrum& s, Criterion crit) {
    std::vector<double> v(s.n_modes);
    for (std::size_t i = 1; i <= s.n_modes; ++i)
        v[i - 1] = crit == Criterion::function_value ? s.weight(i) : s.init_coord_sq(i);
    return v;
}

double dropped_mass(const IterationConfig& cfg) {
    if (!cfg.tail_correction) return 0.0;
    if (cfg.criterion == Criterion::function_value) return tail_mass(cfg.spectrum, cfg.spectrum.n_modes);
    // iterate-norm weights are delta^2 i^-beta; requires beta > 1
    const auto& s = cfg.spectrum;
    if (!(s.beta > 1.0)) throw ValidationError("iterate-norm tail correction requires beta > 1");
    return s.delta * s.delta * power_tail(s.beta, s.n_modes);
}

std::vector<std::int64_t> eval_points(const IterationConfig& cfg) {
    if (cfg.dense) {
        std::vector<std::int64_t> ks(cfg.steps + 1);
        for (std::int64_t k = 0; k <= cfg.steps; ++k) ks[k] = k;
        return ks;
    }
    return log_k_grid(cfg.steps);
}

Trajectory from_dense(std::vector<double> values, const IterationConfig& cfg, const char* name) {
    Trajectory t;
    t.k.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) t.k[i] = static_cast<double>(i);
    t.value = std::move(values);
    t.meta.algorithm = name;
    t.meta.criterion = cfg.criterion == Criterion::function_value ? "function_value" : "iterate_norm";
    t.meta.rho = cfg.rho;
    t.meta.modes = cfg.spectrum.n_modes;
    t.meta.spectrum = spectrum_summary(cfg.spectrum);
    return t;
}

Trajectory from_grid(const std::vector<std::int64_t>& ks, std::vector<double> values,
                     const IterationConfig& cfg, const char* name) {
    Trajectory t;
    t.k.resize(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) t.k[i] = static_cast<double>(ks[i]);
    t.value = std::move(values);
    t.meta.algorithm = name;
    t.meta.criterion = cfg.criterion == Criterion::function_value ? "function_value" : "iterate_norm";
    t.meta.rho = cfg.rho;
    t.meta.modes = cfg.spectrum.n_modes;
    t.meta.spectrum = spectrum_summary(cfg.spectrum);
    return t;
}

void add_constant(Trajectory& t, double c) {
    if (c == 0.0) return;
    for (double& v : t.value) v += c;
    t.meta.tail_mass_added = c;
}

}  // namespace

void IterationConfig::validate() const {
    spectrum.validate();
    if (steps < 2) throw ValidationError("steps must be at least 2");
    if (!(rho > 0.0)) throw ValidationError("rho must be positive");
    if (noise) {
        if (!(noise->varsigma >= 0.0)) throw ValidationError("varsigma must be nonnegative");
        if (noise->monte_carlo) {
            if (noise->replications < 1) throw ValidationError("replications must be >= 1");
            if (!noise->seed) throw ValidationError("monte_carlo mode requires a seed");
        }
    }
}

bool Trajectory::dense() const {
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i] != static_cast<double>(i)) return false;
    return !k.empty();
}

std::size_t Trajectory::index_of(std::int64_t kq) const {
    const double target = static_cast<double>(kq);
    auto it = std::lower_bound(k.begin(), k.end(), target);
    if (it == k.end() || *it != target)
        throw ValidationError("trajectory does not store k = " + std::to_string(kq));
    return static_cast<std::size_t>(it - k.begin());
}

double Trajectory::value_at(std::int64_t kq) const { return value[index_of(kq)]; }

std::vector<std::int64_t> log_k_grid(std::int64_t K) {
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 0; k <= std::min<std::int64_t>(K, 4); ++k) ks.push_back(k);
    const double ratio = std::pow(10.0, 1.0 / 60.0);
    double x = 4.0;
    while (true) {
        x *= ratio;
        const std::int64_t k = static_cast<std::int64_t>(std::llround(x));
        if (k >= K) break;
        if (k > ks.back()) ks.push_back(k);
    }
    if (K > ks.back()) ks.push_back(K);
    return ks;
}

Trajectory run_gd(const IterationConfig& cfg) {
    cfg.validate();
    if (cfg.algorithm != Algorithm::gd) throw ValidationError("run_gd requires algorithm = gd");
    if (cfg.noise) throw ValidationError("run_gd is the noiseless path; use run_gd_noisy");
    const auto lam = mode_lambdas(cfg.spectrum);
    const auto w = mode_weights(cfg.spectrum, cfg.criterion);
    const auto ks = eval_points(cfg);
    std::vector<double> out(ks.size());
    kernels::factor_sum(lam, w, ks, kernels::Factor::gd, out.data());
    Trajectory t = from_grid(ks, std::move(out), cfg, "gd");
    add_constant(t, dropped_mass(cfg));
    return t;
}

namespace {

Trajectory run_momentum(const IterationConfig& cfg, kernels::Recursion rec, const char* name) {
    cfg.validate();
    if (cfg.criterion != Criterion::function_value)
        throw ValidationError("momentum runs support the function-value criterion");
    const auto lam = mode_lambdas(cfg.spectrum);
    const auto w = mode_weights(cfg.spectrum, cfg.criterion);
    auto res = kernels::mode_recursion_sum(lam, w, rec, cfg.rho, cfg.steps);
    Trajectory t = from_dense(std::move(res.trajectory), cfg, name);
    t.meta.deactivated_modes = res.deactivated;
    add_constant(t, dropped_mass(cfg));
    return t;
}

}  // namespace

Trajectory run_nesterov(const IterationConfig& cfg) {
    if (cfg.algorithm != Algorithm::nesterov)
        throw ValidationError("run_nesterov requires algorithm = nesterov");
    if (cfg.noise) throw ValidationError("use run_nesterov_noisy for the noisy recursion");
    return run_momentum(cfg, kernels::Recursion::nesterov, "nesterov");
}

Trajectory run_heavy_ball(const IterationConfig& cfg) {
    if (cfg.algorithm != Algorithm::heavy_ball)
        throw ValidationError("run_heavy_ball requires algorithm = heavy_ball");
    return run_momentum(cfg, kernels::Recursion::heavy_ball, "heavy_ball");
}

Trajectory run_avg_gd(const IterationConfig& cfg) {
    cfg.validate();
    if (cfg.algorithm != Algorithm::avg_gd)
        throw ValidationError("run_avg_gd requires algorithm = avg_gd");
    const auto lam = mode_lambdas(cfg.spectrum);
    const auto w = mode_weights(cfg.spectrum, cfg.criterion);
    const auto ks = eval_points(cfg);
    std::vector<double> out(ks.size());
    kernels::factor_sum(lam, w, ks, kernels::Factor::avg_gd, out.data());
    Trajectory t = from_grid(ks, std::move(out), cfg, "avg_gd");
    add_constant(t, dropped_mass(cfg));
    return t;
}

Trajectory run_gd_noisy(const IterationConfig& cfg) {
    cfg.validate();
    if (!cfg.noise) throw ValidationError("run_gd_noisy requires a noise configuration");
    const auto& s = cfg.spectrum;
    const auto& nz = *cfg.noise;
    const double gamma = s.step_size();
    const auto lam = mode_lambdas(s);
    const auto w = mode_weights(s, Criterion::function_value);
    // noise weights (varsigma^2/2) i^-beta' h_i for the geometric noise sum
    std::vector<double> nw(s.n_modes);
    for (std::size_t i = 1; i <= s.n_modes; ++i)
        nw[i - 1] = 0.5 * nz.varsigma * nz.varsigma * std::pow(double(i), -nz.beta_prime) *
                    s.hessian_eigenvalue(i);

    if (!nz.monte_carlo) {
        const auto ks = eval_points(cfg);
        std::vector<double> bias(ks.size()), var(ks.size());
        kernels::factor_sum(lam, w, ks, kernels::Factor::gd, bias.data());
        kernels::factor_sum(lam, nw, ks, kernels::Factor::noise_g, var.data());
        std::vector<double> out(ks.size());
        for (std::size_t j = 0; j < ks.size(); ++j) out[j] = bias[j] + var[j];
        Trajectory t = from_grid(ks, std::move(out), cfg, "gd_noisy");
        if (cfg.tail_correction) {
            // dropped bias modes contribute their mass; dropped noise modes
            // have g_k ~ k
            const double bias_tail = tail_mass(s, s.n_modes);
            const double noise_tail = 0.5 * nz.varsigma * nz.varsigma * s.l_top *
                                      power_tail(s.alpha + nz.beta_prime, s.n_modes);
            for (std::size_t j = 0; j < t.value.size(); ++j)
                t.value[j] += bias_tail + noise_tail * static_cast<double>(ks[j]);
            t.meta.tail_mass_added = bias_tail;
        }
        return t;
    }

    // Monte Carlo: per-mode AR(1) theta' = (1-lambda) theta + eps
    const auto ks = eval_points(cfg);
    const int R = nz.replications;
    std::vector<std::vector<double>> per_rep(R);
    std::vector<double> noise_sd(s.n_modes), outw(s.n_modes);
    for (std::size_t i = 1; i <= s.n_modes; ++i) {
        noise_sd[i - 1] = nz.varsigma * std::pow(double(i), -0.5 * nz.beta_prime);
        outw[i - 1] = 0.5 / gamma * lam[i - 1];
    }
    par::for_blocks(R, 1, [&](std::size_t rep, std::size_t, std::size_t) {
        SplitRng rng(*nz.seed, rep);
        std::vector<double> theta(s.n_modes);
        for (std::size_t i = 1; i <= s.n_modes; ++i) theta[i - 1] = s.delta * std::pow(double(i), -0.5 * s.beta);
        std::vector<double> vals(ks.size());
        std::size_t next = 0;
        for (std::int64_t k = 0; k <= cfg.steps; ++k) {
            if (next < ks.size() && ks[next] == k) {
                double a = 0.0;
                for (std::size_t i = 0; i < s.n_modes; ++i) a += outw[i] * theta[i] * theta[i];
                vals[next++] = a;
            }
            if (k == cfg.steps) break;
            for (std::size_t i = 0; i < s.n_modes; ++i)
                theta[i] = (1.0 - lam[i]) * theta[i] + noise_sd[i] * rng.gaussian();
        }
        per_rep[rep] = std::move(vals);
    });
    std::vector<double> mean(ks.size(), 0.0), se(ks.size(), 0.0);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        double m = 0.0;
        for (int r = 0; r < R; ++r) m += per_rep[r][j];
        m /= R;
        double v = 0.0;
        for (int r = 0; r < R; ++r) v += (per_rep[r][j] - m) * (per_rep[r][j] - m);
        mean[j] = m;
        se[j] = R > 1 ? std::sqrt(v / (R - 1.0) / R) : 0.0;
    }
    Trajectory t = from_grid(ks, std::move(mean), cfg, "gd_noisy_mc");
    t.stderr_ = std::move(se);
    t.meta.seed = nz.seed;
    return t;
}

Trajectory run_nesterov_noisy(const IterationConfig& cfg) {
    cfg.validate();
    if (!cfg.noise) throw ValidationError("run_nesterov_noisy requires a noise configuration");
    if (std::abs(cfg.rho - 1.0) > 1e-12)
        throw ValidationError("the noisy recursion is implemented for rho = 1");
    const auto& s = cfg.spectrum;
    const auto& nz = *cfg.noise;
    const double gamma = s.step_size();
    const auto lam = mode_lambdas(s);
    std::vector<double> init(s.n_modes), nv(s.n_modes), outw(s.n_modes);
    for (std::size_t i = 1; i <= s.n_modes; ++i) {
        init[i - 1] = s.delta * std::pow(double(i), -0.5 * s.beta);
        nv[i - 1] = nz.varsigma * nz.varsigma * std::pow(double(i), -nz.beta_prime);
        outw[i - 1] = 0.5 / gamma * lam[i - 1];
    }

    if (!nz.monte_carlo) {
        auto vals = kernels::noisy_nesterov_moments(lam, init, nv, outw, cfg.steps);
        Trajectory t = from_dense(std::move(vals), cfg, "nesterov_noisy");
        if (cfg.tail_correction) {
            // dropped modes: bias factors ~1 plus the lambda->0 noise moments
            const double bias_tail = tail_mass(s, s.n_modes);
            const double noise_tail = 0.5 / gamma * nz.varsigma * nz.varsigma * s.gamma_l *
                                      power_tail(s.alpha + nz.beta_prime, s.n_modes);
            const auto zero_mode = kernels::noisy_nesterov_zero_mode(cfg.steps);
            for (std::size_t k = 0; k < t.value.size(); ++k)
                t.value[k] += bias_tail + noise_tail * zero_mode[k];
            t.meta.tail_mass_added = bias_tail;
        }
        return t;
    }

    const auto ks = log_k_grid(cfg.steps);
    const int R = nz.replications;
    std::vector<std::vector<double>> per_rep(R);
    par::for_blocks(R, 1, [&](std::size_t rep, std::size_t, std::size_t) {
        SplitRng rng(*nz.seed, rep);
        std::vector<double> cur(init.begin(), init.end()), prev(init.begin(), init.end());
        std::vector<double> vals(ks.size());
        std::size_t next = 0;
        auto record = [&](std::int64_t k) {
            if (next < ks.size() && ks[next] == k) {
                double a = 0.0;
                for (std::size_t i = 0; i < s.n_modes; ++i) a += outw[i] * cur[i] * cur[i];
                vals[next++] = a;
            }
        };
        record(0);  // theta_0 == theta_1
        record(1);
        for (std::int64_t k = 1; k < cfg.steps; ++k) {
            const double kk = static_cast<double>(k);
            for (std::size_t i = 0; i < s.n_modes; ++i) {
                const double c1 = (1.0 - lam[i]) * 2.0 * kk / (kk + 1.0);
                const double c2 = -(1.0 - lam[i]) * (kk - 1.0) / (kk + 1.0);
                const double nx = c1 * cur[i] + c2 * prev[i] + std::sqrt(nv[i]) * rng.gaussian();
                prev[i] = cur[i];
                cur[i] = nx;
            }
            record(k + 1);
        }
        per_rep[rep] = std::move(vals);
    });
    std::vector<double> mean(ks.size(), 0.0), se(ks.size(), 0.0);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        double m = 0.0;
        for (int r = 0; r < R; ++r) m += per_rep[r][j];
        m /= R;
        double v = 0.0;
        for (int r = 0; r < R; ++r) v += (per_rep[r][j] - m) * (per_rep[r][j] - m);
        mean[j] = m;
        se[j] = R > 1 ? std::sqrt(v / (R - 1.0) / R) : 0.0;
    }
    Trajectory t = from_grid(ks, std::move(mean), cfg, "nesterov_noisy_mc");
    t.stderr_ = std::move(se);
    t.meta.seed = nz.seed;
    return t;
}

std::pair<Trajectory, Trajectory> run_gd_random_init(const IterationConfig& cfg, double kurtosis,
                                                     int replications, std::uint64_t seed) {
    cfg.validate();
    if (replications < 2) throw ValidationError("random-init runs need replications >= 2");
    const bool rademacher = std::abs(kurtosis + 2.0) < 1e-12;
    const bool gaussian = std::abs(kurtosis) < 1e-12;
    if (!rademacher && !gaussian)
        throw ValidationError("sampling supports kurtosis -2 (Rademacher) and 0 (Gaussian)");
    const auto& s = cfg.spectrum;
    const auto lam = mode_lambdas(s);
    const auto w = mode_weights(s, Criterion::function_value);
    const auto ks = eval_points(cfg);
    // factor matrix F[j][i] = w_i (1-lambda_i)^(2 k_j), shared by replications
    std::vector<std::vector<double>> F(ks.size(), std::vector<double>(s.n_modes));
    par::for_indices(ks.size(), [&](std::size_t j) {
        for (std::size_t i = 0; i < s.n_modes; ++i) {
            const double e = 2.0 * static_cast<double>(ks[j]) * std::log1p(-lam[i]);
            F[j][i] = w[i] * (e < -745.0 ? 0.0 : std::exp(e));
        }
    });
    std::vector<std::vector<double>> per_rep(replications);
    par::for_blocks(replications, 1, [&](std::size_t rep, std::size_t, std::size_t) {
        SplitRng rng(seed, rep);
        std::vector<double> r2(s.n_modes);
        for (std::size_t i = 0; i < s.n_modes; ++i) {
            const double r = rademacher ? rng.rademacher() : rng.gaussian();
            r2[i] = r * r;
        }
        std::vector<double> vals(ks.size());
        for (std::size_t j = 0; j < ks.size(); ++j) {
            double a = 0.0;
            for (std::size_t i = 0; i < s.n_modes; ++i) a += F[j][i] * r2[i];
            vals[j] = a;
        }
        per_rep[rep] = std::move(vals);
    });
    Trajectory mean = from_grid(ks, std::vector<double>(ks.size(), 0.0), cfg, "gd_random_init_mean");
    Trajectory var = from_grid(ks, std::vector<double>(ks.size(), 0.0), cfg, "gd_random_init_var");
    mean.stderr_.assign(ks.size(), 0.0);
    var.stderr_.assign(ks.size(), 0.0);
    const int R = replications;
    for (std::size_t j = 0; j < ks.size(); ++j) {
        double m = 0.0;
        for (int r = 0; r < R; ++r) m += per_rep[r][j];
        m /= R;
        double m2 = 0.0, m4 = 0.0;
        for (int r = 0; r < R; ++r) {
            const double d = per_rep[r][j] - m;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        const double sample_var = m2 / (R - 1.0);
        m2 /= R;
        m4 /= R;
        mean.value[j] = m;
        mean.stderr_[j] = std::sqrt(sample_var / R);
        var.value[j] = sample_var;
        // stderr of the sample variance from the fourth central moment
        const double var_of_var = (m4 - (R - 3.0) / (R - 1.0) * m2 * m2) / R;
        var.stderr_[j] = var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
    }
    mean.meta.seed = seed;
    var.meta.seed = seed;
    return {std::move(mean), std::move(var)};
}

Trajectory gd_random_init_var_exact(const IterationConfig& cfg, double kurtosis) {
    cfg.validate();
    const auto& s = cfg.spectrum;
    const auto lam = mode_lambdas(s);
    std::vector<double> vw(s.n_modes);
    const double amp = s.l_top * s.l_top * std::pow(s.delta, 4) / 4.0 * (kurtosis + 2.0);
    for (std::size_t i = 1; i <= s.n_modes; ++i)
        vw[i - 1] = amp * std::pow(double(i), -2.0 * (s.alpha + s.beta));
    const auto ks = eval_points(cfg);
    std::vector<double> out(ks.size());
    kernels::factor_sum(lam, vw, ks, kernels::Factor::gd4, out.data());
    return from_grid(ks, std::move(out), cfg, "gd_random_init_var_exact");
}

Trajectory richardson(const Trajectory& traj, double alpha_exp) {
    if (!(alpha_exp > 0.0)) throw ValidationError("richardson requires alpha > 0");
    if (traj.k.size() < 2) throw ValidationError("richardson requires at least two points");
    const double p2 = std::pow(2.0, alpha_exp);
    Trajectory out = traj;
    out.meta.algorithm = traj.meta.algorithm + "+richardson";
    out.stderr_.clear();
    for (std::size_t j = 0; j < traj.k.size(); ++j) {
        const std::int64_t kj = static_cast<std::int64_t>(traj.k[j]);
        const double ahalf = traj.value_at(kj / 2);
        out.value[j] = (p2 * traj.value[j] - ahalf) / (p2 - 1.0);
    }
    return out;
}

}  // namespace specdim
