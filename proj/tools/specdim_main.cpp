// specdim: simulate linear optimization recursions on power-law spectra,
// evaluate their closed-form asymptotic equivalents, and verify the
// predicted scaling laws.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "specdim/asymptotics.hpp"
#include "specdim/harness.hpp"
#include "specdim/iterate.hpp"
#include "specdim/lms.hpp"
#include "specdim/parallel.hpp"
#include "specdim/ztrans.hpp"

namespace {

using nlohmann::json;
using namespace specdim;

// ---------------------------------------------------------------------------
// run configuration (file + flag overrides)
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string algorithm = "gd";
    PowerLawSpectrum spectrum;
    std::int64_t steps = 10000;
    double rho = 1.0;
    std::string criterion = "function_value";
    bool dense = false;
    bool tail_correction = true;
    std::optional<NoiseConfig> noise;
    LmsConfig lms;
    std::uint64_t seed = 1;
    std::string out = "out";
    double tolerance = 0.15;
};

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ValidationError("unknown key '" + it.key() + "' in " + where);
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    reject_unknown(j,
                   {"schema_version", "algorithm", "spectrum", "steps", "rho", "criterion",
                    "dense", "tail_correction", "noise", "lms", "seed", "out", "tolerance"},
                   "config");
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("config must declare schema_version = 1");
    RunConfig c;
    c.algorithm = j.value("algorithm", c.algorithm);
    c.steps = j.value("steps", c.steps);
    c.rho = j.value("rho", c.rho);
    c.criterion = j.value("criterion", c.criterion);
    c.dense = j.value("dense", c.dense);
    c.tail_correction = j.value("tail_correction", c.tail_correction);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.tolerance = j.value("tolerance", c.tolerance);
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        reject_unknown(s, {"alpha", "beta", "gamma_l", "delta", "l_top", "modes"}, "spectrum");
        c.spectrum.alpha = s.value("alpha", c.spectrum.alpha);
        c.spectrum.beta = s.value("beta", c.spectrum.beta);
        c.spectrum.gamma_l = s.value("gamma_l", c.spectrum.gamma_l);
        c.spectrum.delta = s.value("delta", c.spectrum.delta);
        c.spectrum.l_top = s.value("l_top", c.spectrum.l_top);
        c.spectrum.n_modes = s.value("modes", c.spectrum.n_modes);
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        reject_unknown(n, {"beta_prime", "varsigma", "monte_carlo", "replications", "seed"},
                       "noise");
        NoiseConfig nz;
        nz.beta_prime = n.value("beta_prime", 0.0);
        nz.varsigma = n.value("varsigma", 1.0);
        nz.monte_carlo = n.value("monte_carlo", false);
        nz.replications = n.value("replications", 100);
        if (n.contains("seed")) nz.seed = n["seed"].get<std::uint64_t>();
        c.noise = nz;
    }
    if (j.contains("lms")) {
        const auto& l = j["lms"];
        reject_unknown(l,
                       {"d", "alpha", "beta", "l_top", "delta", "gamma", "varsigma", "kurtosis",
                        "replications", "seed"},
                       "lms");
        c.lms.d = l.value("d", c.lms.d);
        c.lms.alpha = l.value("alpha", c.lms.alpha);
        c.lms.beta = l.value("beta", c.lms.beta);
        c.lms.l_top = l.value("l_top", c.lms.l_top);
        c.lms.delta = l.value("delta", c.lms.delta);
        c.lms.gamma = l.value("gamma", c.lms.gamma);
        c.lms.varsigma = l.value("varsigma", c.lms.varsigma);
        c.lms.kurtosis = l.value("kurtosis", c.lms.kurtosis);
        c.lms.replications = l.value("replications", c.lms.replications);
        c.lms.seed = l.value("seed", c.lms.seed);
    }
    return c;
}

std::string config_text(const RunConfig& c) {
    json j;
    j["schema_version"] = 1;
    j["algorithm"] = c.algorithm;
    j["spectrum"] = {{"alpha", c.spectrum.alpha},   {"beta", c.spectrum.beta},
                     {"gamma_l", c.spectrum.gamma_l}, {"delta", c.spectrum.delta},
                     {"l_top", c.spectrum.l_top},   {"modes", c.spectrum.n_modes}};
    j["steps"] = c.steps;
    j["rho"] = c.rho;
    j["criterion"] = c.criterion;
    j["dense"] = c.dense;
    j["tail_correction"] = c.tail_correction;
    if (c.noise) {
        j["noise"] = {{"beta_prime", c.noise->beta_prime},
                      {"varsigma", c.noise->varsigma},
                      {"monte_carlo", c.noise->monte_carlo},
                      {"replications", c.noise->replications}};
        if (c.noise->seed) j["noise"]["seed"] = *c.noise->seed;
    }
    if (c.algorithm == "lms" || c.algorithm == "lms_mc") {
        j["lms"] = {{"d", c.lms.d},
                    {"alpha", c.lms.alpha},
                    {"beta", c.lms.beta},
                    {"gamma", c.lms.gamma},
                    {"varsigma", c.lms.varsigma},
                    {"kurtosis", c.lms.kurtosis},
                    {"replications", c.lms.replications},
                    {"seed", c.lms.seed}};
    }
    j["seed"] = c.seed;
    j["tolerance"] = c.tolerance;
    return j.dump();
}

IterationConfig to_iteration(const RunConfig& c) {
    IterationConfig cfg;
    if (c.algorithm == "gd" || c.algorithm == "gd_noisy")
        cfg.algorithm = Algorithm::gd;
    else if (c.algorithm == "nesterov" || c.algorithm == "nesterov_noisy")
        cfg.algorithm = Algorithm::nesterov;
    else if (c.algorithm == "heavy_ball")
        cfg.algorithm = Algorithm::heavy_ball;
    else if (c.algorithm == "avg_gd")
        cfg.algorithm = Algorithm::avg_gd;
    else
        throw ValidationError("unknown algorithm: " + c.algorithm);
    cfg.spectrum = c.spectrum;
    cfg.steps = c.steps;
    cfg.rho = c.rho;
    cfg.dense = c.dense;
    cfg.tail_correction = c.tail_correction;
    if (c.criterion == "function_value")
        cfg.criterion = Criterion::function_value;
    else if (c.criterion == "iterate_norm")
        cfg.criterion = Criterion::iterate_norm;
    else
        throw ValidationError("unknown criterion: " + c.criterion);
    cfg.noise = c.noise;
    return cfg;
}

Trajectory simulate(const RunConfig& c) {
    if (c.algorithm == "lms") return evolve_expected(c.lms, c.steps);
    if (c.algorithm == "lms_mc") return run_lms_mc(c.lms, c.steps);
    const IterationConfig cfg = to_iteration(c);
    if (c.algorithm == "gd") return run_gd(cfg);
    if (c.algorithm == "gd_noisy") return run_gd_noisy(cfg);
    if (c.algorithm == "nesterov") return run_nesterov(cfg);
    if (c.algorithm == "nesterov_noisy") return run_nesterov_noisy(cfg);
    if (c.algorithm == "heavy_ball") return run_heavy_ball(cfg);
    if (c.algorithm == "avg_gd") return run_avg_gd(cfg);
    throw ValidationError("unknown algorithm: " + c.algorithm);
}

std::optional<Equivalent> predicted(const RunConfig& c) {
    const auto spec = c.spectrum;
    if (c.algorithm == "gd")
        return c.criterion == "iterate_norm" ? eq_gd_norm(spec) : eq_gd(spectral_dimension(spec));
    if (c.algorithm == "nesterov") return eq_nesterov(spectral_dimension(spec), c.rho);
    if (c.algorithm == "heavy_ball") return eq_heavy_ball(spec);
    if (c.algorithm == "avg_gd") return eq_avg_gd(spec);
    if (c.algorithm == "gd_noisy") {
        if (!c.noise) throw ValidationError("gd_noisy needs a noise section");
        return eq_gd_noise_var(spec, c.noise->beta_prime, c.noise->varsigma);
    }
    if (c.algorithm == "nesterov_noisy") {
        if (!c.noise) throw ValidationError("nesterov_noisy needs a noise section");
        return eq_nesterov_noise_var(spec, c.noise->beta_prime, c.noise->varsigma);
    }
    if (c.algorithm == "lms" || c.algorithm == "lms_mc") return eq_lms_bias(c.lms);
    return std::nullopt;
}

void print_equivalent(const Equivalent& e) {
    std::printf("regime: %s\n", e.regime.c_str());
    std::printf("c_hat = %.12g\n", e.c_hat);
    std::printf("p = %g\n", e.p);
    std::printf("q = %d\n", e.q);
    if (e.second)
        std::printf("second term: c2 = %.12g, p2 = %g, q2 = %d\n", e.second->c_hat, e.second->p,
                    e.second->q);
    std::printf("a_k ~ %.12g * k^-%g%s\n", e.c_hat, e.p, e.q == 1 ? " * log k" : "");
}

int cmd_predict(const RunConfig& c) {
    if (c.algorithm == "lms" || c.algorithm == "lms_mc") {
        std::printf("upsilon = %.12g\n", upsilon(c.lms));
        std::printf("gamma_max = %.12g\n", gamma_max(c.lms));
        std::printf("variance limit = %.12g\n", eq_lms_variance_limit(c.lms));
    }
    const auto e = predicted(c);
    if (!e) throw ValidationError("no closed-form equivalent for " + c.algorithm);
    print_equivalent(*e);
    return 0;
}

int cmd_simulate(const RunConfig& c) {
    namespace fs = std::filesystem;
    const Trajectory t = simulate(c);
    fs::create_directories(c.out);
    std::optional<Equivalent> eq;
    try {
        eq = predicted(c);
    } catch (const BoundaryError&) {
        // no equivalent at a regime boundary; emit the raw trajectory
    }
    const fs::path file = fs::path(c.out) / (c.algorithm + ".csv");
    const auto id = harness::emit_csv(t, file, eq ? &*eq : nullptr);
    harness::write_manifest(c.out, "simulate " + c.algorithm, config_text(c), c.seed,
                            {{file.filename().string(), id}});
    std::printf("wrote %s\n", file.string().c_str());
    return 0;
}

int cmd_verify(const RunConfig& c) {
    const Trajectory t = simulate(c);
    const auto eq = predicted(c);
    if (!eq) throw ValidationError("no closed-form equivalent for " + c.algorithm);
    std::vector<harness::RateCheck> checks;
    const std::int64_t K = static_cast<std::int64_t>(t.k.back());
    const bool conjecture = c.algorithm == "nesterov" && std::abs(c.rho - 1.0) > 1e-12;
    if (c.algorithm == "gd" || c.algorithm == "avg_gd" || c.algorithm == "lms") {
        checks.push_back(
            harness::check_ratio_median("ratio median [K/4,K]", t, *eq, {K / 4, K}, c.tolerance));
        checks.push_back(
            harness::check_slope("slope [K/4,K]", t, {K / 4, K}, eq->p, 0.05, eq->q == 1));
        if (c.algorithm == "lms" && c.lms.varsigma > 0.0) {
            checks.back().note = "bias rate masked by noise";
            checks.pop_back();
            checks.pop_back();
            checks.push_back(harness::check_constant_limit(
                "variance limit", t, eq_lms_variance_limit(c.lms), c.tolerance));
        }
    } else if (c.algorithm == "nesterov") {
        checks.push_back(harness::check_cesaro_ratio("cesaro ratio", t, *eq, c.tolerance));
    } else if (c.algorithm == "heavy_ball") {
        const auto sd = spectral_dimension(c.spectrum);
        if (sd.omega > 1.0) {
            checks.push_back(harness::check_min_amplitude(
                "non-vanishing oscillation [K/2,K]", t, *eq, {K / 2, K}, 0.2));
            auto stab = harness::check_cesaro_ratio("cesaro stabilization", t, *eq, c.tolerance);
            stab.note = "non-convergence confirmed when the raw amplitude check passes";
            checks.push_back(stab);
        } else {
            checks.push_back(
                harness::check_ratio_median("ratio median [K/4,K]", t, *eq, {K / 4, K}, c.tolerance));
        }
    } else if (c.algorithm == "gd_noisy" || c.algorithm == "nesterov_noisy") {
        if (eq->p < 0.0) {
            checks.push_back(harness::check_slope("growth slope [K/4,K]", t, {K / 4, K}, eq->p, 0.1));
        } else {
            checks.push_back(harness::check_constant_limit("noise plateau", t, eq->c_hat, 0.02));
        }
    } else if (c.algorithm == "lms_mc") {
        checks.push_back(
            harness::check_ratio_median("ratio median [K/4,K]", t, *eq, {K / 4, K}, c.tolerance));
    }

    // write outputs regardless of the verdict
    RunConfig cw = c;
    cmd_simulate(cw);

    bool all = true;
    for (const auto& ck : checks) {
        all = all && ck.passed;
        std::printf("[%s] %s%s: metric=%s window=[%lld,%lld] observed=%.6g target=%.6g tol=%.3g%s\n",
                    ck.passed ? "PASS" : "FAIL", conjecture ? "(conjecture) " : "",
                    ck.name.c_str(), ck.metric.c_str(), static_cast<long long>(ck.window.lo),
                    static_cast<long long>(ck.window.hi), ck.observed, ck.target, ck.tolerance,
                    ck.note.empty() ? "" : ("; " + ck.note).c_str());
    }
    return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// convolve expression language: numbers, z, + - * / ^, conv
// ---------------------------------------------------------------------------

class ExprParser {
  public:
    explicit ExprParser(std::string text) : text_(std::move(text)) {}

    ztrans::RationalZ parse() {
        auto r = expr();
        skip_ws();
        if (pos_ != text_.size()) throw ValidationError("trailing input in expression");
        return r;
    }

  private:
    std::string text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool eat_word(const char* w) {
        skip_ws();
        const std::size_t n = std::strlen(w);
        if (text_.compare(pos_, n, w) == 0) {
            pos_ += n;
            return true;
        }
        return false;
    }

    ztrans::RationalZ expr() {
        auto r = conv_term();
        while (true) {
            if (eat('+'))
                r = r + conv_term();
            else if (eat('-'))
                r = r - conv_term();
            else
                return r;
        }
    }

    // conv binds looser than * and /: "A conv B/C" is A conv (B/C)
    ztrans::RationalZ conv_term() {
        auto r = term();
        while (true) {
            skip_ws();
            if (eat_word("conv"))
                r = ztrans::convolve(r, term());
            else
                return r;
        }
    }

    ztrans::RationalZ term() {
        auto r = factor();
        while (true) {
            skip_ws();
            if (eat('*'))
                r = r * factor();
            else if (eat('/'))
                r = r / factor();
            else
                return r;
        }
    }

    ztrans::RationalZ factor() {
        auto r = primary();
        skip_ws();
        if (eat('^')) {
            skip_ws();
            std::size_t used = 0;
            int e = std::stoi(text_.substr(pos_), &used);
            pos_ += used;
            r = ztrans::pow(r, e);
        }
        return r;
    }

    ztrans::RationalZ primary() {
        skip_ws();
        if (eat('(')) {
            auto r = expr();
            if (!eat(')')) throw ValidationError("missing ')' in expression");
            return implicit_z(r);
        }
        if (pos_ < text_.size() && (text_[pos_] == 'z' || text_[pos_] == 'Z')) {
            ++pos_;
            return ztrans::RationalZ::z();
        }
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(text_.substr(pos_), &used);
        } catch (...) {
            throw ValidationError("expected a number, 'z' or '(' in expression");
        }
        pos_ += used;
        return implicit_z(ztrans::RationalZ::polynomial({v}));
    }

    // "0.5z" and "(1-z)z" mean multiplication
    ztrans::RationalZ implicit_z(ztrans::RationalZ r) {
        skip_ws();
        while (pos_ < text_.size() && (text_[pos_] == 'z' || text_[pos_] == 'Z')) {
            ++pos_;
            r = r * ztrans::RationalZ::z();
            skip_ws();
        }
        return r;
    }
};

int cmd_convolve(const std::string& expr_text, int coeffs) {
    ExprParser parser(expr_text);
    const ztrans::RationalZ r = parser.parse();
    std::printf("%s\n", ztrans::to_string(r).c_str());
    const auto c = ztrans::taylor_coeffs(r, coeffs);
    std::printf("coefficients a_0..a_%d:", coeffs);
    for (double v : c) std::printf(" %.12g", v);
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"specdim: scaling laws of linear optimization iterations on power-law spectra"};
    app.require_subcommand(1);

    std::string config_path;
    std::string algorithm, criterion;
    double alpha = -1, beta = -1e30, gamma_l = -1, delta = -1, l_top = -1, rho = -1, tolerance = -1;
    double noise_beta_prime = -1e30, varsigma = -1;
    std::int64_t steps = -1, modes = -1;
    int threads = 0, replications = -1;
    std::int64_t seed = -1;
    std::string out;
    bool dense = false, no_tail = false, monte_carlo = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "JSON run configuration");
        sub->add_option("--algorithm", algorithm,
                        "gd|nesterov|heavy_ball|avg_gd|gd_noisy|nesterov_noisy|lms|lms_mc");
        sub->add_option("--alpha", alpha, "eigenvalue decay exponent");
        sub->add_option("--beta", beta, "initial-condition decay exponent");
        sub->add_option("--gamma-l", gamma_l, "top normalized eigenvalue (step * l_top)");
        sub->add_option("--delta", delta, "initial-condition amplitude");
        sub->add_option("--l-top", l_top, "top Hessian eigenvalue");
        sub->add_option("--rho", rho, "momentum family parameter");
        sub->add_option("--criterion", criterion, "function_value|iterate_norm");
        sub->add_option("--steps", steps, "iteration horizon K");
        sub->add_option("--modes", modes, "spectrum truncation N");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--threads", threads, "worker cap (0 = default)");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--tolerance", tolerance, "verification tolerance");
        sub->add_option("--noise-beta-prime", noise_beta_prime, "noise decay exponent");
        sub->add_option("--varsigma", varsigma, "noise level");
        sub->add_option("--replications", replications, "Monte Carlo replications");
        sub->add_flag("--monte-carlo", monte_carlo, "sample instead of exact expectation");
        sub->add_flag("--dense", dense, "evaluate closed forms at every k");
        sub->add_flag("--no-tail-correction", no_tail, "skip the analytic dropped-mass term");
    };

    auto* sim = app.add_subcommand("simulate", "run an algorithm and write trajectory CSV");
    add_common(sim);
    auto* pred = app.add_subcommand("predict", "print the closed-form equivalent");
    add_common(pred);
    auto* verif = app.add_subcommand("verify", "simulate, predict and run rate checks");
    add_common(verif);

    std::string conv_expr;
    int conv_coeffs = 16;
    auto* conv = app.add_subcommand("convolve", "convolution calculus on rational transforms");
    conv->add_option("expression", conv_expr, "e.g. \"1/(1-0.5z) conv 1/(1-0.5z)\"")->required();
    conv->add_option("--coeffs", conv_coeffs, "how many coefficients to print");

    std::string fig_name;
    auto* fig = app.add_subcommand("figure", "reproduce the data behind a standard figure");
    fig->add_option("name", fig_name, "nesterov|heavyball|nesterov_rho|noise|lms")->required();
    fig->add_option("--out", out, "output directory");
    fig->add_option("--steps", steps, "iteration horizon override");
    fig->add_option("--seed", seed, "master seed");
    fig->add_option("--threads", threads, "worker cap (0 = default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        par::set_max_threads(threads);
        if (conv->parsed()) return cmd_convolve(conv_expr, conv_coeffs);
        if (fig->parsed()) {
            harness::FigureOptions opt;
            if (!out.empty()) opt.out_dir = out;
            else opt.out_dir = "figures/" + fig_name;
            if (steps > 0) opt.steps = steps;
            if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
            const auto files = harness::figure(fig_name, opt);
            for (const auto& f : files) std::printf("wrote %s\n", (opt.out_dir / f).string().c_str());
            return 0;
        }

        RunConfig c;
        if (!config_path.empty()) c = load_config(config_path);
        if (!algorithm.empty()) c.algorithm = algorithm;
        if (alpha > 0) c.spectrum.alpha = c.lms.alpha = alpha;
        if (beta > -1e29) c.spectrum.beta = c.lms.beta = beta;
        if (gamma_l > 0) c.spectrum.gamma_l = gamma_l;
        if (delta >= 0) c.spectrum.delta = c.lms.delta = delta;
        if (l_top > 0) c.spectrum.l_top = c.lms.l_top = l_top;
        if (rho > 0) c.rho = rho;
        if (!criterion.empty()) c.criterion = criterion;
        if (steps > 0) c.steps = steps;
        if (modes > 0) {
            c.spectrum.n_modes = static_cast<std::size_t>(modes);
            c.lms.d = static_cast<std::size_t>(modes);
        }
        if (seed >= 0) {
            c.seed = static_cast<std::uint64_t>(seed);
            c.lms.seed = c.seed;
            if (c.noise) c.noise->seed = c.seed;
        }
        if (!out.empty()) c.out = out;
        if (tolerance > 0) c.tolerance = tolerance;
        if (dense) c.dense = true;
        if (no_tail) c.tail_correction = false;
        if (replications > 0) {
            c.lms.replications = replications;
            if (c.noise) c.noise->replications = replications;
        }
        if (noise_beta_prime > -1e29 || varsigma >= 0 || monte_carlo) {
            NoiseConfig nz = c.noise.value_or(NoiseConfig{});
            if (noise_beta_prime > -1e29) nz.beta_prime = noise_beta_prime;
            if (varsigma >= 0) nz.varsigma = varsigma;
            if (monte_carlo) nz.monte_carlo = true;
            if (replications > 0) nz.replications = replications;
            if (seed >= 0) nz.seed = static_cast<std::uint64_t>(seed);
            c.noise = nz;
            c.lms.varsigma = nz.varsigma >= 0 ? nz.varsigma : c.lms.varsigma;
        }
        // physical constraints re-validated on entry
        if (c.algorithm != "lms" && c.algorithm != "lms_mc") c.spectrum.validate();

        if (sim->parsed()) return cmd_simulate(c);
        if (pred->parsed()) return cmd_predict(c);
        if (verif->parsed()) return cmd_verify(c);
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
