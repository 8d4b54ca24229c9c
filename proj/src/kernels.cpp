#include "specdim/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "specdim/errors.hpp"
#include "specdim/parallel.hpp"

namespace specdim::kernels {

namespace {

constexpr std::size_t kModeBlock = 4096;
constexpr int kDeactivateWindow = 64;
constexpr double kDeactivateRel = 1e-14;

struct BlockState {
    std::vector<double> oml;  // 1 - lambda
    std::vector<double> lam;
    std::vector<double> w;
    std::vector<double> b, bp;
    std::vector<double> hmax, wmax;
    std::size_t active = 0;

    void init(std::span<const double> lambda, std::span<const double> weight, std::size_t lo,
              std::size_t hi) {
        const std::size_t n = hi - lo;
        oml.resize(n);
        lam.resize(n);
        w.resize(n);
        b.assign(n, 1.0);
        bp.assign(n, 1.0);
        hmax.assign(n, 1.0);
        wmax.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            lam[i] = lambda[lo + i];
            oml[i] = 1.0 - lambda[lo + i];
            w[i] = weight[lo + i];
        }
        active = n;
    }

    void drop(std::size_t i) {
        const std::size_t last = active - 1;
        oml[i] = oml[last];
        lam[i] = lam[last];
        w[i] = w[last];
        b[i] = b[last];
        bp[i] = bp[last];
        hmax[i] = hmax[last];
        wmax[i] = wmax[last];
        active = last;
    }
};

}  // namespace

RecursionResult mode_recursion_sum(std::span<const double> lambda, std::span<const double> weight,
                                   Recursion rec, double rho, std::int64_t steps,
                                   bool deactivate) {
    if (steps < 2) throw ValidationError("recursion requires steps >= 2");
    const std::size_t n = lambda.size();
    const std::size_t nblocks = par::block_count(n, kModeBlock);
    std::vector<std::vector<double>> rows(nblocks);
    std::vector<std::size_t> dropped(nblocks, 0);

    par::for_blocks(n, kModeBlock, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
        BlockState st;
        st.init(lambda, weight, lo, hi);
        std::vector<double>& row = rows[blk];
        row.assign(steps + 1, 0.0);
        double mass = 0.0;
        for (std::size_t i = 0; i < st.active; ++i) mass += st.w[i];
        row[0] = row[1] = mass;  // b_0 = b_1 = 1

        for (std::int64_t k = 1; k < steps; ++k) {
            const double kk = static_cast<double>(k);
            double acc = 0.0;
            const std::size_t na = st.active;
            double* __restrict bv = st.b.data();
            double* __restrict bpv = st.bp.data();
            const double* __restrict omlv = st.oml.data();
            const double* __restrict lamv = st.lam.data();
            const double* __restrict wv = st.w.data();
            double* __restrict wm = st.wmax.data();
            if (rec == Recursion::nesterov) {
                const double c1 = 2.0 * (kk + rho - 1.0) / (kk + 2.0 * rho - 1.0);
                const double c2 = (kk - 1.0) / (kk + 2.0 * rho - 1.0);
                for (std::size_t i = 0; i < na; ++i) {
                    const double bn = omlv[i] * (c1 * bv[i] - c2 * bpv[i]);
                    bpv[i] = bv[i];
                    bv[i] = bn;
                    acc += wv[i] * bn * bn;
                    const double ab = std::abs(bn);
                    wm[i] = ab > wm[i] ? ab : wm[i];
                }
            } else {
                const double m = kk / (kk + 2.0 * rho - 1.0);
                const double c2 = (kk - 1.0) / (kk + 2.0 * rho - 1.0);
                for (std::size_t i = 0; i < na; ++i) {
                    const double bn = (1.0 + c2 - lamv[i] * m) * bv[i] - c2 * bpv[i];
                    bpv[i] = bv[i];
                    bv[i] = bn;
                    acc += wv[i] * bn * bn;
                    const double ab = std::abs(bn);
                    wm[i] = ab > wm[i] ? ab : wm[i];
                }
            }
            row[k + 1] = acc;
            if (deactivate && (k % kDeactivateWindow) == 0) {
                for (std::size_t i = 0; i < st.active;) {
                    st.hmax[i] = std::max(st.hmax[i], st.wmax[i]);
                    if (st.wmax[i] < kDeactivateRel * st.hmax[i]) {
                        st.drop(i);
                        ++dropped[blk];
                    } else {
                        st.wmax[i] = 0.0;
                        ++i;
                    }
                }
            }
        }
    });

    RecursionResult out;
    par::tree_combine_rows(rows, out.trajectory);
    for (std::size_t d : dropped) out.deactivated += d;
    return out;
}

std::vector<double> mode_sequence(double lambda, Recursion rec, double rho, std::int64_t steps) {
    std::vector<double> b(steps + 1);
    b[0] = 1.0;
    if (steps >= 1) b[1] = 1.0;
    for (std::int64_t k = 1; k < steps; ++k) {
        const double kk = static_cast<double>(k);
        if (rec == Recursion::nesterov) {
            const double c1 = 2.0 * (kk + rho - 1.0) / (kk + 2.0 * rho - 1.0);
            const double c2 = (kk - 1.0) / (kk + 2.0 * rho - 1.0);
            b[k + 1] = (1.0 - lambda) * (c1 * b[k] - c2 * b[k - 1]);
        } else {
            const double m = kk / (kk + 2.0 * rho - 1.0);
            const double c2 = (kk - 1.0) / (kk + 2.0 * rho - 1.0);
            b[k + 1] = (1.0 + c2 - lambda * m) * b[k] - c2 * b[k - 1];
        }
    }
    return b;
}

namespace {

// (1-lambda)^(p k) via exp(p k log1p(-lambda)): no precision loss near 0 or 1
inline double pow_factor(double log1p_term, double pk) {
    const double e = pk * log1p_term;
    return e < -745.0 ? 0.0 : std::exp(e);
}

inline double eval_factor(Factor f, std::int64_t k, double lam, double l1p) {
    switch (f) {
        case Factor::gd:
            return pow_factor(l1p, 2.0 * static_cast<double>(k));
        case Factor::gd4:
            return pow_factor(l1p, 4.0 * static_cast<double>(k));
        case Factor::avg_gd: {
            const double kp1 = static_cast<double>(k) + 1.0;
            const double m = -std::expm1(kp1 * l1p) / (kp1 * lam);
            return m * m;
        }
        case Factor::noise_g:
            return -std::expm1(2.0 * static_cast<double>(k) * l1p) / (lam * (2.0 - lam));
    }
    return 0.0;
}

}  // namespace

void factor_sum(std::span<const double> lambda, std::span<const double> weight,
                std::span<const std::int64_t> ks, Factor f, double* out) {
    const std::size_t n = lambda.size();
    std::vector<double> l1p(n);
    for (std::size_t i = 0; i < n; ++i) l1p[i] = std::log1p(-lambda[i]);
    par::for_indices(ks.size(), [&](std::size_t j) {
        // ascending-weight order with compensation: power-law weights span
        // many orders of magnitude
        double s = 0.0, c = 0.0;
        for (std::size_t i = n; i-- > 0;) {
            const double x = weight[i] * eval_factor(f, ks[j], lambda[i], l1p[i]);
            const double t = s + x;
            if (std::abs(s) >= std::abs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
        }
        out[j] = s + c;
    });
}

std::vector<double> noisy_nesterov_moments(std::span<const double> lambda,
                                           std::span<const double> init,
                                           std::span<const double> noise_var,
                                           std::span<const double> out_weight,
                                           std::int64_t steps) {
    if (steps < 2) throw ValidationError("recursion requires steps >= 2");
    const std::size_t n = lambda.size();
    const std::size_t nblocks = par::block_count(n, kModeBlock);
    std::vector<std::vector<double>> rows(nblocks);

    par::for_blocks(n, kModeBlock, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
        const std::size_t m = hi - lo;
        std::vector<double> m11(m), m12(m), m22(m), oml(m), s2(m), ow(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double d = init[lo + i];
            m11[i] = m12[i] = m22[i] = d * d;
            oml[i] = 1.0 - lambda[lo + i];
            s2[i] = noise_var[lo + i];
            ow[i] = out_weight[lo + i];
        }
        std::vector<double>& row = rows[blk];
        row.assign(steps + 1, 0.0);
        double a0 = 0.0;
        for (std::size_t i = 0; i < m; ++i) a0 += ow[i] * m11[i];
        row[0] = row[1] = a0;
        for (std::int64_t k = 1; k < steps; ++k) {
            const double kk = static_cast<double>(k);
            const double f1 = 2.0 * kk / (kk + 1.0);
            const double f2 = -(kk - 1.0) / (kk + 1.0);
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double c1 = oml[i] * f1;
                const double c2 = oml[i] * f2;
                const double n11 =
                    c1 * c1 * m11[i] + 2.0 * c1 * c2 * m12[i] + c2 * c2 * m22[i] + s2[i];
                const double n12 = c1 * m11[i] + c2 * m12[i];
                m22[i] = m11[i];
                m11[i] = n11;
                m12[i] = n12;
                acc += ow[i] * n11;
            }
            row[k + 1] = acc;
        }
    });

    std::vector<double> out;
    par::tree_combine_rows(rows, out);
    return out;
}

std::vector<double> noisy_nesterov_zero_mode(std::int64_t steps) {
    std::vector<double> v(steps + 1, 0.0);
    double m11 = 0.0, m12 = 0.0, m22 = 0.0;
    for (std::int64_t k = 1; k < steps; ++k) {
        const double kk = static_cast<double>(k);
        const double c1 = 2.0 * kk / (kk + 1.0);
        const double c2 = -(kk - 1.0) / (kk + 1.0);
        const double n11 = c1 * c1 * m11 + 2.0 * c1 * c2 * m12 + c2 * c2 * m22 + 1.0;
        const double n12 = c1 * m11 + c2 * m12;
        m22 = m11;
        m11 = n11;
        m12 = n12;
        v[k + 1] = m11;
    }
    return v;
}

namespace reference {

RecursionResult mode_recursion_sum(std::span<const double> lambda, std::span<const double> weight,
                                   Recursion rec, double rho, std::int64_t steps) {
    RecursionResult out;
    out.trajectory.assign(steps + 1, 0.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const auto b = mode_sequence(lambda[i], rec, rho, steps);
        for (std::int64_t k = 0; k <= steps; ++k) out.trajectory[k] += weight[i] * b[k] * b[k];
    }
    return out;
}

void factor_sum(std::span<const double> lambda, std::span<const double> weight,
                std::span<const std::int64_t> ks, Factor f, double* out) {
    for (std::size_t j = 0; j < ks.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i)
            s += weight[i] * eval_factor(f, ks[j], lambda[i], std::log1p(-lambda[i]));
        out[j] = s;
    }
}

std::vector<double> noisy_nesterov_moments(std::span<const double> lambda,
                                           std::span<const double> init,
                                           std::span<const double> noise_var,
                                           std::span<const double> out_weight,
                                           std::int64_t steps) {
    std::vector<double> out(steps + 1, 0.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        double m11 = init[i] * init[i], m12 = m11, m22 = m11;
        out[0] += out_weight[i] * m11;
        out[1] += out_weight[i] * m11;
        for (std::int64_t k = 1; k < steps; ++k) {
            const double kk = static_cast<double>(k);
            const double c1 = (1.0 - lambda[i]) * 2.0 * kk / (kk + 1.0);
            const double c2 = -(1.0 - lambda[i]) * (kk - 1.0) / (kk + 1.0);
            const double n11 = c1 * c1 * m11 + 2.0 * c1 * c2 * m12 + c2 * c2 * m22 + noise_var[i];
            const double n12 = c1 * m11 + c2 * m12;
            m22 = m11;
            m11 = n11;
            m12 = n12;
            out[k + 1] += out_weight[i] * m11;
        }
    }
    return out;
}

}  // namespace reference

}  // namespace specdim::kernels
