#include "specdim/ztrans.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace specdim::ztrans {

// The rational calculus (partial fractions, Leibniz products, recombination
// over a common denominator) cancels heavily in the monomial basis, so the
// pipeline runs in extended precision and rounds to double at the interface.
namespace {

using real = long double;
using cplx = std::complex<real>;
using CPoly = std::vector<cplx>;
using RPoly = std::vector<real>;

constexpr double kTrimRel = 1e-12;
constexpr int kPartialFractionDegreeCap = 12;

void trim(std::vector<double>& p, double scale) {
    const double tol = kTrimRel * scale;
    while (!p.empty() && std::abs(p.back()) <= tol) p.pop_back();
}

double max_abs(const std::vector<double>& p) {
    double m = 0.0;
    for (double c : p) m = std::max(m, std::abs(c));
    return m;
}

std::vector<double> padd(const std::vector<double>& a, const std::vector<double>& b, double sb = 1.0) {
    std::vector<double> r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
    return r;
}

std::vector<double> pmul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

std::vector<double> pscale(std::vector<double> a, double s) {
    for (double& c : a) c *= s;
    return a;
}

std::vector<double> pderiv(const std::vector<double>& a) {
    if (a.size() <= 1) return {};
    std::vector<double> r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<double>(i);
    return r;
}

// quotient and remainder of a/b in the monomial basis (deg r < deg b)
void pdivmod(RPoly a, const RPoly& b, RPoly& q, RPoly& r) {
    q.clear();
    if (b.empty()) throw ValidationError("polynomial division by zero");
    if (a.size() < b.size()) {
        r = std::move(a);
        return;
    }
    q.assign(a.size() - b.size() + 1, 0.0L);
    const real lead = b.back();
    for (std::size_t k = a.size(); k-- >= b.size();) {
        const real f = a[k] / lead;
        q[k - (b.size() - 1)] = f;
        for (std::size_t j = 0; j < b.size(); ++j) a[k - (b.size() - 1) + j] -= f * b[j];
        if (k == b.size() - 1) break;
    }
    a.resize(b.size() - 1);
    r = std::move(a);
}

cplx ceval(const CPoly& p, cplx z) {
    cplx v = 0.0L;
    for (std::size_t i = p.size(); i-- > 0;) v = v * z + p[i];
    return v;
}

CPoly cmul(const CPoly& a, const CPoly& b) {
    if (a.empty() || b.empty()) return {};
    CPoly r(a.size() + b.size() - 1, cplx(0.0L));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// synthetic division by (z - root); remainder dropped
CPoly cdeflate(const CPoly& p, cplx root) {
    if (p.size() <= 1) return {};
    CPoly q(p.size() - 1);
    cplx carry = p.back();
    for (std::size_t i = p.size() - 1; i-- > 0;) {
        q[i] = carry;
        carry = p[i] + carry * root;
    }
    return q;
}

CPoly cderiv(const CPoly& p) {
    if (p.size() <= 1) return {};
    CPoly r(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * static_cast<real>(i);
    return r;
}

// Plain Newton converges only linearly on multiple roots (halving the
// distance per step), so run enough iterations to pull a companion-matrix
// estimate of a near-multiple root inside the cluster tolerance.
cplx newton_polish(const CPoly& p, const CPoly& dp, cplx z, int iters = 90) {
    for (int it = 0; it < iters; ++it) {
        const cplx f = ceval(p, z);
        const cplx d = ceval(dp, z);
        if (std::abs(d) == 0.0L) break;
        const cplx step = f / d;
        z -= step;
        if (std::abs(step) < 1e-18L * (1.0L + std::abs(z))) break;
    }
    return z;
}

struct RootCluster {
    cplx z;
    int multiplicity;
};

std::vector<RootCluster> roots_internal(const RPoly& coeffs_in) {
    RPoly coeffs = coeffs_in;
    {
        real mx = 0.0L;
        for (real c : coeffs) mx = std::max(mx, std::abs(c));
        const real tol = static_cast<real>(kTrimRel) * std::max((real)1.0L, mx);
        while (!coeffs.empty() && std::abs(coeffs.back()) <= tol) coeffs.pop_back();
    }
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n <= 0) return {};
    using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>;
    Mat comp = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0L;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -coeffs[i] / coeffs[n];
    Eigen::EigenSolver<Mat> es(comp, /*computeEigenvectors=*/false);
    CPoly p(coeffs.begin(), coeffs.end());
    const CPoly dp = cderiv(p);
    std::vector<cplx> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = newton_polish(p, dp, es.eigenvalues()(i));

    // merge near-coincident roots into one multiple root
    std::vector<RootCluster> out;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        cplx sum = roots[i];
        int count = 1;
        used[i] = true;
        // double-rounded coefficients split an intended double root by about
        // sqrt(eps * cond) ~ 1e-7, so the merge window must sit above that
        const real tol = std::max((real)1e-8L, 1e-5L * (1.0L + std::abs(roots[i])));
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (!used[j] && std::abs(roots[j] - roots[i]) < tol) {
                sum += roots[j];
                ++count;
                used[j] = true;
            }
        }
        cplx center = sum / static_cast<real>(count);
        if (count > 1) {
            // a multiplicity-m root is simple for the (m-1)-th derivative
            CPoly d = p;
            for (int t = 0; t < count - 1; ++t) d = cderiv(d);
            center = newton_polish(d, cderiv(d), center);
        }
        if (std::abs(center.imag()) < 1e-12L * (1.0L + std::abs(center)))
            center = cplx(center.real(), 0.0L);
        out.push_back({center, count});
    }
    // pin complex clusters to exact conjugate pairs
    for (auto& r : out) {
        if (r.z.imag() == 0.0L) continue;
        for (auto& s : out) {
            if (&s != &r && std::abs(std::conj(s.z) - r.z) < 1e-10L * (1.0L + std::abs(r.z))) {
                const cplx m = real(0.5L) * (r.z + std::conj(s.z));
                r.z = m;
                s.z = std::conj(m);
            }
        }
    }
    return out;
}

struct InternalPoleTerm {
    cplx scale;
    cplx a;
    cplx u;
    int power;
};

struct InternalPF {
    RPoly poly;
    std::vector<InternalPoleTerm> terms;
};

InternalPF pf_internal(const RationalZ& r) {
    InternalPF pf;
    if (r.num.empty()) return pf;
    RPoly num(r.num.begin(), r.num.end());
    RPoly den(r.den.begin(), r.den.end());
    if (den.size() <= 1) {
        pf.poly = num;
        return pf;
    }
    if (static_cast<int>(den.size()) - 1 > kPartialFractionDegreeCap)
        throw ValidationError("partial fractions capped at denominator degree 12");
    RPoly rem;
    pdivmod(num, den, pf.poly, rem);
    {
        real mx = 0.0L;
        for (real c : rem) mx = std::max(mx, std::abs(c));
        while (!rem.empty() && std::abs(rem.back()) <= 1e-25L * std::max((real)1.0L, mx))
            rem.pop_back();
    }
    if (rem.empty()) return pf;

    const auto roots = roots_internal(den);
    const int n = static_cast<int>(den.size()) - 1;
    // unknowns c_{jt}: N(z) = sum c_{jt} D(z)/(z - z_j)^t
    CPoly D(den.begin(), den.end());
    std::vector<CPoly> basis;
    std::vector<std::pair<cplx, int>> index;
    for (const auto& root : roots) {
        CPoly q = D;
        for (int t = 1; t <= root.multiplicity; ++t) {
            q = cdeflate(q, root.z);
            basis.push_back(q);
            index.emplace_back(root.z, t);
        }
    }
    if (static_cast<int>(basis.size()) != n)
        throw ValidationError("partial fractions: multiplicities inconsistent with degree");

    using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
    using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
    CMat M = CMat::Zero(n, n);
    CVec rhs = CVec::Zero(n);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row)
            M(row, col) = row < static_cast<int>(basis[col].size()) ? basis[col][row] : cplx(0.0L);
    for (int row = 0; row < n; ++row)
        rhs(row) = row < static_cast<int>(rem.size()) ? cplx(rem[row]) : cplx(0.0L);
    // column scaling keeps the monomial-basis system well conditioned
    Eigen::Matrix<real, Eigen::Dynamic, 1> scale(n);
    for (int col = 0; col < n; ++col) {
        real s = 0.0L;
        for (int row = 0; row < n; ++row) s = std::max(s, std::abs(M(row, col)));
        scale(col) = s > 0.0L ? s : 1.0L;
        M.col(col) /= scale(col);
    }
    CVec c = M.colPivHouseholderQr().solve(rhs);
    for (int col = 0; col < n; ++col) c(col) /= scale(col);

    for (int col = 0; col < n; ++col) {
        const auto [root, t] = index[col];
        // c/(z - z0)^t = c (-1)^t / (z0 - z)^t
        pf.terms.push_back({c(col) * real((t % 2 == 0) ? 1.0L : -1.0L), root, cplx(1.0L), t});
    }
    return pf;
}

std::vector<InternalPoleTerm> leibniz_product(const InternalPoleTerm& p, const InternalPoleTerm& q) {
    const int k = p.power - 1;
    const int l = q.power - 1;
    auto fact = [](int n) {
        real f = 1.0L;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    std::vector<InternalPoleTerm> out;
    for (int i = 0; i <= std::min(k, l); ++i) {
        const real comb = fact(k + l - i) / (fact(i) * fact(k - i) * fact(l - i));
        const real sign = (i % 2 == 0) ? 1.0L : -1.0L;
        InternalPoleTerm t;
        t.scale = p.scale * q.scale * sign * comb * std::pow(p.a, (real)(l - i)) *
                  std::pow(q.a, (real)(k - i));
        t.a = p.a * q.a;
        t.u = p.u * q.u;
        t.power = l + k + 1 - i;
        out.push_back(t);
    }
    return out;
}

RationalZ narrow(const RPoly& num, const RPoly& den) {
    RationalZ r;
    r.num.assign(num.begin(), num.end());
    r.den.assign(den.begin(), den.end());
    r.normalize();
    return r;
}

}  // namespace

std::vector<PolyRoot> poly_roots(const std::vector<double>& coeffs) {
    std::vector<PolyRoot> out;
    for (const auto& r : roots_internal(RPoly(coeffs.begin(), coeffs.end())))
        out.push_back({std::complex<double>(static_cast<double>(r.z.real()),
                                            static_cast<double>(r.z.imag())),
                       r.multiplicity});
    return out;
}

// ---------------------------------------------------------------------------
// RationalZ
// ---------------------------------------------------------------------------

void RationalZ::normalize() {
    if (den.empty() || den[0] == 0.0)
        throw ValidationError("denominator must not vanish at z = 0");
    const double d0 = den[0];
    for (double& c : num) c /= d0;
    for (double& c : den) c /= d0;
    trim(num, std::max(1.0, max_abs(num)));
    trim(den, std::max(1.0, max_abs(den)));
    if (num.empty()) den = {1.0};
}

double RationalZ::eval(double zv) const {
    double n = 0.0, d = 0.0;
    for (std::size_t i = num.size(); i-- > 0;) n = n * zv + num[i];
    for (std::size_t i = den.size(); i-- > 0;) d = d * zv + den[i];
    return n / d;
}

RationalZ RationalZ::simple_pole(double a, double u) {
    if (a == 0.0) throw ValidationError("pole term requires a != 0");
    RationalZ r{{1.0}, {a, -u}};
    r.normalize();
    return r;
}

RationalZ operator+(const RationalZ& a, const RationalZ& b) {
    RationalZ r;
    r.num = padd(pmul(a.num, b.den), pmul(b.num, a.den));
    r.den = pmul(a.den, b.den);
    r.normalize();
    return r;
}

RationalZ operator-(const RationalZ& a, const RationalZ& b) {
    RationalZ r;
    r.num = padd(pmul(a.num, b.den), pmul(b.num, a.den), -1.0);
    r.den = pmul(a.den, b.den);
    r.normalize();
    return r;
}

RationalZ operator*(const RationalZ& a, const RationalZ& b) {
    RationalZ r;
    r.num = pmul(a.num, b.num);
    r.den = pmul(a.den, b.den);
    r.normalize();
    return r;
}

RationalZ operator/(const RationalZ& a, const RationalZ& b) {
    if (b.is_zero()) throw ValidationError("division by the zero transform");
    RationalZ r;
    r.num = pmul(a.num, b.den);
    r.den = pmul(a.den, b.num);
    r.normalize();
    return r;
}

RationalZ operator*(double s, const RationalZ& a) {
    RationalZ r = a;
    r.num = pscale(r.num, s);
    r.normalize();
    return r;
}

RationalZ pow(const RationalZ& a, int e) {
    if (e < 0) return RationalZ::one() / pow(a, -e);
    RationalZ r = RationalZ::one();
    for (int i = 0; i < e; ++i) r = r * a;
    return r;
}

Series taylor_coeffs(const RationalZ& r, int K) {
    if (K < 0) throw ValidationError("taylor_coeffs requires K >= 0");
    if (r.den.empty() || r.den[0] == 0.0)
        throw ValidationError("denominator must not vanish at z = 0");
    // extended precision: the recurrence can cancel when the denominator has
    // large coefficients
    std::vector<real> a(K + 1, 0.0L);
    Series out(K + 1);
    for (int k = 0; k <= K; ++k) {
        real v = k < static_cast<int>(r.num.size()) ? static_cast<real>(r.num[k]) : 0.0L;
        const int jmax = std::min<int>(k, static_cast<int>(r.den.size()) - 1);
        for (int j = 1; j <= jmax; ++j) v -= static_cast<real>(r.den[j]) * a[k - j];
        a[k] = v / static_cast<real>(r.den[0]);
        out[k] = static_cast<double>(a[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// convolution calculus
// ---------------------------------------------------------------------------

RationalZ convolve_basic(double a, double u, double b, double v) {
    if (a == 0.0 || b == 0.0) throw ValidationError("pole terms require nonzero a, b");
    if (!(std::abs(u / a) < 1.0 && std::abs(v / b) < 1.0))
        throw PoleError("convolve_basic requires |u/a| < 1 and |v/b| < 1 (summable sequences)");
    RationalZ r{{1.0}, {a * b, -u * v}};
    r.normalize();
    return r;
}

std::vector<PoleTerm> convolve_pole_powers(const PoleTerm& p, const PoleTerm& q) {
    if (p.power < 1 || q.power < 1) throw ValidationError("pole powers must be >= 1");
    if (!(std::abs(p.u / p.a) < 1.0 && std::abs(q.u / q.a) < 1.0))
        throw PoleError("convolve_pole_powers requires summable factors");
    auto widen = [](const PoleTerm& t) {
        return InternalPoleTerm{cplx(t.scale.real(), t.scale.imag()), cplx(t.a.real(), t.a.imag()),
                                cplx(t.u.real(), t.u.imag()), t.power};
    };
    std::vector<PoleTerm> out;
    for (const auto& t : leibniz_product(widen(p), widen(q))) {
        PoleTerm o;
        o.scale = {static_cast<double>(t.scale.real()), static_cast<double>(t.scale.imag())};
        o.a = {static_cast<double>(t.a.real()), static_cast<double>(t.a.imag())};
        o.u = {static_cast<double>(t.u.real()), static_cast<double>(t.u.imag())};
        o.power = t.power;
        out.push_back(o);
    }
    return out;
}

RationalZ convolve_quadratic(double lambda, double mu) {
    if (!(lambda > 0.0 && lambda < 1.0 && mu > 0.0 && mu < 1.0))
        throw ValidationError("convolve_quadratic requires lambda, mu in (0,1)");
    const std::vector<double> inner{1.0 + lambda * mu + lambda + mu, -2.0, 1.0};
    std::vector<double> den = padd(pmul(inner, inner), {0.0, 0.0, -4.0 * lambda * mu});
    RationalZ r{{(lambda + 1.0) * (mu + 1.0), 0.0, -1.0}, den};
    r.normalize();
    return r;
}

PartialFractions partial_fractions(const RationalZ& r_in) {
    RationalZ r = r_in;
    r.normalize();
    const InternalPF pf = pf_internal(r);
    PartialFractions out;
    out.poly.assign(pf.poly.begin(), pf.poly.end());
    for (const auto& t : pf.terms) {
        PoleTerm o;
        o.scale = {static_cast<double>(t.scale.real()), static_cast<double>(t.scale.imag())};
        o.a = {static_cast<double>(t.a.real()), static_cast<double>(t.a.imag())};
        o.u = {static_cast<double>(t.u.real()), static_cast<double>(t.u.imag())};
        o.power = t.power;
        out.terms.push_back(o);
    }
    return out;
}

namespace {

// coefficient prefix of the pole (proper) part, given the polynomial part
Series proper_part_coeffs(const RationalZ& r, const RPoly& poly, int K) {
    Series c = taylor_coeffs(r, K);
    for (std::size_t i = 0; i < poly.size() && i < c.size(); ++i)
        c[i] -= static_cast<double>(poly[i]);
    return c;
}

void require_summable(const RationalZ& r) {
    for (const auto& root : roots_internal(RPoly(r.den.begin(), r.den.end())))
        if (std::abs(root.z) <= 1.0L + 1e-9L)
            throw PoleError("convolution requires all poles strictly outside the unit disk");
}

}  // namespace

RationalZ convolve(const RationalZ& a_in, const RationalZ& b_in) {
    RationalZ A = a_in, B = b_in;
    A.normalize();
    B.normalize();
    if (A.is_zero() || B.is_zero()) return RationalZ::zero();

    require_summable(A);
    require_summable(B);

    const InternalPF fa = pf_internal(A);
    const InternalPF fb = pf_internal(B);

    // polynomial x polynomial: pointwise product of finite sequences
    RPoly poly_part;
    if (!fa.poly.empty() && !fb.poly.empty()) {
        poly_part.resize(std::min(fa.poly.size(), fb.poly.size()));
        for (std::size_t i = 0; i < poly_part.size(); ++i) poly_part[i] = fa.poly[i] * fb.poly[i];
    }
    // polynomial x pole part: finite sequence times the other factor's prefix
    auto add_cross = [&](const RPoly& poly, const RationalZ& other, const RPoly& other_poly) {
        if (poly.empty()) return;
        const int K = static_cast<int>(poly.size()) - 1;
        const Series c = proper_part_coeffs(other, other_poly, K);
        if (poly_part.size() < poly.size()) poly_part.resize(poly.size(), 0.0L);
        for (std::size_t i = 0; i < poly.size(); ++i)
            poly_part[i] += poly[i] * static_cast<real>(c[i]);
    };
    add_cross(fa.poly, B, fb.poly);
    add_cross(fb.poly, A, fa.poly);

    std::vector<InternalPoleTerm> terms;
    for (const auto& p : fa.terms)
        for (const auto& q : fb.terms) {
            auto conv = leibniz_product(p, q);
            terms.insert(terms.end(), conv.begin(), conv.end());
        }

    RPoly num(poly_part);
    RPoly den{1.0L};
    if (!terms.empty()) {
        // cluster the product poles, build one common denominator over C,
        // then take real parts (conjugates pair up by construction)
        struct Cluster {
            cplx z;
            int maxp = 0;
        };
        std::vector<Cluster> clusters;
        std::vector<int> term_cluster(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const cplx z0 = terms[t].a / terms[t].u;
            int found = -1;
            for (std::size_t cth = 0; cth < clusters.size(); ++cth)
                if (std::abs(clusters[cth].z - z0) < 1e-9L * (1.0L + std::abs(z0))) {
                    found = static_cast<int>(cth);
                    break;
                }
            if (found < 0) {
                clusters.push_back({z0, terms[t].power});
                found = static_cast<int>(clusters.size()) - 1;
            } else {
                clusters[found].maxp = std::max(clusters[found].maxp, terms[t].power);
            }
            term_cluster[t] = found;
        }
        // factors normalized at z = 0 keep the monomial coefficients near the
        // scale of the function instead of |z0|^degree
        CPoly D{cplx(1.0L)};
        for (const auto& cl : clusters)
            for (int t = 0; t < cl.maxp; ++t) D = cmul(D, CPoly{cplx(1.0L), -1.0L / cl.z});
        CPoly N(D.size(), cplx(0.0L));
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto& cl = clusters[term_cluster[t]];
            // scale/(a - u z)^p = (scale/(u z0)^p) / (1 - z/z0)^p with z0 = a/u
            const cplx s =
                terms[t].scale / std::pow(terms[t].u * cl.z, (real)terms[t].power);
            CPoly q = D;
            for (int dfl = 0; dfl < terms[t].power; ++dfl) {
                q = cdeflate(q, cl.z);              // by (z - z0)
                for (auto& cc : q) cc *= -cl.z;     // by (1 - z/z0)
            }
            for (std::size_t i = 0; i < q.size(); ++i) N[i] += s * q[i];
        }
        // num/den + N/D over the common denominator D
        RPoly rn(N.size()), rd(D.size());
        for (std::size_t i = 0; i < N.size(); ++i) rn[i] = N[i].real();
        for (std::size_t i = 0; i < D.size(); ++i) rd[i] = D[i].real();
        const std::size_t psize = num.empty() ? 0 : num.size() + rd.size() - 1;
        RPoly combined(std::max(psize, rn.size()), 0.0L);
        for (std::size_t i = 0; i < num.size(); ++i)
            for (std::size_t j = 0; j < rd.size(); ++j) combined[i + j] += num[i] * rd[j];
        for (std::size_t i = 0; i < rn.size(); ++i) combined[i] += rn[i];
        num = std::move(combined);
        den = std::move(rd);
    }
    return narrow(num, den);
}

RationalZ derivative_transform(const RationalZ& r_in) {
    RationalZ r = r_in;
    r.normalize();
    if (r.is_zero()) return RationalZ::zero();
    // z (N'D - N D') / D^2
    std::vector<double> n = padd(pmul(pderiv(r.num), r.den), pmul(r.num, pderiv(r.den)), -1.0);
    n.insert(n.begin(), 0.0);
    RationalZ out{n, pmul(r.den, r.den)};
    out.normalize();
    return out;
}

RationalZ averaging_transform(const RationalZ& r) { return r + derivative_transform(r); }

std::vector<double> abel_grid(int levels) {
    std::vector<double> g(levels);
    for (int j = 1; j <= levels; ++j) g[j - 1] = 1.0 - std::pow(2.0, -j);
    return g;
}

std::vector<AbelPoint> abel_estimate(const Series& seq, double alpha_exp,
                                     const std::vector<double>& z_grid) {
    if (seq.empty()) throw ValidationError("abel_estimate requires a nonempty prefix");
    const int K = static_cast<int>(seq.size()) - 1;
    double g = 0.0;  // growth-ratio estimate from the last few terms
    for (int k = std::max(1, K - 4); k <= K; ++k)
        if (seq[k - 1] != 0.0) g = std::max(g, std::abs(seq[k] / seq[k - 1]));
    std::vector<AbelPoint> out;
    out.reserve(z_grid.size());
    for (double zv : z_grid) {
        if (!(zv > 0.0 && zv < 1.0)) throw ValidationError("abel grid points must lie in (0,1)");
        double s = 0.0;
        for (int k = K; k >= 0; --k) s = s * zv + seq[k];
        const double factor = std::pow(1.0 - zv, alpha_exp);
        const double value = factor * s;
        double tail = std::numeric_limits<double>::infinity();
        if (g * zv < 1.0)
            tail = factor * std::abs(seq[K]) * std::pow(zv, K) * (g * zv) / (1.0 - g * zv);
        out.push_back({zv, value, tail, !(tail <= 0.01 * std::abs(value))});
    }
    return out;
}

std::string to_string(const RationalZ& r) {
    auto poly_str = [](const std::vector<double>& p) {
        if (p.empty()) return std::string("0");
        std::ostringstream os;
        bool first = true;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0.0 && p.size() > 1) continue;
            double c = p[i];
            if (!first) {
                os << (c < 0 ? " - " : " + ");
                c = std::abs(c);
            }
            first = false;
            os << c;
            if (i == 1) os << "*z";
            if (i > 1) os << "*z^" << i;
        }
        if (first) os << 0.0;
        return os.str();
    };
    std::ostringstream os;
    if (r.den_degree() == 0)
        os << poly_str(r.num);
    else
        os << "(" << poly_str(r.num) << ") / (" << poly_str(r.den) << ")";
    return os.str();
}

}  // namespace specdim::ztrans
