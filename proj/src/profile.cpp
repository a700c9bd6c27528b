#include "lgv/profile.hpp"
#include "lgv/log.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace lgv {

void VortexParams::validate() const {
    std::vector<std::string> bad;
    if (n < 0) bad.push_back("vortex.n: must be >= 0");
    if (e <= 0.0) bad.push_back("vortex.e: must be > 0");
    if (v <= 0.0) bad.push_back("vortex.v: must be > 0");
    if (r_max <= 0.0) bad.push_back("vortex.r_max: must be > 0");
    if (m_r < 64) bad.push_back("vortex.m_r: must be >= 64");
    if (!bad.empty()) throw InvalidParams(ValidationError(bad).what());
    if (tail_warning())
        log::msg(log::info, "warning: r_max*e*v = %.3g < 8, exponential tail may be truncated",
                 r_max * e * v);
}

double StateVector::norm_l2() const {
    double s = 0.0;
    for (const cd& z : values) s += std::norm(z);
    return h * std::sqrt(s);
}

namespace {

using Y2 = std::array<double, 2>;

inline bool never_stop(const Y2&) { return false; }

// Dormand-Prince 5(4) with standard step control. rhs(s, y, dy). Returns
// false if `stop` fired before reaching s1.
template <class RHS, class Stop = bool (*)(const Y2&)>
bool dp45(RHS rhs, double s0, double s1, Y2& y, double rtol = 1e-13, double atol = 1e-16,
          Stop stop = never_stop) {
    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double E[7] = {35.0 / 384 - 5179.0 / 57600, 0.0,
                                500.0 / 1113 - 7571.0 / 16695, 125.0 / 192 - 393.0 / 640,
                                -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100,
                                -1.0 / 40};
    const double dir = (s1 >= s0) ? 1.0 : -1.0;
    double s = s0;
    double span = std::abs(s1 - s0);
    if (span == 0.0) return true;
    double dt = dir * std::min(span, 1e-3);
    Y2 k[7];
    int steps = 0;
    while (dir * (s1 - s) > 0.0) {
        if (++steps > 2000000) throw NonConvergence("dp45: step cap exceeded");
        if (dir * (s + dt - s1) > 0.0) dt = s1 - s;
        rhs(s, y, k[0]);
        Y2 yt;
        for (int i = 1; i < 7; ++i) {
            yt = y;
            for (int j = 0; j < i; ++j) {
                yt[0] += dt * A[i][j] * k[j][0];
                yt[1] += dt * A[i][j] * k[j][1];
            }
            rhs(s + C[i] * dt, yt, k[i]);
        }
        // yt now holds the 5th-order solution (last stage is FSAL-style row).
        double err = 0.0;
        for (int c = 0; c < 2; ++c) {
            double ec = 0.0;
            for (int i = 0; i < 7; ++i) ec += E[i] * k[i][c];
            ec *= dt;
            double sc = atol + rtol * std::max(std::abs(y[c]), std::abs(yt[c]));
            err = std::max(err, std::abs(ec) / sc);
        }
        if (err <= 1.0) {
            s += dt;
            y = yt;
            if (stop(y)) return false;
        }
        double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        dt *= fac;
        if (std::abs(dt) < 1e-16 * std::max(1.0, std::abs(s)))
            throw NonConvergence("dp45: step underflow");
    }
    return true;
}

constexpr double SQ2 = 1.4142135623730951;

// Forward integration of the self-dual system in s-units. On [0, s_core] the
// regularized variable F = f/s^n is used (F' = -(n a / s) F), which is smooth
// at s = 0 and keeps the core coefficient well-conditioned for every n.
struct ForwardSolver {
    int n;
    double s_core = 1.0;

    Y2 at(double c, double s_to) const {
        Y2 y{c, 0.0}; // (F, a)
        auto rhs_core = [this](double s, const Y2& u, Y2& du) {
            if (s == 0.0) { du = {0.0, 0.0}; return; }
            double f = u[0] * std::pow(s, n);
            du[0] = -(n * u[1] / s) * u[0];
            du[1] = (s / n) * (1.0 - f * f);
        };
        auto rhs_full = [this](double s, const Y2& u, Y2& du) {
            du[0] = (n / s) * (1.0 - u[1]) * u[0];
            du[1] = (s / n) * (1.0 - u[0] * u[0]);
        };
        if (s_to <= s_core) {
            dp45(rhs_core, 0.0, s_to, y);
            y[0] *= std::pow(s_to, n);
            return y;
        }
        dp45(rhs_core, 0.0, s_core, y);
        y[0] *= std::pow(s_core, n);
        dp45(rhs_full, s_core, s_to, y);
        return y;
    }

    // Classifies c for bisection: true if f overshoots 1 before s_max.
    bool overshoots(double c, double s_max) const {
        Y2 y{c, 0.0};
        auto rhs_core = [this](double s, const Y2& u, Y2& du) {
            if (s == 0.0) { du = {0.0, 0.0}; return; }
            double f = u[0] * std::pow(s, n);
            du[0] = -(n * u[1] / s) * u[0];
            du[1] = (s / n) * (1.0 - f * f);
        };
        dp45(rhs_core, 0.0, s_core, y, 1e-12, 1e-14);
        y[0] *= std::pow(s_core, n);
        auto rhs_full = [this](double s, const Y2& u, Y2& du) {
            du[0] = (n / s) * (1.0 - u[1]) * u[0];
            du[1] = (s / n) * (1.0 - u[0] * u[0]);
        };
        auto escaped = [](const Y2& u) { return u[0] > 1.0 + 1e-12 || u[1] > 1.2; };
        if (!dp45(rhs_full, s_core, s_max, y, 1e-12, 1e-14, +escaped))
            return y[0] > 1.0 + 1e-12;
        return y[0] > 1.0;
    }
};

// Backward integration from the linearized tail
//   1 - f = alpha K0(sqrt2 s),  1 - a = (sqrt2 s alpha / n) K1(sqrt2 s).
struct BackwardSolver {
    int n;
    double s_max;

    Y2 at(double alpha, double s_to) const {
        double g = alpha * std::cyl_bessel_k(0, SQ2 * s_max);
        double b = SQ2 * s_max * alpha / n * std::cyl_bessel_k(1, SQ2 * s_max);
        Y2 y{1.0 - g, 1.0 - b};
        auto rhs_full = [this](double s, const Y2& u, Y2& du) {
            du[0] = (n / s) * (1.0 - u[1]) * u[0];
            du[1] = (s / n) * (1.0 - u[0] * u[0]);
        };
        dp45(rhs_full, s_max, s_to, y);
        return y;
    }
};

struct ShootingSolution {
    double c = 0.0, alpha = 0.0;
    double s_mid = 0.0, s_max = 0.0;
    int n = 0;
};

ShootingSolution shoot_two_sided(int n, double s_max) {
    ForwardSolver fwd{n};
    BackwardSolver bwd{n, s_max};
    const double s_mid = std::min(2.0 + n, 0.5 * s_max);

    // bracket the core coefficient
    double lo = 0.0, hi = 4.0;
    if (!fwd.overshoots(hi, s_max))
        throw NonConvergence("shooting: bisection bracket failure (hi)");
    for (int it = 0; it < 90 && (hi - lo) > 1e-17 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (fwd.overshoots(mid, s_max) ? hi : lo) = mid;
    }
    double c = 0.5 * (lo + hi);

    Y2 yf = fwd.at(c, s_mid);
    double alpha = (1.0 - yf[0]) / std::cyl_bessel_k(0, SQ2 * s_mid);

    auto mismatch = [&](double cc, double aa, Y2& R) {
        Y2 F = fwd.at(cc, s_mid), B = bwd.at(aa, s_mid);
        R = {F[0] - B[0], F[1] - B[1]};
    };

    Y2 R;
    mismatch(c, alpha, R);
    double best = std::max(std::abs(R[0]), std::abs(R[1]));
    double bc = c, ba = alpha;
    for (int it = 0; it < 40 && best > 1e-14; ++it) {
        double dc = 1e-7 * std::max(std::abs(c), 1e-3);
        double da = 1e-7 * std::max(std::abs(alpha), 1e-3);
        Y2 Rc, Ra;
        mismatch(c + dc, alpha, Rc);
        mismatch(c, alpha + da, Ra);
        double J00 = (Rc[0] - R[0]) / dc, J01 = (Ra[0] - R[0]) / da;
        double J10 = (Rc[1] - R[1]) / dc, J11 = (Ra[1] - R[1]) / da;
        double det = J00 * J11 - J01 * J10;
        if (det == 0.0) break;
        double sc = (R[0] * J11 - R[1] * J01) / det;
        double sa = (J00 * R[1] - J10 * R[0]) / det;
        double lam = 1.0;
        for (int k = 0; k < 8; ++k, lam *= 0.5) {
            Y2 Rt;
            mismatch(c - lam * sc, alpha - lam * sa, Rt);
            double m = std::max(std::abs(Rt[0]), std::abs(Rt[1]));
            if (m < best) {
                c -= lam * sc;
                alpha -= lam * sa;
                R = Rt;
                best = m;
                bc = c;
                ba = alpha;
                break;
            }
        }
    }
    if (best > 1e-9)
        throw NonConvergence("shooting: tail matching stalled at " + std::to_string(best));
    return {bc, ba, s_mid, s_max, n};
}

// Fill a uniform s-grid from the matched solution. Around s_mid the forward
// and backward branches are blended over a +-1 window so the residual sees
// no derivative kink from the (tiny) matching mismatch.
void fill_grid(const ShootingSolution& sol, const std::vector<double>& s,
               std::vector<double>& f, std::vector<double>& a) {
    const int n = sol.n;
    ForwardSolver fwd{n};
    const double w0 = sol.s_mid - 1.0, w1 = sol.s_mid + 1.0;
    const std::size_t M = s.size();
    f.assign(M, 1.0);
    a.assign(M, 1.0);

    // forward sweep up to w1
    {
        Y2 y{sol.c, 0.0};
        auto rhs_core = [n](double ss, const Y2& u, Y2& du) {
            if (ss == 0.0) { du = {0.0, 0.0}; return; }
            double ff = u[0] * std::pow(ss, n);
            du[0] = -(n * u[1] / ss) * u[0];
            du[1] = (ss / n) * (1.0 - ff * ff);
        };
        auto rhs_full = [n](double ss, const Y2& u, Y2& du) {
            du[0] = (n / ss) * (1.0 - u[1]) * u[0];
            du[1] = (ss / n) * (1.0 - u[0] * u[0]);
        };
        double cur = 0.0;
        bool core = true;
        for (std::size_t i = 0; i < M && s[i] <= w1 + 1e-12; ++i) {
            double tgt = s[i];
            if (core && tgt > fwd.s_core) {
                dp45(rhs_core, cur, fwd.s_core, y);
                y[0] *= std::pow(fwd.s_core, n);
                cur = fwd.s_core;
                core = false;
            }
            if (core) {
                dp45(rhs_core, cur, tgt, y);
                cur = tgt;
                f[i] = y[0] * std::pow(tgt, n);
                a[i] = y[1];
            } else {
                dp45(rhs_full, cur, tgt, y);
                cur = tgt;
                f[i] = y[0];
                a[i] = y[1];
            }
        }
    }
    // backward sweep down to w0, blending on [w0, w1]
    {
        double g = sol.alpha * std::cyl_bessel_k(0, SQ2 * sol.s_max);
        double b = SQ2 * sol.s_max * sol.alpha / n * std::cyl_bessel_k(1, SQ2 * sol.s_max);
        Y2 y{1.0 - g, 1.0 - b};
        auto rhs_full = [n](double ss, const Y2& u, Y2& du) {
            du[0] = (n / ss) * (1.0 - u[1]) * u[0];
            du[1] = (ss / n) * (1.0 - u[0] * u[0]);
        };
        double cur = sol.s_max;
        for (std::size_t k = M; k-- > 0;) {
            if (s[k] >= sol.s_max) { f[k] = y[0]; a[k] = y[1]; continue; }
            if (s[k] < w0 - 1e-12) break;
            dp45(rhs_full, cur, s[k], y);
            cur = s[k];
            if (s[k] >= w1 - 1e-12) {
                f[k] = y[0];
                a[k] = y[1];
            } else {
                double t = (s[k] - w0) / (w1 - w0);
                double w = t * t * (3.0 - 2.0 * t); // smoothstep, weight of backward branch
                f[k] = (1.0 - w) * f[k] + w * y[0];
                a[k] = (1.0 - w) * a[k] + w * y[1];
            }
        }
    }
    for (std::size_t i = 0; i < M; ++i) {
        f[i] = std::clamp(f[i], 0.0, 1.0);
        a[i] = std::clamp(a[i], 0.0, 1.0);
    }
}

// Pointwise residual of the first-order system, 5-point 4th-order derivative,
// in s-units.
void measure_residual(int n, const std::vector<double>& s, const std::vector<double>& f,
                      const std::vector<double>& a, std::vector<double>& res, double& norm) {
    const std::size_t M = s.size();
    res.assign(M, 0.0);
    if (n == 0 || M < 5) { norm = 0.0; return; }
    const double h = s[1] - s[0];
    for (std::size_t i = 2; i + 2 < M; ++i) {
        double fp = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
        double ap = (a[i - 2] - 8 * a[i - 1] + 8 * a[i + 1] - a[i + 2]) / (12 * h);
        double rf = fp - (n / s[i]) * (1.0 - a[i]) * f[i];
        double ra = ap - (s[i] / n) * (1.0 - f[i] * f[i]);
        res[i] = std::max(std::abs(rf), std::abs(ra));
    }
    res[0] = res[1] = res[2];
    res[M - 1] = res[M - 2] = res[M - 3];
    norm = *std::max_element(res.begin(), res.end());
}

// --- relaxation: damped Newton on the second-order critical-coupling field
// equations, block-tridiagonal (2x2) elimination, Dirichlet at both ends.
struct Block2 {
    double m[2][2];
};

void relax_on_grid(int n, const std::vector<double>& s, std::vector<double>& f,
                   std::vector<double>& a, double f_R = 1.0, double a_R = 1.0) {
    const std::size_t M = s.size();
    const double h = s[1] - s[0];
    const std::size_t N = M - 2;
    f.resize(M);
    a.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        f[i] = std::pow(std::tanh(0.7 * s[i] / std::sqrt(double(n))), n);
        a[i] = 1.0 - std::exp(-s[i] * s[i] / (2.0 * n));
    }
    f[0] = 0.0; a[0] = 0.0; f[M - 1] = f_R; a[M - 1] = a_R;

    std::vector<Block2> L(N), D(N), U(N), Dw(N);
    std::vector<std::array<double, 2>> R(N), Rw(N), d(N);

    auto residual = [&](const std::vector<double>& ff, const std::vector<double>& aa,
                        std::vector<std::array<double, 2>>& out) {
        double mx = 0.0;
        for (std::size_t i = 1; i + 1 < M; ++i) {
            double si = s[i];
            double fpp = (ff[i + 1] - 2 * ff[i] + ff[i - 1]) / (h * h);
            double fp = (ff[i + 1] - ff[i - 1]) / (2 * h);
            double app = (aa[i + 1] - 2 * aa[i] + aa[i - 1]) / (h * h);
            double ap = (aa[i + 1] - aa[i - 1]) / (2 * h);
            double rf = fpp + fp / si - n * n * (1 - aa[i]) * (1 - aa[i]) * ff[i] / (si * si) +
                        (1 - ff[i] * ff[i]) * ff[i];
            double ra = app - ap / si + 2 * ff[i] * ff[i] * (1 - aa[i]);
            out[i - 1] = {rf, ra};
            mx = std::max(mx, std::max(std::abs(rf), std::abs(ra)));
        }
        return mx;
    };

    // the second-difference roundoff floor scales like eps/h^2
    const double tol_newton = std::max(1e-13, 10.0 * 2.22e-16 / (h * h));
    double rn = residual(f, a, R);
    bool stalled = false;
    for (int it = 0; it < 80 && !stalled; ++it) {
        if (rn < tol_newton) break;
        for (std::size_t i = 1; i + 1 < M; ++i) {
            std::size_t k = i - 1;
            double si = s[i];
            double off = 1.0 / (h * h);
            L[k] = {{{off - 1.0 / (2 * h * si), 0.0}, {0.0, off + 1.0 / (2 * h * si)}}};
            U[k] = {{{off + 1.0 / (2 * h * si), 0.0}, {0.0, off - 1.0 / (2 * h * si)}}};
            D[k] = {{{-2.0 / (h * h) - n * n * (1 - a[i]) * (1 - a[i]) / (si * si) + 1 -
                          3 * f[i] * f[i],
                      2.0 * n * n * (1 - a[i]) * f[i] / (si * si)},
                     {4.0 * f[i] * (1 - a[i]), -2.0 / (h * h) - 2.0 * f[i] * f[i]}}};
        }
        // block Thomas: solve J d = -R
        Dw = D;
        Rw = R;
        for (std::size_t k = 0; k < N; ++k) Rw[k] = {-R[k][0], -R[k][1]};
        for (std::size_t k = 1; k < N; ++k) {
            auto& P = Dw[k - 1];
            double det = P.m[0][0] * P.m[1][1] - P.m[0][1] * P.m[1][0];
            double inv[2][2] = {{P.m[1][1] / det, -P.m[0][1] / det},
                                {-P.m[1][0] / det, P.m[0][0] / det}};
            // W = L[k] * inv
            double W[2][2];
            for (int r = 0; r < 2; ++r)
                for (int c2 = 0; c2 < 2; ++c2)
                    W[r][c2] = L[k].m[r][0] * inv[0][c2] + L[k].m[r][1] * inv[1][c2];
            for (int r = 0; r < 2; ++r)
                for (int c2 = 0; c2 < 2; ++c2)
                    Dw[k].m[r][c2] -= W[r][0] * U[k - 1].m[0][c2] + W[r][1] * U[k - 1].m[1][c2];
            for (int r = 0; r < 2; ++r)
                Rw[k][r] -= W[r][0] * Rw[k - 1][0] + W[r][1] * Rw[k - 1][1];
        }
        for (std::size_t k = N; k-- > 0;) {
            double rhs[2] = {Rw[k][0], Rw[k][1]};
            if (k + 1 < N) {
                rhs[0] -= U[k].m[0][0] * d[k + 1][0] + U[k].m[0][1] * d[k + 1][1];
                rhs[1] -= U[k].m[1][0] * d[k + 1][0] + U[k].m[1][1] * d[k + 1][1];
            }
            auto& P = Dw[k];
            double det = P.m[0][0] * P.m[1][1] - P.m[0][1] * P.m[1][0];
            d[k][0] = (P.m[1][1] * rhs[0] - P.m[0][1] * rhs[1]) / det;
            d[k][1] = (-P.m[1][0] * rhs[0] + P.m[0][0] * rhs[1]) / det;
        }
        // damped update
        double lam = 1.0;
        std::vector<double> ft(f), at(a);
        for (int tr = 0; tr < 10; ++tr, lam *= 0.5) {
            for (std::size_t i = 1; i + 1 < M; ++i) {
                ft[i] = f[i] + lam * d[i - 1][0];
                at[i] = a[i] + lam * d[i - 1][1];
            }
            double rt = residual(ft, at, Rw);
            if (rt < rn) {
                f.swap(ft);
                a.swap(at);
                R = Rw;
                rn = rt;
                break;
            }
            if (tr == 9) stalled = true; // no decrease: at the roundoff floor or stuck
        }
    }
    if (rn > 100.0 * tol_newton)
        throw NonConvergence("relaxation: Newton stalled at " + std::to_string(rn));
}

double fit_core_coefficient(int n, const std::vector<double>& s, const std::vector<double>& f) {
    if (n == 0) return 0.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < s.size() && i <= 12; ++i) {
        double w = std::pow(s[i], n);
        num += w * f[i];
        den += w * w;
    }
    if (den == 0.0) throw InterpolationError("core fit: degenerate grid");
    return num / den;
}

} // namespace

RadialProfile solve_profile(const VortexParams& params, ProfileMethod method) {
    params.validate();
    RadialProfile out;
    out.params = params;
    out.method = method;
    const int M = params.m_r;
    const double ev = params.scale();
    out.r.resize(M);
    for (int i = 0; i < M; ++i) out.r[i] = params.r_max * double(i) / (M - 1);

    if (params.n == 0) { // vacuum: phi = v, A = 0 solves both equations exactly
        out.f.assign(M, 1.0);
        out.a.assign(M, 0.0);
        out.residual.assign(M, 0.0);
        out.residual_norm = 0.0;
        out.core_coefficient = 0.0;
        return out;
    }

    std::vector<double> s(M);
    for (int i = 0; i < M; ++i) s[i] = ev * out.r[i];
    const double s_max = ev * params.r_max;

    if (method == ProfileMethod::shooting) {
        ShootingSolution sol = shoot_two_sided(params.n, s_max);
        fill_grid(sol, s, out.f, out.a);
        out.core_coefficient = sol.c;
    } else {
        // Newton on internally refined grids (the 1/s terms spoil a clean h^2
        // expansion near the origin), then h -> h/2 Richardson, then
        // restriction onto the requested nodes.
        const int R = 2;
        const int M1 = R * (M - 1) + 1, M2 = 2 * R * (M - 1) + 1;
        std::vector<double> s1(M1), s2(M2), f1, a1, f2, a2;
        for (int i = 0; i < M1; ++i) s1[i] = s_max * double(i) / (M1 - 1);
        for (int i = 0; i < M2; ++i) s2[i] = s_max * double(i) / (M2 - 1);
        // preliminary pass with f = a = 1 at the far end; its tail fixes the
        // amplitude of 1 - f ~ alpha K0(sqrt2 s), so the final boundary
        // values carry no artificial kink
        relax_on_grid(params.n, s1, f1, a1);
        const double s_fit = std::max(0.5 * s_max, s_max - 2.0);
        int i_fit = static_cast<int>(std::lround(s_fit / (s1[1] - s1[0])));
        double alpha_hat =
            (1.0 - f1[i_fit]) / std::cyl_bessel_k(0, std::sqrt(2.0) * s1[i_fit]);
        double f_R = 1.0 - alpha_hat * std::cyl_bessel_k(0, std::sqrt(2.0) * s_max);
        double a_R = 1.0 - std::sqrt(2.0) * s_max * alpha_hat / params.n *
                               std::cyl_bessel_k(1, std::sqrt(2.0) * s_max);
        relax_on_grid(params.n, s1, f1, a1, f_R, a_R);
        relax_on_grid(params.n, s2, f2, a2, f_R, a_R);
        out.f.resize(M);
        out.a.resize(M);
        for (int i = 0; i < M; ++i) {
            out.f[i] = std::clamp((4.0 * f2[2 * R * i] - f1[R * i]) / 3.0, 0.0, 1.0);
            out.a[i] = std::clamp((4.0 * a2[2 * R * i] - a1[R * i]) / 3.0, 0.0, 1.0);
        }
        out.f[0] = 0.0; out.a[0] = 0.0;
        out.core_coefficient = fit_core_coefficient(params.n, s, out.f);
    }
    measure_residual(params.n, s, out.f, out.a, out.residual, out.residual_norm);
    return out;
}

ProfileInterpolant::ProfileInterpolant(const RadialProfile& p) : p_(&p) {
    const auto& r = p.r;
    dr_ = r.size() > 1 ? r[1] - r[0] : 1.0;
    const double ev = p.params.scale();
    const int n = p.params.n;
    d_ = (n > 0) ? ev * ev / (2.0 * n) : 0.0;
    r_series_ = 2.0 * dr_;
    if (n == 0) { c_ = 0.0; return; }
    // c in f ~ c (ev r)^n from the stored core coefficient when available,
    // refit otherwise
    c_ = p.core_coefficient;
    if (c_ <= 0.0) {
        double num = 0, den = 0;
        for (std::size_t i = 1; i < r.size() && i <= 12; ++i) {
            double w = std::pow(ev * r[i], n);
            num += w * p.f[i];
            den += w * w;
        }
        if (den == 0.0) throw InterpolationError("profile grid too coarse near origin");
        c_ = num / den;
    }
    // sanity: the series must reproduce the first nodes
    if (r.size() > 3) {
        double pred = c_ * std::pow(ev * r[2], n);
        if (std::abs(pred - p.f[2]) > 5e-2 * std::max(1e-12, p.f[2]) + 1e-9)
            throw InterpolationError("profile grid too coarse near origin (series misfit)");
    }
}

void ProfileInterpolant::eval(double r, double& f, double& a) const {
    const auto& P = *p_;
    const int n = P.params.n;
    const double ev = P.params.scale();
    if (n == 0) { f = 1.0; a = 0.0; return; }
    if (r >= P.params.r_max) { f = 1.0; a = 1.0; return; }
    if (r < r_series_) {
        f = std::clamp(c_ * std::pow(ev * r, n), 0.0, 1.0);
        a = std::clamp(d_ * r * r, 0.0, 1.0);
        return;
    }
    // Catmull-Rom on the uniform grid
    double t = r / dr_;
    std::size_t i = std::min(static_cast<std::size_t>(t), P.r.size() - 2);
    if (i == 0) i = 1;
    if (i + 2 >= P.r.size()) i = P.r.size() - 3;
    double x = t - i;
    auto cr = [x](double ym1, double y0, double y1, double y2) {
        return y0 + 0.5 * x * (y1 - ym1 + x * (2 * ym1 - 5 * y0 + 4 * y1 - y2 +
                                               x * (3 * (y0 - y1) + y2 - ym1)));
    };
    f = std::clamp(cr(P.f[i - 1], P.f[i], P.f[i + 1], P.f[i + 2]), 0.0, 1.0);
    a = std::clamp(cr(P.a[i - 1], P.a[i], P.a[i + 1], P.a[i + 2]), 0.0, 1.0);
}

double ProfileInterpolant::f_at(double r) const {
    double f, a;
    eval(r, f, a);
    return f;
}
double ProfileInterpolant::a_at(double r) const {
    double f, a;
    eval(r, f, a);
    return a;
}
double ProfileInterpolant::fprime_at(double r) const {
    const int n = p_->params.n;
    const double ev = p_->params.scale();
    if (n == 0) return 0.0;
    if (r <= 0.0) return (n == 1) ? ev * c_ : 0.0;
    double f, a;
    eval(r, f, a);
    return (n / r) * (1.0 - a) * f;
}

void export_profile_csv(const RadialProfile& p, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw IOError("cannot open " + path);
    std::fprintf(fp, "r,f,a,residual\n");
    for (std::size_t i = 0; i < p.r.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", p.r[i], p.f[i], p.a[i], p.residual[i]);
    std::fclose(fp);
}

} // namespace lgv
