#include "lgv/background.hpp"

#include <cmath>
#include <cstdio>

namespace lgv {

namespace {

inline void sample_point(const ProfileInterpolant& itp, const VortexParams& P, double x, double y,
                         cd& phi, double& A1, double& A2, uint8_t& in) {
    const int n = P.n;
    double r = std::hypot(x, y);
    in = (r < P.r_max) ? 1 : 0;
    double f, a;
    itp.eval(r, f, a);
    if (n == 0) {
        phi = cd(P.v, 0.0);
        A1 = A2 = 0.0;
        return;
    }
    if (r == 0.0) {
        phi = cd(0.0, 0.0);
        // a ~ d r^2 keeps A finite at the origin; the limit is 0 on the node
        A1 = A2 = 0.0;
        return;
    }
    double th = std::atan2(y, x);
    phi = P.v * f * std::polar(1.0, n * th);
    double ar2 = a / (r * r);
    if (r < 2.0 * (P.r_max / (P.m_r - 1))) ar2 = itp.core_d(); // series: a/r^2 -> d
    A1 = -n * ar2 * y / P.e;
    A2 = n * ar2 * x / P.e;
}

Background2D sample_impl(const RadialProfile& profile, int m_xy, bool parallel) {
    if (m_xy < 64) throw InvalidParams("m_xy must be >= 64");
    if (profile.params.n >= 1 && profile.residual_norm > 1e-6)
        throw InvalidParams("profile not converged (residual_norm too large)");
    ProfileInterpolant itp(profile);
    Background2D bg;
    bg.params = profile.params;
    bg.m_xy = m_xy;
    bg.h = 2.0 * profile.params.r_max / (m_xy - 1);
    const std::size_t N = static_cast<std::size_t>(m_xy) * m_xy;
    bg.phi.resize(N);
    bg.a1.resize(N);
    bg.a2.resize(N);
    bg.mask.resize(N);

#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < m_xy; ++i) {
        double x = bg.x(i);
        for (int j = 0; j < m_xy; ++j) {
            std::size_t k = bg.at(i, j);
            sample_point(itp, bg.params, x, bg.y(j), bg.phi[k], bg.a1[k], bg.a2[k], bg.mask[k]);
        }
    }
    return bg;
}

} // namespace

Background2D sample_background(const RadialProfile& profile, int m_xy) {
    return sample_impl(profile, m_xy, true);
}
Background2D sample_background_serial(const RadialProfile& profile, int m_xy) {
    return sample_impl(profile, m_xy, false);
}

double flux(const Background2D& bg) {
    const int m = bg.m_xy;
    const double h = bg.h;
    double total = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j + 1 < m; ++j) {
            if (!(bg.mask[bg.at(i, j)] && bg.mask[bg.at(i + 1, j)] && bg.mask[bg.at(i, j + 1)] &&
                  bg.mask[bg.at(i + 1, j + 1)]))
                continue;
            // trapezoid circulation around the cell; interior edges cancel in the sum
            double a1_lo = 0.5 * (bg.a1[bg.at(i, j)] + bg.a1[bg.at(i + 1, j)]);
            double a1_hi = 0.5 * (bg.a1[bg.at(i, j + 1)] + bg.a1[bg.at(i + 1, j + 1)]);
            double a2_l = 0.5 * (bg.a2[bg.at(i, j)] + bg.a2[bg.at(i, j + 1)]);
            double a2_r = 0.5 * (bg.a2[bg.at(i + 1, j)] + bg.a2[bg.at(i + 1, j + 1)]);
            total += (a1_lo - a1_hi + a2_r - a2_l) * h;
        }
    }
    return total;
}

double energy(const Background2D& bg) {
    const int m = bg.m_xy;
    const double h = bg.h, e = bg.params.e, v = bg.params.v;
    double total = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j + 1 < m; ++j) {
            std::size_t k00 = bg.at(i, j), k10 = bg.at(i + 1, j), k01 = bg.at(i, j + 1),
                        k11 = bg.at(i + 1, j + 1);
            if (!(bg.mask[k00] && bg.mask[k10] && bg.mask[k01] && bg.mask[k11])) continue;
            cd phicc = 0.25 * (bg.phi[k00] + bg.phi[k10] + bg.phi[k01] + bg.phi[k11]);
            cd d1 = (0.5 * (bg.phi[k10] + bg.phi[k11]) - 0.5 * (bg.phi[k00] + bg.phi[k01])) / h;
            cd d2 = (0.5 * (bg.phi[k01] + bg.phi[k11]) - 0.5 * (bg.phi[k00] + bg.phi[k10])) / h;
            double A1 = 0.25 * (bg.a1[k00] + bg.a1[k10] + bg.a1[k01] + bg.a1[k11]);
            double A2 = 0.25 * (bg.a2[k00] + bg.a2[k10] + bg.a2[k01] + bg.a2[k11]);
            cd D1 = d1 - cd(0, 1) * e * A1 * phicc;
            cd D2 = d2 - cd(0, 1) * e * A2 * phicc;
            double a1_lo = 0.5 * (bg.a1[k00] + bg.a1[k10]);
            double a1_hi = 0.5 * (bg.a1[k01] + bg.a1[k11]);
            double a2_l = 0.5 * (bg.a2[k00] + bg.a2[k01]);
            double a2_r = 0.5 * (bg.a2[k10] + bg.a2[k11]);
            double F12 = (a1_lo - a1_hi + a2_r - a2_l) / h;
            double pot = std::norm(phicc) - v * v;
            total += 0.5 * F12 * F12 + std::norm(D1) + std::norm(D2) + 0.5 * e * e * pot * pot;
        }
    }
    return total * h * h;
}

int boundary_winding(const Background2D& bg) {
    const int m = bg.m_xy;
    const double rb = 0.9 * bg.params.r_max;
    const int K = 2048;
    double prev = 0.0, acc = 0.0;
    for (int k = 0; k <= K; ++k) {
        double th = 2.0 * M_PI * k / K;
        double x = rb * std::cos(th), y = rb * std::sin(th);
        // bilinear interpolation of phi
        double gi = (x + bg.params.r_max) / bg.h, gj = (y + bg.params.r_max) / bg.h;
        int i = std::min(static_cast<int>(gi), m - 2), j = std::min(static_cast<int>(gj), m - 2);
        double tx = gi - i, ty = gj - j;
        cd p = (1 - tx) * (1 - ty) * bg.phi[bg.at(i, j)] + tx * (1 - ty) * bg.phi[bg.at(i + 1, j)] +
               (1 - tx) * ty * bg.phi[bg.at(i, j + 1)] + tx * ty * bg.phi[bg.at(i + 1, j + 1)];
        double ph = std::arg(p);
        if (k > 0) {
            double d = ph - prev;
            while (d > M_PI) d -= 2 * M_PI;
            while (d < -M_PI) d += 2 * M_PI;
            acc += d;
        }
        prev = ph;
    }
    return static_cast<int>(std::lround(acc / (2 * M_PI)));
}

void export_background_csv(const Background2D& bg, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw IOError("cannot open " + path);
    std::fprintf(fp, "x,y,re_phi,im_phi,a1,a2,in_domain\n");
    for (int i = 0; i < bg.m_xy; ++i)
        for (int j = 0; j < bg.m_xy; ++j) {
            std::size_t k = bg.at(i, j);
            std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", bg.x(i), bg.y(j),
                         bg.phi[k].real(), bg.phi[k].imag(), bg.a1[k], bg.a2[k],
                         static_cast<int>(bg.mask[k]));
        }
    std::fclose(fp);
}

} // namespace lgv
