#include "lgv/bosonmap.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace lgv {

namespace {
constexpr double SQRT2 = 1.4142135623730951;
}

double FluctuationPair::norm_l2() const {
    double s = 0.0;
    for (const cd& z : delta_phi) s += std::norm(z);
    for (double x : delta_A1) s += x * x;
    for (double x : delta_A2) s += x * x;
    return (layout ? layout->h : 1.0) * std::sqrt(s);
}

FluctuationPair fermion_to_boson(const StateVector& mode,
                                 std::shared_ptr<const DiskGrid> layout) {
    if (mode.sector != Sector::fermion_lower)
        throw SectorMismatch("fermion_to_boson: mode must be in the (psi_down, chi_up) sector");
    if (!layout || mode.values.size() != static_cast<std::size_t>(layout->dim()))
        throw LayoutMismatch("fermion_to_boson: mode/layout size");
    const int P = layout->npoints();
    FluctuationPair out;
    out.layout = layout;
    out.delta_phi.resize(P);
    out.delta_A1.resize(P);
    out.delta_A2.resize(P);
    for (int p = 0; p < P; ++p) {
        cd psi = mode.values[2 * p];
        cd chi = mode.values[2 * p + 1];
        out.delta_phi[p] = psi;
        // dA1 + i dA2 = -i sqrt2 chi
        out.delta_A1[p] = SQRT2 * chi.imag();
        out.delta_A2[p] = -SQRT2 * chi.real();
    }
    out.source_mode = mode;
    return out;
}

StateVector boson_to_fermion(const FluctuationPair& pair) {
    if (pair.source_mode) return *pair.source_mode;
    if (!pair.layout) throw LayoutMismatch("boson_to_fermion: missing layout");
    const int P = pair.layout->npoints();
    StateVector v;
    v.sector = Sector::fermion_lower;
    v.h = pair.layout->h;
    v.values.resize(2 * P);
    for (int p = 0; p < P; ++p) {
        v.values[2 * p] = pair.delta_phi[p];
        // chi = (i/sqrt2)(dA1 + i dA2)
        v.values[2 * p + 1] = cd(-pair.delta_A2[p] / SQRT2, pair.delta_A1[p] / SQRT2);
    }
    return v;
}

double bosonic_residual(const FluctuationPair& pair, const Background2D& bg, int scheme) {
    if (!pair.layout) throw GridMismatch("bosonic_residual: missing layout");
    const DiskGrid& g = *pair.layout;
    if (g.m_xy != bg.m_xy || g.r_max != bg.params.r_max)
        throw GridMismatch("bosonic_residual: pair and background grids differ");
    const int P = g.npoints();
    const double e = bg.params.e;
    const double h = g.h;
    const int m = g.m_xy;

    int n_off;
    int off[4];
    double w[4];
    if (scheme == 2) {
        n_off = 2; off[0] = 1; off[1] = -1;
        w[0] = 1.0 / (2 * h); w[1] = -1.0 / (2 * h);
    } else {
        n_off = 4; off[0] = 1; off[1] = -1; off[2] = 2; off[3] = -2;
        w[0] = 8.0 / (12 * h); w[1] = -8.0 / (12 * h); w[2] = -1.0 / (12 * h);
        w[3] = 1.0 / (12 * h);
    }
    auto idx = [&](int i, int j) -> int32_t {
        if (i < 0 || i >= m || j < 0 || j >= m) return -1;
        return g.index[static_cast<std::size_t>(i) * m + j];
    };

    double r1 = 0.0, r2 = 0.0;
    for (int p = 0; p < P; ++p) {
        auto [i, j] = g.points[p];
        std::size_t k = bg.at(i, j);
        cd dphi_dx(0, 0), dphi_dy(0, 0), dw_dx(0, 0), dw_dy(0, 0);
        for (int s = 0; s < n_off; ++s) {
            int32_t qx = idx(i + off[s], j), qy = idx(i, j + off[s]);
            if (qx >= 0) {
                dphi_dx += w[s] * pair.delta_phi[qx];
                dw_dx += w[s] * cd(pair.delta_A1[qx], pair.delta_A2[qx]);
            }
            if (qy >= 0) {
                dphi_dy += w[s] * pair.delta_phi[qy];
                dw_dy += w[s] * cd(pair.delta_A1[qy], pair.delta_A2[qy]);
            }
        }
        cd dA = cd(pair.delta_A1[p], pair.delta_A2[p]);
        cd eq1 = dphi_dx + cd(0, 1) * dphi_dy -
                 cd(0, 1) * e * cd(bg.a1[k], bg.a2[k]) * pair.delta_phi[p] -
                 cd(0, 1) * e * bg.phi[k] * dA;
        cd eq2 = dw_dx - cd(0, 1) * dw_dy + 2.0 * cd(0, 1) * e * std::conj(bg.phi[k]) *
                                                pair.delta_phi[p];
        r1 += std::norm(eq1);
        r2 += std::norm(eq2);
    }
    return h * std::sqrt(std::max(r1, r2));
}

double translation_mode_overlap(const Background2D& bg, const RadialProfile& profile,
                                const std::vector<StateVector>& kernel_basis) {
    if (kernel_basis.size() != 2)
        throw WrongKernelDimension("translation_mode_overlap: expected a kernel of dimension 2");
    auto grid = DiskGrid::make(bg.m_xy, bg.params.r_max);
    const int P = grid->npoints();
    for (const auto& v : kernel_basis)
        if (v.values.size() != static_cast<std::size_t>(2 * P))
            throw LayoutMismatch("translation_mode_overlap: kernel/layout size");

    ProfileInterpolant itp(profile);
    const int n = bg.params.n;
    const double e = bg.params.e, v = bg.params.v;
    // translation span: u and i*u with psi = v f' e^{i(n-1)theta},
    // chi = -e v^2 (1-f^2)/sqrt2  (the x-translation; i*u is the y one)
    std::vector<cd> u(2 * P);
    for (int p = 0; p < P; ++p) {
        auto [i, j] = grid->points[p];
        double x = -bg.params.r_max + grid->h * i, y = -bg.params.r_max + grid->h * j;
        double r = std::hypot(x, y), th = std::atan2(y, x);
        double f, a;
        itp.eval(r, f, a);
        u[2 * p] = v * itp.fprime_at(r) * std::polar(1.0, (n - 1) * th);
        u[2 * p + 1] = -e * v * v * (1.0 - f * f) / SQRT2;
    }

    // real 2M coordinates; principal angles between two real 2-dim spans
    const int64_t M2 = 4 * P;
    Eigen::MatrixXd A(M2, 2), B(M2, 2);
    for (int p = 0; p < 2 * P; ++p) {
        A(p, 0) = u[p].real();
        A(p + 2 * P, 0) = u[p].imag();
        cd iu = cd(0, 1) * u[p];
        A(p, 1) = iu.real();
        A(p + 2 * P, 1) = iu.imag();
        for (int c = 0; c < 2; ++c) {
            B(p, c) = kernel_basis[c].values[p].real();
            B(p + 2 * P, c) = kernel_basis[c].values[p].imag();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qa(A), qb(B);
    Eigen::MatrixXd Qa = qa.householderQ() * Eigen::MatrixXd::Identity(M2, 2);
    Eigen::MatrixXd Qb = qb.householderQ() * Eigen::MatrixXd::Identity(M2, 2);
    Eigen::Matrix2d G = Qa.transpose() * Qb;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(G);
    return svd.singularValues().minCoeff();
}

void export_fluctuation_csv(const FluctuationPair& pair, const std::string& path) {
    if (!pair.layout) throw LayoutMismatch("export_fluctuation_csv: missing layout");
    const DiskGrid& g = *pair.layout;
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw IOError("cannot open " + path);
    std::fprintf(fp, "x,y,re_dphi,im_dphi,dA1,dA2\n");
    for (int p = 0; p < g.npoints(); ++p) {
        auto [i, j] = g.points[p];
        double x = -g.r_max + g.h * i, y = -g.r_max + g.h * j;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, y, pair.delta_phi[p].real(),
                     pair.delta_phi[p].imag(), pair.delta_A1[p], pair.delta_A2[p]);
    }
    std::fclose(fp);
}

} // namespace lgv
