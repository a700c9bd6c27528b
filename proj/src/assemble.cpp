#include "lgv/assemble.hpp"

#include <algorithm>
#include <cmath>

namespace lgv {

namespace {

constexpr double SQRT2 = 1.4142135623730951;

struct Stencil {
    int n_off;
    int off[4];
    double w[4];
};

Stencil make_stencil(int scheme, double h) {
    if (scheme == 2) return {2, {1, -1, 0, 0}, {1.0 / (2 * h), -1.0 / (2 * h), 0, 0}};
    if (scheme == 4)
        return {4,
                {1, -1, 2, -2},
                {8.0 / (12 * h), -8.0 / (12 * h), -1.0 / (12 * h), 1.0 / (12 * h)}};
    throw InvalidParams("scheme must be 2 or 4");
}

void check_guard(const Background2D& bg, const DiskGrid& g) {
    double m = 0.0;
    for (int p = 0; p < g.npoints(); ++p) {
        auto [i, j] = g.points[p];
        std::size_t k = bg.at(i, j);
        m = std::max(m, bg.params.e * std::hypot(bg.a1[k], bg.a2[k]));
    }
    if (m * g.h >= 0.5)
        throw StencilOverflow("max|eA|*h = " + std::to_string(m * g.h) + " >= 0.5");
}

// shared skeleton: rows for one grid point, given the two coupling
// coefficients and the sign of the i*d2 part in each row
template <class CoupFn>
SparseOperator assemble_common(const Background2D& bg, int scheme, CoupFn coup) {
    auto grid = DiskGrid::make(bg.m_xy, bg.params.r_max);
    check_guard(bg, *grid);
    const Stencil st = make_stencil(scheme, grid->h);
    const int P = grid->npoints();

    SparseOperator op;
    op.rows = op.cols = 2 * P;
    op.h = grid->h;
    op.scheme = scheme;
    op.scale = bg.params.scale();
    op.layout = grid;

    const int m = bg.m_xy;
    auto at_idx = [&](int i, int j) -> int32_t {
        if (i < 0 || i >= m || j < 0 || j >= m) return -1;
        return grid->index[static_cast<std::size_t>(i) * m + j];
    };

    // pass 1: count per-row entries
    std::vector<int> cnt(2 * P, 0);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < P; ++p) {
        auto [i, j] = grid->points[p];
        int nb = 0;
        for (int s = 0; s < st.n_off; ++s) {
            int o = st.off[s];
            if (at_idx(i + o, j) >= 0) ++nb;
            if (at_idx(i, j + o) >= 0) ++nb;
        }
        cnt[2 * p] = nb + 2;     // derivatives + gauge diagonal + coupling
        cnt[2 * p + 1] = nb + 1; // derivatives + coupling
    }
    std::vector<int64_t> ofs(2 * P + 1, 0);
    for (int r = 0; r < 2 * P; ++r) ofs[r + 1] = ofs[r] + cnt[r];
    op.entries.resize(ofs[2 * P]);

    // pass 2: fill rows (each row owned by one point; deterministic)
#pragma omp parallel for schedule(static)
    for (int p = 0; p < P; ++p) {
        auto [i, j] = grid->points[p];
        std::size_t k = bg.at(i, j);
        cd c01, c10, diag0;
        coup(bg, k, c01, c10, diag0);

        CooEntry loc[12];
        int n0 = 0;
        for (int s = 0; s < st.n_off; ++s) {
            int o = st.off[s];
            int32_t qx = at_idx(i + o, j);
            if (qx >= 0) loc[n0++] = {2 * p, 2 * qx, cd(st.w[s], 0.0)};
            int32_t qy = at_idx(i, j + o);
            if (qy >= 0) loc[n0++] = {2 * p, 2 * qy, cd(0.0, st.w[s])};
        }
        loc[n0++] = {2 * p, 2 * p, diag0};
        loc[n0++] = {2 * p, 2 * p + 1, c01};
        // merge duplicate columns is unnecessary: derivative targets are
        // distinct from p, diagonal and coupling are unique
        std::sort(loc, loc + n0,
                  [](const CooEntry& a, const CooEntry& b) { return a.col < b.col; });
        std::copy(loc, loc + n0, op.entries.begin() + ofs[2 * p]);

        int n1 = 0;
        for (int s = 0; s < st.n_off; ++s) {
            int o = st.off[s];
            int32_t qx = at_idx(i + o, j);
            if (qx >= 0) loc[n1++] = {2 * p + 1, 2 * qx + 1, cd(st.w[s], 0.0)};
            int32_t qy = at_idx(i, j + o);
            if (qy >= 0) loc[n1++] = {2 * p + 1, 2 * qy + 1, cd(0.0, -st.w[s])};
        }
        loc[n1++] = {2 * p + 1, 2 * p, c10};
        std::sort(loc, loc + n1,
                  [](const CooEntry& a, const CooEntry& b) { return a.col < b.col; });
        std::copy(loc, loc + n1, op.entries.begin() + ofs[2 * p + 1]);
    }
    return op;
}

} // namespace

SparseOperator assemble_D(const Background2D& bg, int scheme) {
    const double e = bg.params.e;
    // row 0: (D1 + i D2) psi - sqrt2 e phi chi, covariant term -i e (A1 + i A2)
    // row 1: (d1 - i d2) chi - sqrt2 e phi* psi
    return assemble_common(bg, scheme,
                           [e](const Background2D& b, std::size_t k, cd& c01, cd& c10, cd& d0) {
                               c01 = -(SQRT2 * e) * b.phi[k];
                               c10 = -(SQRT2 * e) * std::conj(b.phi[k]);
                               d0 = cd(0.0, -e) * cd(b.a1[k], b.a2[k]);
                           });
}

SparseOperator assemble_D_adjoint(const Background2D& bg, int scheme) {
    return conjugate_transpose(assemble_D(bg, scheme));
}

SparseOperator assemble_D_boson(const Background2D& bg, int scheme) {
    const double e = bg.params.e;
    // In the variables psi = dphi, chi = (i/sqrt2)(dA1 + i dA2):
    //   eq 1: (D1 + i D2) dphi - i e phi (dA1 + i dA2)
    //         = (D1 + i D2) psi - i e phi (-i sqrt2 chi)   ->  c01 = -sqrt2 e phi
    //   eq 2: (i/sqrt2) [ (d1 - i d2)(dA1 + i dA2) + 2 i e phi* dphi ]
    //         = (d1 - i d2) chi - sqrt2 e phi* psi         ->  c10 = -sqrt2 e phi*
    return assemble_common(bg, scheme,
                           [e](const Background2D& b, std::size_t k, cd& c01, cd& c10, cd& d0) {
                               c01 = -(SQRT2 * e) * b.phi[k];
                               c10 = -(SQRT2 * e) * std::conj(b.phi[k]);
                               d0 = cd(0.0, -e) * cd(b.a1[k], b.a2[k]);
                           });
}

namespace {

void apply_impl(const Background2D& bg, int scheme, const std::vector<cd>& x, std::vector<cd>& y,
                bool parallel) {
    auto grid = DiskGrid::make(bg.m_xy, bg.params.r_max);
    const Stencil st = make_stencil(scheme, grid->h);
    const int P = grid->npoints();
    if (x.size() != static_cast<std::size_t>(2 * P)) throw LayoutMismatch("apply_stencil: size");
    y.assign(2 * P, cd(0, 0));
    const double e = bg.params.e;
    const int m = bg.m_xy;
    auto at_idx = [&](int i, int j) -> int32_t {
        if (i < 0 || i >= m || j < 0 || j >= m) return -1;
        return grid->index[static_cast<std::size_t>(i) * m + j];
    };

#pragma omp parallel for schedule(static) if (parallel)
    for (int p = 0; p < P; ++p) {
        auto [i, j] = grid->points[p];
        std::size_t k = bg.at(i, j);
        cd d0(0, 0), d1(0, 0);
        for (int s = 0; s < st.n_off; ++s) {
            int o = st.off[s];
            int32_t qx = at_idx(i + o, j);
            int32_t qy = at_idx(i, j + o);
            if (qx >= 0) {
                d0 += st.w[s] * x[2 * qx];
                d1 += st.w[s] * x[2 * qx + 1];
            }
            if (qy >= 0) {
                d0 += cd(0, st.w[s]) * x[2 * qy];
                d1 += cd(0, -st.w[s]) * x[2 * qy + 1];
            }
        }
        y[2 * p] = d0 + cd(0.0, -e) * cd(bg.a1[k], bg.a2[k]) * x[2 * p] -
                   (SQRT2 * e) * bg.phi[k] * x[2 * p + 1];
        y[2 * p + 1] = d1 - (SQRT2 * e) * std::conj(bg.phi[k]) * x[2 * p];
    }
}

} // namespace

void apply_stencil(const Background2D& bg, int scheme, const std::vector<cd>& x,
                   std::vector<cd>& y) {
    apply_impl(bg, scheme, x, y, true);
}
void apply_stencil_serial(const Background2D& bg, int scheme, const std::vector<cd>& x,
                          std::vector<cd>& y) {
    apply_impl(bg, scheme, x, y, false);
}

} // namespace lgv
