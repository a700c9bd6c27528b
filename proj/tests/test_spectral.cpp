#include <doctest.h>

#include "lgv/assemble.hpp"
#include "lgv/background.hpp"
#include "lgv/spectral.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace lgv;

namespace {

Background2D make_bg(int n, int m_xy, double r_max = 12.0) {
    VortexParams p{n, 1.0, 1.0, r_max, 1025};
    return sample_background(solve_profile(p, ProfileMethod::shooting), m_xy);
}

} // namespace

TEST_CASE("n=1 kernel: two values below threshold, clean gap, doublers excluded") {
    Background2D bg = make_bg(1, 128);
    SparseOperator D = assemble_D(bg, 4);
    SpectralReport r = smallest_singulars(D, 6, 1e-3, 0, OperatorTag::D);
    CHECK(r.kernel_count == 2);
    CHECK(r.resolved);
    CHECK(r.gap_ratio > 10.0);
    REQUIRE(r.sigma.size() >= 3);
    CHECK(r.sigma[0] < 1e-3);
    CHECK(r.sigma[1] < 1e-3);
    CHECK(r.sigma[2] > 0.5);
    // the checkerboard doubler branch contributes one excluded complex pair
    CHECK(r.excluded.size() == 2);
    for (const auto& a : r.excluded) CHECK(a.kind == "doubler");
    CHECK(r.max_residual <= 1e-8);

    // kernel vectors orthonormal in the discrete L2 inner product (real part)
    const double h = D.layout->h;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j <= i; ++j) {
            cd g(0, 0);
            for (std::size_t t = 0; t < r.vectors[i].values.size(); ++t)
                g += std::conj(r.vectors[i].values[t]) * r.vectors[j].values[t];
            double want = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(g.real() * h * h - want) < 1e-9);
        }
    }
}

TEST_CASE("adjoint branch: empty kernel with sigma_min >= 0.1") {
    Background2D bg = make_bg(1, 128);
    SparseOperator Dt = assemble_D_adjoint(bg, 4);
    SpectralReport r = smallest_singulars(Dt, 6, 1e-3, 0, OperatorTag::D_adjoint);
    CHECK(r.kernel_count == 0);
    CHECK(r.resolved);
    REQUIRE(!r.sigma.empty());
    CHECK(r.sigma[0] >= 0.1);
    // everything tiny on this branch is a lattice artifact
    CHECK(r.excluded.size() == 4);
}

TEST_CASE("vacuum and zero-field backgrounds have no zero modes") {
    Background2D vac = make_bg(0, 96);
    SparseOperator D = assemble_D(vac, 4);
    SpectralReport r = smallest_singulars(D, 4, 1e-3, 0);
    CHECK(r.kernel_count == 0);
    CHECK(r.resolved);
    CHECK(r.sigma[0] > 1.0); // vacuum gap = sqrt(2) e v

    // phi = 0, A = 0: decoupled Cauchy-Riemann pairs on the Dirichlet disk
    Background2D zf = vac;
    for (auto& z : zf.phi) z = cd(0, 0);
    SparseOperator Dz = assemble_D(zf, 4);
    SpectralReport rz = smallest_singulars(Dz, 4, 1e-3, 0);
    CHECK(rz.kernel_count == 0);
}

TEST_CASE("kernel counts are stable across grids and radii") {
    struct Case { int n, m_xy; double r_max; };
    for (auto c : {Case{1, 96, 12.0}, Case{1, 128, 12.0}, Case{1, 96, 10.0},
                   Case{2, 128, 12.0}}) {
        Background2D bg = make_bg(c.n, c.m_xy, c.r_max);
        SparseOperator D = assemble_D(bg, 4);
        SpectralReport r = smallest_singulars(D, 2 * c.n + 4, 1e-3, 0);
        CHECK(r.kernel_count == 2 * c.n);
        CHECK(r.resolved);
    }
}

TEST_CASE("spectral pairing: nonzero spectra of the two branches agree") {
    Background2D bg = make_bg(1, 96);
    SparseOperator D = assemble_D(bg, 4);
    SparseOperator Dt = assemble_D_adjoint(bg, 4);
    SpectralReport rm = smallest_singulars(D, 8, 1e-3, 0);
    SpectralReport rp = smallest_singulars(Dt, 8, 1e-3, 0, OperatorTag::D_adjoint);
    // rm.sigma: kernel values first; the nonzero tail must match rp.sigma
    REQUIRE(rm.sigma.size() >= 6);
    REQUIRE(rp.sigma.size() >= 4);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(rm.sigma[2 + i] - rp.sigma[i]) < 1e-8 * std::max(1.0, rp.sigma[i]));
}

TEST_CASE("deterministic reports across reruns and thread counts") {
    Background2D bg = make_bg(1, 96);
    SparseOperator D = assemble_D(bg, 4);
    std::string a = spectral_report_json(smallest_singulars(D, 6, 1e-3, 42));
#ifdef _OPENMP
    int save = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    std::string b = spectral_report_json(smallest_singulars(D, 6, 1e-3, 42));
#ifdef _OPENMP
    omp_set_num_threads(save);
#endif
    CHECK(a == b);
}

TEST_CASE("index report: |Delta| = 2n, Witten equals Fredholm") {
    Background2D bg = make_bg(1, 128);
    IndexReport idx = compute_index(bg, 6, 1e-3, 0);
    CHECK(idx.resolved);
    CHECK(idx.n_minus == 2);
    CHECK(idx.n_plus == 0);
    CHECK(idx.witten_index == idx.fredholm_index);
    CHECK(std::abs(idx.witten_index) == 2);

    Background2D vac = make_bg(0, 96);
    IndexReport iv = compute_index(vac, 4, 1e-3, 0);
    CHECK(iv.witten_index == 0);
    CHECK(iv.resolved);
}
