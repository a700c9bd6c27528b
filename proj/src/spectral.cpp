#include "lgv/spectral.hpp"
#include "lgv/assemble.hpp"
#include "lgv/log.hpp"
#include "lgv/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace lgv {

namespace {

using SpMatC = Eigen::SparseMatrix<cd>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

SpMatC to_eigen(const SparseOperator& op) {
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(op.entries.size());
    for (const auto& e : op.entries) trip.emplace_back(e.row, e.col, e.val);
    SpMatC M(op.rows, op.cols);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

ComplexCsr csr_of(const SpMatC& A) {
    Eigen::SparseMatrix<cd, Eigen::RowMajor> R = A;
    ComplexCsr out;
    out.rows = R.rows();
    out.cols = R.cols();
    out.ptr.assign(R.outerIndexPtr(), R.outerIndexPtr() + R.rows() + 1);
    out.col.assign(R.innerIndexPtr(), R.innerIndexPtr() + R.nonZeros());
    out.val.assign(R.valuePtr(), R.valuePtr() + R.nonZeros());
    return out;
}

// Deterministic parallel GEMM kernels: every output element is accumulated
// sequentially by a single thread, so results are independent of the
// schedule and bitwise equal to the serial loops.

// C = A^dag B (A: M x ka, B: M x kb)
void gemm_adjoint(const MatC& A, const MatC& B, MatC& C) {
    const int64_t M = A.rows();
    const int ka = static_cast<int>(A.cols()), kb = static_cast<int>(B.cols());
    C.resize(ka, kb);
#pragma omp parallel for collapse(2) schedule(static)
    for (int j = 0; j < ka; ++j)
        for (int c = 0; c < kb; ++c) {
            const cd* a = A.col(j).data();
            const cd* b = B.col(c).data();
            cd acc(0, 0);
            for (int64_t r = 0; r < M; ++r) acc += std::conj(a[r]) * b[r];
            C(j, c) = acc;
        }
}

// B -= A C (A: M x ka, C: ka x kb, B: M x kb)
void gemm_sub(const MatC& A, const MatC& C, MatC& B) {
    const int64_t M = A.rows();
    const int ka = static_cast<int>(A.cols()), kb = static_cast<int>(B.cols());
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < M; ++r)
        for (int c = 0; c < kb; ++c) {
            cd acc(0, 0);
            for (int j = 0; j < ka; ++j) acc += A(r, j) * C(j, c);
            B(r, c) -= acc;
        }
}

// X = A C (tall A, small C)
void gemm_mul(const MatC& A, const MatC& C, MatC& X) {
    const int64_t M = A.rows();
    const int ka = static_cast<int>(A.cols()), kb = static_cast<int>(C.cols());
    X.resize(M, kb);
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < M; ++r)
        for (int c = 0; c < kb; ++c) {
            cd acc(0, 0);
            for (int j = 0; j < ka; ++j) acc += A(r, j) * C(j, c);
            X(r, c) = acc;
        }
}

// per-component lattice Laplacian on the disk (Dirichlet): the roughness
// quadratic form separating smooth modes (O((ev)^2)) from checkerboard
// doubler branches (O(4/h^2) and up).
RealCsr roughness_form(const DiskGrid& g) {
    RealCsr L;
    L.rows = L.cols = g.dim();
    const double w = 1.0 / (g.h * g.h);
    const int m = g.m_xy;
    auto idx = [&](int i, int j) -> int32_t {
        if (i < 0 || i >= m || j < 0 || j >= m) return -1;
        return g.index[static_cast<std::size_t>(i) * m + j];
    };
    L.ptr.assign(L.rows + 1, 0);
    std::vector<std::pair<int32_t, double>> row;
    for (int p = 0; p < g.npoints(); ++p) {
        auto [i, j] = g.points[p];
        for (int c = 0; c < 2; ++c) {
            row.clear();
            row.push_back({2 * p + c, 4.0 * w});
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (auto& q : nb) {
                int32_t t = idx(q[0], q[1]);
                if (t >= 0) row.push_back({2 * t + c, -w});
            }
            std::sort(row.begin(), row.end());
            for (auto& [cc, vv] : row) {
                L.col.push_back(cc);
                L.val.push_back(vv);
            }
            L.ptr[2 * p + c + 1] = static_cast<int64_t>(L.col.size());
        }
    }
    return L;
}

Sector sector_of(OperatorTag t) {
    switch (t) {
        case OperatorTag::D: return Sector::fermion_lower;
        case OperatorTag::D_adjoint: return Sector::fermion_upper;
        default: return Sector::boson;
    }
}

// canonical phase: largest-|.| component made real positive
void phase_fix(std::vector<cd>& u) {
    std::size_t best = 0;
    double mx = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) > mx) { mx = std::abs(u[i]); best = i; }
    if (mx <= 0.0) return;
    cd ph = std::conj(u[best]) / std::abs(u[best]);
    for (auto& z : u) z *= ph;
}

using BlockOp = std::function<MatC(const MatC&)>;
using VecOp = std::function<VecC(const VecC&)>;

struct RitzSet {
    std::vector<double> theta;
    MatC vectors;
    int iterations = 0;
};

// Block Lanczos (block 2, full reorthogonalization) on the shift-inverted
// operator. Deterministic: seeded start, sequential or schedule-independent
// arithmetic throughout.
RitzSet shift_invert_lanczos(const BlockOp& applyC, const VecOp& applyH, double tau,
                             int64_t M, int n_want, int demand_from, double res_tol,
                             uint64_t seed) {
    const int p = 2;
    const int max_blocks = static_cast<int>(std::min<int64_t>(M / p, 280));
    MatC V(M, p * max_blocks);
    MatC T = MatC::Zero(p * max_blocks, p * max_blocks);

    {
        SplitMix64 rng(seed ^ 0x5eed5eedULL);
        MatC X(M, p);
        for (int c = 0; c < p; ++c)
            for (int64_t r = 0; r < M; ++r) X(r, c) = cd(rng.next_sym(), rng.next_sym());
        Eigen::HouseholderQR<MatC> qr(X);
        V.leftCols(p) = qr.householderQ() * MatC::Identity(M, p);
    }

    RitzSet out;
    for (int nb = 1; nb <= max_blocks; ++nb) {
        const int j0 = (nb - 1) * p;
        MatC W = applyC(V.middleCols(j0, p));
        for (int pass = 0; pass < 2; ++pass) {
            MatC C;
            gemm_adjoint(V.leftCols(nb * p), W, C);
            gemm_sub(V.leftCols(nb * p), C, W);
            if (pass == 0) T.block(0, j0, nb * p, p) += C;
        }
        const bool last = (nb == max_blocks);
        if (nb % 10 == 0 || last) {
            MatC Tm = T.topLeftCorner(nb * p, nb * p);
            Tm = MatC(Tm.selfadjointView<Eigen::Lower>());
            Eigen::SelfAdjointEigenSolver<MatC> es(Tm);
            const int have = nb * p;
            const int takes = std::min(n_want, have);
            MatC X;
            gemm_mul(V.leftCols(have), es.eigenvectors().rightCols(takes), X);
            std::vector<double> theta(takes);
            for (int c = 0; c < takes; ++c) {
                double mu = es.eigenvalues()(have - takes + c);
                theta[c] = 1.0 / mu - tau;
            }
            bool ok = true;
            for (int c = takes - 1; c >= takes - demand_from && c >= 0 && ok; --c) {
                VecC x = X.col(c);
                x.normalize();
                double r = (applyH(x) - theta[c] * x).norm();
                if (r > res_tol) ok = false;
            }
            if (ok || last) {
                out.theta.assign(theta.rbegin(), theta.rend());
                out.vectors.resize(M, takes);
                for (int c = 0; c < takes; ++c) {
                    VecC x = X.col(takes - 1 - c);
                    x.normalize();
                    out.vectors.col(c) = x;
                }
                out.iterations = nb;
                if (!ok) throw NoConvergence("smallest_singulars: Lanczos cap reached");
                return out;
            }
        }
        if (!last) {
            Eigen::HouseholderQR<MatC> qr(W);
            MatC Q = qr.householderQ() * MatC::Identity(M, p);
            MatC R = Q.adjoint() * W;
            V.middleCols(nb * p, p) = Q;
            T.block(nb * p, j0, p, p) = R;
        }
    }
    throw NoConvergence("smallest_singulars: Lanczos failed to converge");
}

SpectralReport run_branch(const BlockOp& applyC, const VecOp& applyH,
                          const std::shared_ptr<const DiskGrid>& layout, double scale,
                          double tau, int k, double tol_zero, uint64_t seed, OperatorTag tag) {
    const auto& grid = *layout;
    const int64_t M = grid.dim();
    const double res_tol = 1e-8 * std::max(1.0, scale * scale);
    const int n_complex = static_cast<int>(std::min<int64_t>((k + 1) / 2 + 8, M));
    const int demand = std::max(2, n_complex - std::min(4, n_complex / 4));

    RitzSet ritz = shift_invert_lanczos(applyC, applyH, tau, M, n_complex, demand, res_tol, seed);
    RealCsr rough = roughness_form(grid);

    struct Dir {
        VecC u;
        double theta = 0, rough = 0, bmass = 0;
        bool keep = true;
    };
    std::vector<Dir> cluster;
    std::vector<int> tiny;
    for (std::size_t c = 0; c < ritz.theta.size(); ++c)
        if (std::sqrt(std::max(ritz.theta[c], 0.0)) < tol_zero) tiny.push_back(int(c));

    if (!tiny.empty()) {
        const int t = static_cast<int>(tiny.size());
        MatC V(M, t);
        for (int c = 0; c < t; ++c) V.col(c) = ritz.vectors.col(tiny[c]);
        // diagonalize the roughness form on the cluster: eigensolver mixing
        // within the near-degenerate cluster must not blur the classification
        MatC Rq(t, t);
        {
            std::vector<double> re(M), im(M), tr(M), ti(M);
            MatC Lv(M, t);
            for (int c = 0; c < t; ++c) {
                for (int64_t i = 0; i < M; ++i) {
                    re[i] = V(i, c).real();
                    im[i] = V(i, c).imag();
                }
                spmv(rough, re.data(), tr.data());
                spmv(rough, im.data(), ti.data());
                for (int64_t i = 0; i < M; ++i) Lv(i, c) = cd(tr[i], ti[i]);
            }
            gemm_adjoint(V, Lv, Rq);
            Rq = 0.5 * (Rq + Rq.adjoint()).eval();
        }
        Eigen::SelfAdjointEigenSolver<MatC> er(Rq);
        MatC W;
        gemm_mul(V, er.eigenvectors(), W);
        const double rough_split = 2.0 / (grid.h * grid.h);
        const double band = grid.r_max - 3.0 / std::max(scale, 1e-12);
        for (int c = 0; c < t; ++c) {
            Dir d;
            d.u = W.col(c);
            d.u.normalize();
            d.rough = er.eigenvalues()(c);
            d.theta = std::real(d.u.dot(applyH(d.u)));
            double bm = 0.0;
            for (int p2 = 0; p2 < grid.npoints(); ++p2)
                if (grid.radius[p2] > band)
                    bm += std::norm(d.u(2 * p2)) + std::norm(d.u(2 * p2 + 1));
            d.bmass = bm;
            d.keep = (d.rough < rough_split) && (d.bmass < 0.5);
            cluster.push_back(std::move(d));
        }
    }

    SpectralReport rep;
    rep.operator_tag = tag;
    rep.tol_zero = tol_zero;
    rep.seed = seed;
    rep.iterations = ritz.iterations;

    std::vector<Dir> kept;
    for (auto& d : cluster) {
        if (d.keep) kept.push_back(std::move(d));
        else {
            ArtifactMode a{std::sqrt(std::max(d.theta, 0.0)), d.rough, d.bmass,
                           d.rough >= 2.0 / (grid.h * grid.h) ? "doubler" : "boundary"};
            rep.excluded.push_back(a);
            rep.excluded.push_back(a); // realified counting: complex -> real pair
        }
    }
    std::sort(kept.begin(), kept.end(),
              [](const Dir& a, const Dir& b) { return a.theta < b.theta; });
    rep.kernel_count = 2 * static_cast<int>(kept.size());

    std::vector<double> sigc;
    std::vector<VecC> vecc;
    for (auto& d : kept) {
        sigc.push_back(std::sqrt(std::max(d.theta, 0.0)));
        vecc.push_back(d.u);
    }
    for (std::size_t c = 0; c < ritz.theta.size(); ++c) {
        double s = std::sqrt(std::max(ritz.theta[c], 0.0));
        if (s >= tol_zero) {
            sigc.push_back(s);
            vecc.push_back(ritz.vectors.col(c));
        }
    }

    double worst = 0.0;
    const int n_report_c = std::min<int>((k + 1) / 2 + static_cast<int>(kept.size()),
                                         static_cast<int>(sigc.size()));
    for (int c = 0; c < n_report_c; ++c)
        worst = std::max(worst, (applyH(vecc[c]) - (sigc[c] * sigc[c]) * vecc[c]).norm());
    rep.max_residual = worst;

    // doubled (real-representation) spectrum
    std::vector<double> sig2;
    for (double s : sigc) {
        sig2.push_back(s);
        sig2.push_back(s);
    }
    std::sort(sig2.begin(), sig2.end());
    const int kc = rep.kernel_count;
    if (kc == 0) {
        rep.gap_ratio = sig2.empty() ? 0.0 : sig2[0] / tol_zero;
        rep.resolved = !sig2.empty() && rep.gap_ratio >= 10.0;
    } else if (kc < static_cast<int>(sig2.size())) {
        double floor_ = std::max(sig2[kc - 1], 1e-14 * std::max(scale, 1e-12));
        rep.gap_ratio = sig2[kc] / floor_;
        rep.resolved = rep.gap_ratio >= 10.0;
    } else {
        rep.gap_ratio = 0.0;
        rep.resolved = false;
    }
    rep.resolved = rep.resolved && (rep.max_residual <= res_tol);

    // kernel pairs complex-canonicalized and emitted as (u, i u); bulk
    // vectors doubled to match the sigma list
    std::vector<std::vector<cd>> kernel_complex;
    for (std::size_t c = 0; c < kept.size(); ++c) {
        std::vector<cd> u(M);
        for (int64_t i = 0; i < M; ++i) u[i] = kept[c].u(i);
        for (const auto& w : kernel_complex) {
            cd ov(0, 0);
            for (int64_t i = 0; i < M; ++i) ov += std::conj(w[i]) * u[i];
            for (int64_t i = 0; i < M; ++i) u[i] -= ov * w[i];
        }
        double nn = 0.0;
        for (auto& z : u) nn += std::norm(z);
        nn = std::sqrt(nn);
        if (nn < 1e-6) continue;
        for (auto& z : u) z /= nn;
        phase_fix(u);
        kernel_complex.push_back(std::move(u));
    }
    const double h = grid.h;
    auto push_vec = [&](std::vector<cd> u) {
        StateVector sv;
        sv.h = h;
        sv.sector = sector_of(tag);
        double nn = 0.0;
        for (auto& z : u) nn += std::norm(z);
        nn = h * std::sqrt(nn);
        for (auto& z : u) z /= nn;
        sv.values = std::move(u);
        rep.vectors.push_back(std::move(sv));
    };
    for (const auto& u : kernel_complex) {
        push_vec(u);
        std::vector<cd> iu(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) iu[i] = cd(0, 1) * u[i];
        push_vec(std::move(iu));
    }
    const int n_out = std::min<int>(k, static_cast<int>(sig2.size()));
    for (int c = static_cast<int>(kept.size());
         static_cast<int>(rep.vectors.size()) < n_out && c < static_cast<int>(vecc.size());
         ++c) {
        std::vector<cd> u(M);
        for (int64_t i = 0; i < M; ++i) u[i] = vecc[c](i);
        phase_fix(u);
        push_vec(u);
        if (static_cast<int>(rep.vectors.size()) < n_out) {
            std::vector<cd> iu(M);
            for (int64_t i = 0; i < M; ++i) iu[i] = cd(0, 1) * u[i];
            push_vec(std::move(iu));
        }
    }
    sig2.resize(n_out);
    rep.sigma = std::move(sig2);
    return rep;
}

struct Factorized {
    SpMatC H;             // D^dag D
    ComplexCsr Hcsr;
    Eigen::SimplicialLDLT<SpMatC> ldlt;
    double tau = 0.0;
};

void factorize_minus(const SpMatC& D, double scale, Factorized& F) {
    F.H = (SpMatC(D.adjoint()) * D).pruned();
    F.tau = std::max(1e-12, 1e-6 * scale * scale);
    SpMatC A = F.H;
    for (int64_t i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += F.tau;
    A.makeCompressed();
    F.ldlt.compute(A);
    if (F.ldlt.info() != Eigen::Success)
        throw NoConvergence("smallest_singulars: shift factorization failed");
    F.Hcsr = csr_of(F.H);
}

VecC csr_apply(const ComplexCsr& A, const VecC& x) {
    VecC y(A.rows);
    spmv(A, x.data(), y.data());
    return y;
}

MatC csr_apply_block(const ComplexCsr& A, const MatC& X) {
    MatC Y(A.rows, X.cols());
    for (int c = 0; c < X.cols(); ++c) spmv(A, X.col(c).data(), Y.col(c).data());
    return Y;
}

} // namespace

SpectralReport smallest_singulars(const SparseOperator& op, int k, double tol_zero,
                                  uint64_t seed, OperatorTag tag) {
    if (op.rows != op.cols) throw DimensionMismatch("smallest_singulars: operator not square");
    if (!op.layout) throw LayoutMismatch("smallest_singulars: operator carries no grid layout");
    if (k < 1) throw InvalidParams("k must be >= 1");

    SpMatC D = to_eigen(op);
    auto F = std::make_shared<Factorized>();
    factorize_minus(D, op.scale, *F);
    BlockOp applyC = [F](const MatC& X) { return MatC(F->ldlt.solve(X)); };
    VecOp applyH = [F](const VecC& x) { return csr_apply(F->Hcsr, x); };
    return run_branch(applyC, applyH, op.layout, op.scale, F->tau, k, tol_zero, seed, tag);
}

TwinReports solve_both_branches(const SparseOperator& Dop, int k, double tol_zero,
                                uint64_t seed, OperatorTag minus_tag) {
    if (Dop.rows != Dop.cols) throw DimensionMismatch("solve_both_branches: not square");
    if (!Dop.layout) throw LayoutMismatch("solve_both_branches: no grid layout");

    SpMatC D = to_eigen(Dop);
    auto F = std::make_shared<Factorized>();
    factorize_minus(D, Dop.scale, *F);
    auto Dcsr = std::make_shared<ComplexCsr>(csr_of(D));
    auto Dtcsr = std::make_shared<ComplexCsr>(csr_of(SpMatC(D.adjoint())));

    TwinReports out;
    {
        BlockOp applyC = [F](const MatC& X) { return MatC(F->ldlt.solve(X)); };
        VecOp applyH = [F](const VecC& x) { return csr_apply(F->Hcsr, x); };
        out.minus = run_branch(applyC, applyH, Dop.layout, Dop.scale, F->tau, k, tol_zero, seed,
                               minus_tag);
    }
    {
        const double tau = F->tau;
        // (D D^dag + tau)^-1 w = (w - D (D^dag D + tau)^-1 D^dag w)/tau
        BlockOp applyC = [F, Dcsr, Dtcsr, tau](const MatC& X) {
            MatC Y = csr_apply_block(*Dtcsr, X);
            MatC Z = F->ldlt.solve(Y);
            MatC W = csr_apply_block(*Dcsr, Z);
            return MatC((X - W) / tau);
        };
        VecOp applyH = [Dcsr, Dtcsr](const VecC& x) {
            return csr_apply(*Dcsr, csr_apply(*Dtcsr, x));
        };
        out.plus = run_branch(applyC, applyH, Dop.layout, Dop.scale, tau, k, tol_zero, seed,
                              OperatorTag::D_adjoint);
    }
    return out;
}

IndexReport make_index(const SpectralReport& minus_branch, const SpectralReport& plus_branch,
                       int vorticity) {
    IndexReport out;
    out.n_minus = minus_branch.kernel_count;
    out.n_plus = plus_branch.kernel_count;
    out.witten_index = out.n_minus - out.n_plus;
    out.fredholm_index = minus_branch.kernel_count - plus_branch.kernel_count;
    out.vorticity = vorticity;
    out.resolved = minus_branch.resolved && plus_branch.resolved;
    out.sign_note =
        "Delta = n_minus - n_plus with H_minus = D^dag D; the source text also derives "
        "Delta = -2n from the same kernel dimensions, so only |Delta| = 2n is asserted.";
    return out;
}

IndexReport compute_index(const Background2D& bg, int k, double tol_zero, uint64_t seed,
                          int scheme) {
    const int n = bg.params.n;
    const int k_use = std::max(k, 2 * n + 6);
    SparseOperator D = assemble_D(bg, scheme);
    TwinReports tw = solve_both_branches(D, k_use, tol_zero, seed);
    return make_index(tw.minus, tw.plus, n);
}

std::string spectral_report_json(const SpectralReport& r) {
    nlohmann::json j;
    j["operator_tag"] = r.operator_tag == OperatorTag::D          ? "D"
                        : r.operator_tag == OperatorTag::D_adjoint ? "D_adjoint"
                                                                   : "D_boson";
    j["sigma"] = r.sigma;
    j["kernel_count"] = r.kernel_count;
    j["gap_ratio"] = r.gap_ratio;
    j["tol_zero"] = r.tol_zero;
    j["resolved"] = r.resolved;
    j["solver_meta"] = {{"iterations", r.iterations},
                        {"max_residual", r.max_residual},
                        {"seed", r.seed}};
    auto& ex = j["excluded_artifacts"] = nlohmann::json::array();
    for (const auto& a : r.excluded)
        ex.push_back({{"sigma", a.sigma},
                      {"roughness", a.roughness},
                      {"boundary_mass", a.boundary_mass},
                      {"kind", a.kind}});
    return j.dump(2);
}

std::string index_report_json(const IndexReport& r) {
    nlohmann::json j;
    j["n_minus"] = r.n_minus;
    j["n_plus"] = r.n_plus;
    j["witten_index"] = r.witten_index;
    j["fredholm_index"] = r.fredholm_index;
    j["vorticity"] = r.vorticity;
    j["resolved"] = r.resolved;
    j["sign_note"] = r.sign_note;
    return j.dump(2);
}

void export_mode_csv(const SpectralReport& r, const DiskGrid& grid, int mode,
                     const std::string& path) {
    if (mode < 0 || mode >= static_cast<int>(r.vectors.size()))
        throw InvalidParams("export_mode_csv: mode out of range");
    const auto& u = r.vectors[mode].values;
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw IOError("cannot open " + path);
    std::fprintf(fp, "x,y,re_c0,im_c0,re_c1,im_c1\n");
    for (int p = 0; p < grid.npoints(); ++p) {
        auto [i, j] = grid.points[p];
        double x = -grid.r_max + grid.h * i, y = -grid.r_max + grid.h * j;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, y, u[2 * p].real(),
                     u[2 * p].imag(), u[2 * p + 1].real(), u[2 * p + 1].imag());
    }
    std::fclose(fp);
}

} // namespace lgv
