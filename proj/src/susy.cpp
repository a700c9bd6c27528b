#include "lgv/susy.hpp"
#include "lgv/rng.hpp"

#include <Eigen/Sparse>
#include <json.hpp>

#include <cmath>

namespace lgv {

SusyBlocks::SusyBlocks(const SparseOperator& D) {
    if (D.rows != D.cols) throw DimensionMismatch("SusyBlocks: D must be square");
    N_ = D.rows;
    D_ = to_csr(D);
    Ddag_ = to_csr(conjugate_transpose(D));
}

std::vector<cd> SusyBlocks::apply_Q(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(2 * N_, cd(0, 0));
    spmv(D_, x.data() + N_, y.data()); // upper <- D lower
    return y;
}

std::vector<cd> SusyBlocks::apply_Qdag(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(2 * N_, cd(0, 0));
    spmv(Ddag_, x.data(), y.data() + N_); // lower <- D^dag upper
    return y;
}

std::vector<cd> SusyBlocks::apply_H(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(2 * N_), t(N_);
    spmv(Ddag_, x.data(), t.data());
    spmv(D_, t.data(), y.data()); // upper <- D D^dag upper
    spmv(D_, x.data() + N_, t.data());
    spmv(Ddag_, t.data(), y.data() + N_); // lower <- D^dag D lower
    return y;
}

std::vector<cd> SusyBlocks::apply_W(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(x);
    for (int64_t i = N_; i < 2 * N_; ++i) y[i] = -y[i];
    return y;
}

std::vector<cd> SusyBlocks::apply_Pplus(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(x);
    for (int64_t i = N_; i < 2 * N_; ++i) y[i] = cd(0, 0);
    return y;
}

std::vector<cd> SusyBlocks::apply_Pminus(const std::vector<cd>& x) const {
    check(x);
    std::vector<cd> y(x);
    for (int64_t i = 0; i < N_; ++i) y[i] = cd(0, 0);
    return y;
}

namespace {

double vnorm(const std::vector<cd>& x) {
    double s = 0.0;
    for (const cd& z : x) s += std::norm(z);
    return std::sqrt(s);
}

std::vector<cd> vsub(const std::vector<cd>& a, const std::vector<cd>& b) {
    std::vector<cd> y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
    return y;
}

std::vector<cd> vadd(const std::vector<cd>& a, const std::vector<cd>& b) {
    std::vector<cd> y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    return y;
}

} // namespace

AlgebraReport verify_algebra(const SusyBlocks& B, int n_vectors, uint64_t seed) {
    AlgebraReport rep;
    rep.n_vectors = n_vectors;
    rep.min_rayleigh = std::numeric_limits<double>::infinity();
    SplitMix64 rng(seed ^ 0xa15eb7a0ULL);
    const int64_t D2 = B.dim();
    for (int t = 0; t < n_vectors; ++t) {
        std::vector<cd> x(D2);
        for (auto& z : x) z = cd(rng.next_sym(), rng.next_sym());

        auto Qx = B.apply_Q(x);
        auto QQx = B.apply_Q(Qx);
        rep.q_squared = std::max(rep.q_squared, vnorm(QQx));

        auto Qdx = B.apply_Qdag(x);
        auto QdQdx = B.apply_Qdag(Qdx);
        rep.qdag_squared = std::max(rep.qdag_squared, vnorm(QdQdx));

        auto Hx = B.apply_H(x);
        auto anti = vadd(B.apply_Qdag(Qx), B.apply_Q(Qdx));
        double hn = vnorm(Hx);
        rep.anticommutator = std::max(rep.anticommutator, vnorm(vsub(anti, Hx)) / hn);

        auto WWx = B.apply_W(B.apply_W(x));
        rep.w_squared = std::max(rep.w_squared, vnorm(vsub(WWx, x)));

        rep.w_q_anticommute =
            std::max(rep.w_q_anticommute, vnorm(vadd(B.apply_W(Qx), B.apply_Q(B.apply_W(x)))));
        rep.w_qdag_anticommute = std::max(
            rep.w_qdag_anticommute, vnorm(vadd(B.apply_W(Qdx), B.apply_Qdag(B.apply_W(x)))));
        rep.w_h_commute = std::max(
            rep.w_h_commute, vnorm(vsub(B.apply_W(Hx), B.apply_H(B.apply_W(x)))));

        cd xhx(0, 0);
        double xx = 0.0;
        for (int64_t i = 0; i < D2; ++i) {
            xhx += std::conj(x[i]) * Hx[i];
            xx += std::norm(x[i]);
        }
        rep.min_rayleigh = std::min(rep.min_rayleigh, xhx.real() / xx);
    }
    return rep;
}

double densified_anticommutator_check(const SparseOperator& Dop) {
    if (Dop.rows > 8192)
        throw InvalidParams("densified check is meant for small grids (dim <= 8192)");
    using SpC = Eigen::SparseMatrix<cd>;
    std::vector<Eigen::Triplet<cd>> tq, tqd, th;
    const int64_t N = Dop.rows;
    for (const auto& e : Dop.entries) {
        tq.emplace_back(e.row, N + e.col, e.val);                       // Q upper-right = D
        tqd.emplace_back(N + e.col, e.row, std::conj(e.val));           // Q^dag lower-left = D^dag
    }
    SpC Q(2 * N, 2 * N), Qd(2 * N, 2 * N);
    Q.setFromTriplets(tq.begin(), tq.end());
    Qd.setFromTriplets(tqd.begin(), tqd.end());
    SpC anti = (SpC(Q * Qd) + SpC(Qd * Q)).pruned();

    // H blocks as explicit products
    SpC De(N, N);
    {
        std::vector<Eigen::Triplet<cd>> td;
        for (const auto& e : Dop.entries) td.emplace_back(e.row, e.col, e.val);
        De.setFromTriplets(td.begin(), td.end());
    }
    SpC upper = (De * SpC(De.adjoint())).pruned();
    SpC lower = (SpC(De.adjoint()) * De).pruned();
    for (int k = 0; k < upper.outerSize(); ++k)
        for (SpC::InnerIterator it(upper, k); it; ++it)
            th.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < lower.outerSize(); ++k)
        for (SpC::InnerIterator it(lower, k); it; ++it)
            th.emplace_back(N + it.row(), N + it.col(), it.value());
    SpC H(2 * N, 2 * N);
    H.setFromTriplets(th.begin(), th.end());

    SpC diff = (anti - H).pruned();
    double mx = 0.0, scale = 0.0;
    for (int k = 0; k < H.outerSize(); ++k)
        for (SpC::InnerIterator it(H, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpC::InnerIterator it(diff, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return scale > 0 ? mx / scale : mx;
}

GradedState grade_state(const StateVector& v) {
    GradedState g;
    g.payload = v;
    const std::size_t N = v.values.size();
    g.assembled.assign(2 * N, cd(0, 0));
    switch (v.sector) {
        case Sector::fermion_upper:
            g.parity = +1;
            std::copy(v.values.begin(), v.values.end(), g.assembled.begin());
            break;
        case Sector::fermion_lower:
        case Sector::boson:
            g.parity = -1;
            std::copy(v.values.begin(), v.values.end(), g.assembled.begin() + N);
            break;
        default:
            throw UnknownSector("grade_state: unknown sector");
    }
    return g;
}

SusyStatus verify_unbroken(const IndexReport& report) {
    if (!report.resolved) return SusyStatus::indeterminate;
    if (report.witten_index != 0) return SusyStatus::unbroken;
    if (report.n_plus == report.n_minus && report.n_plus != 0) return SusyStatus::unbroken;
    return SusyStatus::broken;
}

const char* to_string(SusyStatus s) {
    switch (s) {
        case SusyStatus::unbroken: return "unbroken";
        case SusyStatus::broken: return "broken";
        default: return "indeterminate";
    }
}

std::string algebra_report_json(const AlgebraReport& r, SusyStatus verdict) {
    nlohmann::json j;
    j["relations"] = {{"Q^2", r.q_squared},
                      {"Qdag^2", r.qdag_squared},
                      {"{Q,Qdag}=H", r.anticommutator},
                      {"W^2=1", r.w_squared},
                      {"{W,Q}", r.w_q_anticommute},
                      {"{W,Qdag}", r.w_qdag_anticommute},
                      {"[W,H]", r.w_h_commute}};
    j["min_rayleigh"] = r.min_rayleigh;
    j["n_vectors"] = r.n_vectors;
    j["unbroken"] = to_string(verdict);
    return j.dump(2);
}

} // namespace lgv
