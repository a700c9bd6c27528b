#include <doctest.h>

#include "lgv/rng.hpp"
#include "lgv/sparse.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace lgv;

namespace {

SparseOperator random_op(int dim, int nnz_per_row, uint64_t seed) {
    SplitMix64 rng(seed);
    SparseOperator op;
    op.rows = op.cols = dim;
    op.h = 0.1;
    op.scheme = 2;
    for (int r = 0; r < dim; ++r) {
        for (int k = 0; k < nnz_per_row; ++k) {
            int c = static_cast<int>(rng.next_u64() % dim);
            op.entries.push_back({r, c, cd(rng.next_sym(), rng.next_sym())});
        }
    }
    std::sort(op.entries.begin(), op.entries.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    // drop duplicate coordinates to keep the canonical form
    op.entries.erase(std::unique(op.entries.begin(), op.entries.end(),
                                 [](const CooEntry& a, const CooEntry& b) {
                                     return a.row == b.row && a.col == b.col;
                                 }),
                     op.entries.end());
    return op;
}

} // namespace

TEST_CASE("conjugate transpose is an involution and flips <Du,w> to <u,Ddag w>") {
    SparseOperator op = random_op(64, 4, 7);
    SparseOperator opT = conjugate_transpose(op);
    SparseOperator opTT = conjugate_transpose(opT);
    CHECK(op.same_entries(opTT));

    ComplexCsr A = to_csr(op), At = to_csr(opT);
    SplitMix64 rng(11);
    for (int t = 0; t < 20; ++t) {
        std::vector<cd> u(64), w(64), Du(64), Dtw(64);
        for (auto& z : u) z = cd(rng.next_sym(), rng.next_sym());
        for (auto& z : w) z = cd(rng.next_sym(), rng.next_sym());
        spmv(A, u.data(), Du.data());
        spmv(At, w.data(), Dtw.data());
        cd a(0, 0), b(0, 0);
        for (int i = 0; i < 64; ++i) {
            a += std::conj(Du[i]) * w[i];
            b += std::conj(u[i]) * Dtw[i];
        }
        CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("OpenMP spmv is bitwise equal to the serial reference") {
    SparseOperator op = random_op(513, 7, 3);
    ComplexCsr A = to_csr(op);
    SplitMix64 rng(5);
    std::vector<cd> x(513), y1(513), y2(513);
    for (auto& z : x) z = cd(rng.next_sym(), rng.next_sym());
    spmv(A, x.data(), y1.data());
    spmv_serial(A, x.data(), y2.data());
    bool same = true;
    for (int i = 0; i < 513; ++i) same = same && y1[i] == y2[i];
    CHECK(same);

    RealCsr R;
    R.rows = R.cols = 513;
    R.ptr = A.ptr;
    R.col = A.col;
    R.val.resize(A.val.size());
    for (std::size_t i = 0; i < A.val.size(); ++i) R.val[i] = A.val[i].real();
    std::vector<double> xr(513), yr1(513), yr2(513);
    SplitMix64 rng2(6);
    for (auto& v : xr) v = rng2.next_sym();
    spmv(R, xr.data(), yr1.data());
    spmv_serial(R, xr.data(), yr2.data());
    same = true;
    for (int i = 0; i < 513; ++i) same = same && yr1[i] == yr2[i];
    CHECK(same);
}

TEST_CASE("operator export/import round trip") {
    SparseOperator op = random_op(32, 3, 13);
    std::string path = (std::filesystem::temp_directory_path() / "lgv_op_test.coo").string();
    export_operator(op, path);
    SparseOperator back = import_operator(path);
    CHECK(back.rows == op.rows);
    CHECK(back.cols == op.cols);
    REQUIRE(back.entries.size() == op.entries.size());
    bool same = true;
    for (std::size_t i = 0; i < op.entries.size(); ++i)
        same = same && back.entries[i] == op.entries[i];
    CHECK(same);
    std::filesystem::remove(path);
}
