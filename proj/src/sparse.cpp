#include "lgv/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lgv {

std::shared_ptr<const DiskGrid> DiskGrid::make(int m_xy, double r_max) {
    auto g = std::make_shared<DiskGrid>();
    g->m_xy = m_xy;
    g->r_max = r_max;
    g->h = 2.0 * r_max / (m_xy - 1);
    g->index.assign(static_cast<std::size_t>(m_xy) * m_xy, -1);
    for (int i = 0; i < m_xy; ++i) {
        double x = -r_max + g->h * i;
        for (int j = 0; j < m_xy; ++j) {
            double y = -r_max + g->h * j;
            double r = std::hypot(x, y);
            if (r < r_max) {
                g->index[static_cast<std::size_t>(i) * m_xy + j] =
                    static_cast<int32_t>(g->points.size());
                g->points.push_back({i, j});
                g->radius.push_back(r);
            }
        }
    }
    return g;
}

SparseOperator conjugate_transpose(const SparseOperator& op) {
    SparseOperator out = op;
    out.rows = op.cols;
    out.cols = op.rows;
    for (auto& e : out.entries) {
        std::swap(e.row, e.col);
        e.val = std::conj(e.val);
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return out;
}

ComplexCsr to_csr(const SparseOperator& op) {
    ComplexCsr A;
    A.rows = op.rows;
    A.cols = op.cols;
    A.ptr.assign(op.rows + 1, 0);
    for (const auto& e : op.entries) A.ptr[e.row + 1]++;
    for (int64_t r = 0; r < op.rows; ++r) A.ptr[r + 1] += A.ptr[r];
    A.col.resize(op.entries.size());
    A.val.resize(op.entries.size());
    // entries are already row-sorted
    for (std::size_t k = 0; k < op.entries.size(); ++k) {
        A.col[k] = op.entries[k].col;
        A.val[k] = op.entries[k].val;
    }
    return A;
}

void spmv_serial(const RealCsr& A, const double* x, double* y) {
    for (int64_t r = 0; r < A.rows; ++r) {
        double acc = 0.0;
        for (int64_t k = A.ptr[r]; k < A.ptr[r + 1]; ++k) acc += A.val[k] * x[A.col[k]];
        y[r] = acc;
    }
}

void spmv(const RealCsr& A, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < A.rows; ++r) {
        double acc = 0.0;
        for (int64_t k = A.ptr[r]; k < A.ptr[r + 1]; ++k) acc += A.val[k] * x[A.col[k]];
        y[r] = acc;
    }
}

void spmv_serial(const ComplexCsr& A, const cd* x, cd* y) {
    for (int64_t r = 0; r < A.rows; ++r) {
        cd acc = 0.0;
        for (int64_t k = A.ptr[r]; k < A.ptr[r + 1]; ++k) acc += A.val[k] * x[A.col[k]];
        y[r] = acc;
    }
}

void spmv(const ComplexCsr& A, const cd* x, cd* y) {
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < A.rows; ++r) {
        cd acc = 0.0;
        for (int64_t k = A.ptr[r]; k < A.ptr[r + 1]; ++k) acc += A.val[k] * x[A.col[k]];
        y[r] = acc;
    }
}

void export_operator(const SparseOperator& op, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw IOError("cannot open " + path);
    std::fprintf(fp, "# %lld %lld %zu %.17g central%d\n", static_cast<long long>(op.rows),
                 static_cast<long long>(op.cols), op.entries.size(), op.h, op.scheme);
    for (const auto& e : op.entries)
        std::fprintf(fp, "%d %d %.17g %.17g\n", e.row, e.col, e.val.real(), e.val.imag());
    std::fclose(fp);
}

SparseOperator import_operator(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "r");
    if (!fp) throw IOError("cannot open " + path);
    SparseOperator op;
    long long r = 0, c = 0;
    std::size_t nnz = 0;
    char scheme[32] = {0};
    if (std::fscanf(fp, "# %lld %lld %zu %lg %31s\n", &r, &c, &nnz, &op.h, scheme) != 5) {
        std::fclose(fp);
        throw ParseError("bad operator header in " + path);
    }
    op.rows = r;
    op.cols = c;
    op.scheme = std::strcmp(scheme, "central4") == 0 ? 4 : 2;
    op.entries.reserve(nnz);
    CooEntry e;
    double re, im;
    while (std::fscanf(fp, "%d %d %lg %lg", &e.row, &e.col, &re, &im) == 4) {
        e.val = cd(re, im);
        op.entries.push_back(e);
    }
    std::fclose(fp);
    if (op.entries.size() != nnz) throw ParseError("operator nnz mismatch in " + path);
    return op;
}

} // namespace lgv
