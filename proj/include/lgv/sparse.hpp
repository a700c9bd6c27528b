#pragma once

#include "lgv/types.hpp"

#include <array>
#include <memory>

namespace lgv {

// In-domain points of the disk r < r_max on the uniform m_xy x m_xy grid.
// Matrix index of (point p, component c in {0,1}) is 2p + c.
struct DiskGrid {
    int m_xy = 0;
    double h = 0.0;
    double r_max = 0.0;
    std::vector<int32_t> index;               // m_xy^2, -1 outside
    std::vector<std::array<int, 2>> points;   // (i, j) of in-domain points
    std::vector<double> radius;               // per point

    static std::shared_ptr<const DiskGrid> make(int m_xy, double r_max);
    int npoints() const { return static_cast<int>(points.size()); }
    int dim() const { return 2 * npoints(); }
};

struct CooEntry {
    int32_t row, col;
    cd val;
    bool operator==(const CooEntry&) const = default;
};

// Complex sparse operator in canonical (row, col)-sorted coordinate form.
struct SparseOperator {
    int64_t rows = 0, cols = 0;
    std::vector<CooEntry> entries;
    double h = 0.0;
    int scheme = 4;                    // 2 or 4 (central difference order)
    std::string bc = "dirichlet-disk";
    double scale = 1.0;                // e*v of the background
    std::shared_ptr<const DiskGrid> layout;

    bool same_entries(const SparseOperator& o) const {
        return rows == o.rows && cols == o.cols && entries == o.entries;
    }
};

SparseOperator conjugate_transpose(const SparseOperator& op);

// CSR forms used by the apply kernels.
struct ComplexCsr {
    int64_t rows = 0, cols = 0;
    std::vector<int64_t> ptr;
    std::vector<int32_t> col;
    std::vector<cd> val;
};
ComplexCsr to_csr(const SparseOperator& op);

struct RealCsr {
    int64_t rows = 0, cols = 0;
    std::vector<int64_t> ptr;
    std::vector<int32_t> col;
    std::vector<double> val;
};

// y = A x. The OpenMP version partitions rows; each row is accumulated
// sequentially, so the result is bitwise identical to the serial reference
// for any thread count.
void spmv(const RealCsr& A, const double* x, double* y);
void spmv_serial(const RealCsr& A, const double* x, double* y);
void spmv(const ComplexCsr& A, const cd* x, cd* y);
void spmv_serial(const ComplexCsr& A, const cd* x, cd* y);

void export_operator(const SparseOperator& op, const std::string& path);
SparseOperator import_operator(const std::string& path);

} // namespace lgv
