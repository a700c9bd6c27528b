#pragma once

#include "lgv/sparse.hpp"
#include "lgv/types.hpp"

namespace lgv {

// Discretization of the first-order zero-mode operator
//   D = [ D1 + i D2      -sqrt2 e phi ]
//       [ -sqrt2 e phi*   d1 - i d2   ]
// with D_mu = d_mu - i e A_mu, on the disk with Dirichlet exterior.
// Central differences of order 2 (scheme=2) or 4 (scheme=4); the gauge
// potential enters pointwise. Rows/cols are indexed 2p + c for in-domain
// point p and component c (0: psi_down-slot, 1: chi_up-slot).
SparseOperator assemble_D(const Background2D& bg, int scheme);

// Exactly the conjugate transpose of assemble_D (entrywise).
SparseOperator assemble_D_adjoint(const Background2D& bg, int scheme);

// Discretization of the bosonic fluctuation system
//   (D1 + i D2) dphi - i e phi (dA1 + i dA2) = 0
//   (d1 - i d2)(dA1 + i dA2) + 2 i e phi* dphi = 0
// in the variables (dphi, (i/sqrt2)(dA1 + i dA2)). The coefficient matrix it
// produces is identical, entry for entry, to assemble_D on the same
// background; the equality is asserted by tests, not assumed here.
SparseOperator assemble_D_boson(const Background2D& bg, int scheme);

// Matrix-free application of the same stencil; independent of the COO path
// and used as its oracle. The OpenMP variant is bitwise equal to the serial
// one.
void apply_stencil(const Background2D& bg, int scheme, const std::vector<cd>& x,
                   std::vector<cd>& y);
void apply_stencil_serial(const Background2D& bg, int scheme, const std::vector<cd>& x,
                          std::vector<cd>& y);

} // namespace lgv
