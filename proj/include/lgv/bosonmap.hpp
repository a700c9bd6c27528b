#pragma once

#include "lgv/background.hpp"
#include "lgv/sparse.hpp"
#include "lgv/types.hpp"

#include <memory>
#include <optional>

namespace lgv {

// Bosonic fluctuation fields on the disk layout. The fermionic pair
// (psi_down, chi_up) maps to (dphi, dA) through
//   psi_down = dphi,   chi_up = (i/sqrt2)(dA1 + i dA2),
// an R-linear bijection of components.
struct FluctuationPair {
    std::vector<cd> delta_phi;
    std::vector<double> delta_A1, delta_A2;
    std::shared_ptr<const DiskGrid> layout;
    std::optional<StateVector> source_mode; // originating fermionic vector, if any

    double norm_l2() const;
};

FluctuationPair fermion_to_boson(const StateVector& mode,
                                 std::shared_ptr<const DiskGrid> layout);

// Inverse map. When the pair retains its source mode the original vector is
// returned bit for bit; otherwise the components are rebuilt algebraically
// (exact up to one rounding in the sqrt2 scaling).
StateVector boson_to_fermion(const FluctuationPair& pair);

// Max of the two discretized fluctuation-equation residual norms,
//   (D1 + i D2) dphi - i e phi (dA1 + i dA2)
//   (d1 - i d2)(dA1 + i dA2) + 2 i e phi* dphi,
// evaluated with the same central scheme as the operator assembly.
double bosonic_residual(const FluctuationPair& pair, const Background2D& bg, int scheme);

// Principal-angle overlap (cosine of the largest principal angle) between
// the numerical n=1 kernel span and the translation-mode span
//   psi = v f'(r) e^{i(n-1)theta},  chi = -e v^2 (1 - f^2)/sqrt2
// built from the solved profile. Expects a kernel of real dimension 2.
double translation_mode_overlap(const Background2D& bg, const RadialProfile& profile,
                                const std::vector<StateVector>& kernel_basis);

void export_fluctuation_csv(const FluctuationPair& pair, const std::string& path);

} // namespace lgv
