#pragma once

#include "lgv/sparse.hpp"
#include "lgv/types.hpp"

#include <string>

namespace lgv {

enum class OperatorTag { D, D_adjoint, D_boson };

// One excluded direction of the near-zero cluster, with the reason.
struct ArtifactMode {
    double sigma = 0.0;
    double roughness = 0.0;      // Rayleigh quotient of the lattice Laplacian
    double boundary_mass = 0.0;  // weight within 3/(e v) of the disk edge
    std::string kind;            // "doubler" or "boundary"
};

// Smallest singular values of the operator, kernel count and gap.
//
// Counting convention: the operator is handled in its real (split-complex)
// representation, so every singular value of the complex matrix appears
// twice and kernel dimensions are real dimensions; this matches the 2n
// zero-mode count of the continuum operator. Central differences carry
// spurious checkerboard ("doubler") branches which produce near-zero
// directions of their own; directions of the below-threshold cluster whose
// lattice-Laplacian Rayleigh quotient exceeds 2/h^2, or which concentrate on
// the disk edge, are excluded from the kernel and reported in `excluded`.
struct SpectralReport {
    OperatorTag operator_tag = OperatorTag::D;
    std::vector<double> sigma;          // ascending, retained (physical) values
    std::vector<StateVector> vectors;   // matching right-singular vectors
    int kernel_count = 0;               // retained sigma below tol_zero
    double gap_ratio = 0.0;
    double tol_zero = 0.0;
    std::vector<ArtifactMode> excluded;
    // solver metadata
    int iterations = 0;
    double max_residual = 0.0;          // max ||(D^dag D) x - sigma^2 x|| over reported
    uint64_t seed = 0;
    bool resolved = false;
};

struct IndexReport {
    int n_minus = 0;        // dim ker D^dag D   (real dimension)
    int n_plus = 0;         // dim ker D D^dag
    int witten_index = 0;   // n_minus - n_plus
    int fredholm_index = 0; // dim ker D - dim ker D^dag
    int vorticity = 0;
    bool resolved = false;
    // The continuum relations fix |index| = 2n; the sign reported here
    // follows Delta = n_- - n_+ with H_- = D^dag D. The source text also
    // quotes Delta = -2n from the same counting; the magnitude is the
    // invariant statement and the signed value is kept for reproducibility.
    std::string sign_note;
};

SpectralReport smallest_singulars(const SparseOperator& op, int k, double tol_zero,
                                  uint64_t seed, OperatorTag tag = OperatorTag::D);

// Both normal-equation branches of one operator from a single shifted
// factorization of D^dag D + tau: the plus branch is applied through
// (D D^dag + tau)^-1 = (1 - D (D^dag D + tau)^-1 D^dag)/tau.
struct TwinReports {
    SpectralReport minus; // right-singular side, ker D^dag D
    SpectralReport plus;  // left-singular side,  ker D D^dag
};
TwinReports solve_both_branches(const SparseOperator& D, int k, double tol_zero, uint64_t seed,
                                OperatorTag minus_tag = OperatorTag::D);

// Index bookkeeping from the two normal-equation branches
// (minus: D^dag D, plus: D D^dag).
IndexReport make_index(const SpectralReport& minus_branch, const SpectralReport& plus_branch,
                       int vorticity);

IndexReport compute_index(const Background2D& bg, int k, double tol_zero, uint64_t seed,
                          int scheme = 4);

std::string spectral_report_json(const SpectralReport& r);
std::string index_report_json(const IndexReport& r);

// Singular-vector CSV: x,y,re_c0,im_c0,re_c1,im_c1 over in-domain points.
void export_mode_csv(const SpectralReport& r, const DiskGrid& grid, int mode,
                     const std::string& path);

} // namespace lgv
