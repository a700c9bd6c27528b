#pragma once

#include "lgv/sparse.hpp"
#include "lgv/spectral.hpp"
#include "lgv/types.hpp"

namespace lgv {

// N=2, d=1 SUSY QM blocks over a first-order operator D:
//   Q = [[0, D],[0,0]],  Q^dag = [[0,0],[D^dag,0]],
//   H = [[D D^dag, 0],[0, D^dag D]],  W = diag(I, -I).
// Stacked vectors hold the parity +1 sector (psi_up, chi_down) in the upper
// half and the parity -1 sector (psi_down, chi_up) in the lower half.
// Blocks are compositions of D and D^dag, never explicit products.
class SusyBlocks {
  public:
    explicit SusyBlocks(const SparseOperator& D);

    int64_t block_dim() const { return N_; }
    int64_t dim() const { return 2 * N_; }

    std::vector<cd> apply_Q(const std::vector<cd>& x) const;
    std::vector<cd> apply_Qdag(const std::vector<cd>& x) const;
    std::vector<cd> apply_H(const std::vector<cd>& x) const;
    std::vector<cd> apply_W(const std::vector<cd>& x) const;
    std::vector<cd> apply_Pplus(const std::vector<cd>& x) const;
    std::vector<cd> apply_Pminus(const std::vector<cd>& x) const;

    const ComplexCsr& D() const { return D_; }
    const ComplexCsr& Ddag() const { return Ddag_; }

  private:
    int64_t N_;
    ComplexCsr D_, Ddag_;
    void check(const std::vector<cd>& x) const {
        if (static_cast<int64_t>(x.size()) != 2 * N_)
            throw DimensionMismatch("SusyBlocks: vector length");
    }
};

struct AlgebraReport {
    double q_squared = 0.0;          // max ||Q^2 x||
    double qdag_squared = 0.0;       // max ||(Q^dag)^2 x||
    double anticommutator = 0.0;     // max ||({Q,Q^dag} - H) x|| / ||H x||
    double w_squared = 0.0;          // max ||(W^2 - 1) x||
    double w_q_anticommute = 0.0;    // max ||(W Q + Q W) x||
    double w_qdag_anticommute = 0.0; // max ||(W Q^dag + Q^dag W) x||
    double w_h_commute = 0.0;        // max ||[W, H] x||
    double min_rayleigh = 0.0;       // min <x, H x>/<x, x>
    int n_vectors = 0;
};

AlgebraReport verify_algebra(const SusyBlocks& blocks, int n_vectors, uint64_t seed);

// Explicitly multiplied small-grid variant: builds the block matrices,
// forms {Q, Q^dag} as a sparse product and compares with H entrywise.
// Returns the max relative deviation. Intended for m_xy <= 48.
double densified_anticommutator_check(const SparseOperator& D);

struct GradedState {
    int parity = 0;               // +1 or -1
    StateVector payload;
    std::vector<cd> assembled;    // (|psi>, 0) or (0, |psi>)
};

// fermion_upper -> parity +1 (upper block); fermion_lower and boson ->
// parity -1 (lower block).
GradedState grade_state(const StateVector& v);

enum class SusyStatus { unbroken, broken, indeterminate };
SusyStatus verify_unbroken(const IndexReport& report);
const char* to_string(SusyStatus s);

std::string algebra_report_json(const AlgebraReport& r, SusyStatus verdict);

} // namespace lgv
