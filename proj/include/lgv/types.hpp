#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgv {

using cd = std::complex<double>;

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode has a named type so callers (and the
// CLI exit-code mapping) can tell validation errors from numerical ones.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct InterpolationError : Error { using Error::Error; };
struct StencilOverflow : Error { using Error::Error; };
struct LayoutMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ChannelNonConvergence : Error { using Error::Error; };
struct SectorMismatch : Error { using Error::Error; };
struct UnknownSector : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct WrongKernelDimension : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> v)
        : Error(join(v)), violations(std::move(v)) {}
    std::vector<std::string> violations;
  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "validation failed:";
        for (const auto& x : v) { s += "\n  - "; s += x; }
        return s;
    }
};
struct StageFailure : Error {
    StageFailure(std::string stage_, const std::string& what_, bool numerical_ = false)
        : Error("stage '" + stage_ + "': " + what_), stage(std::move(stage_)),
          numerical(numerical_) {}
    std::string stage;
    bool numerical; // true when caused by solver non-convergence
};
struct MissingStage : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Vortex parameters. Internally everything is solved in the dimensionless
// radial variable s = e*v*r; raw (e, v) are accepted here and converted on
// entry.
// ---------------------------------------------------------------------------
struct VortexParams {
    int n = 1;            // vorticity (n = 0 selects the vacuum)
    double e = 1.0;       // gauge coupling
    double v = 1.0;       // symmetry-breaking scale
    double r_max = 12.0;  // disk radius
    int m_r = 2048;       // radial grid points

    double scale() const { return e * v; }

    // Throws InvalidParams listing every violation.
    void validate() const;
    // r_max*e*v < 8 leaves too little room for the exponential tail.
    bool tail_warning() const { return r_max * e * v < 8.0; }
};

enum class ProfileMethod { shooting, relaxation };

// Radial self-dual profile: phi = v f(r) e^{i n theta}, e A_theta = n a(r)/r.
struct RadialProfile {
    VortexParams params;
    std::vector<double> r;         // r[0] = 0, r.back() = r_max, uniform
    std::vector<double> f;         // Higgs profile, 0 -> 1
    std::vector<double> a;         // gauge profile, 0 -> 1
    std::vector<double> residual;  // pointwise ODE residual (dimensionless)
    double residual_norm = 0.0;    // max of residual
    double core_coefficient = 0.0; // c in f ~ c (evr)^n near the origin
    ProfileMethod method = ProfileMethod::shooting;
};

// 2D sampled background on the square [-r_max, r_max]^2; the physical domain
// is the open disk r < r_max (mask). A^0 = N = 0 throughout.
struct Background2D {
    VortexParams params;
    int m_xy = 0;
    double h = 0.0;                // grid spacing
    std::vector<cd> phi;           // row-major, index i*m_xy + j, x = x(i), y = y(j)
    std::vector<double> a1, a2;    // gauge potential A_1, A_2
    std::vector<uint8_t> mask;     // 1 = inside the disk

    double x(int i) const { return -params.r_max + h * i; }
    double y(int j) const { return -params.r_max + h * j; }
    std::size_t at(int i, int j) const {
        return static_cast<std::size_t>(i) * m_xy + j;
    }
};

enum class Sector { fermion_lower, fermion_upper, boson };

// Complex vector tied to an operator layout: values[2p + c] is component c
// of grid point p.
struct StateVector {
    std::vector<cd> values;
    Sector sector = Sector::fermion_lower;
    double h = 0.0;  // grid spacing of the underlying layout

    double norm_l2() const;  // sqrt(h^2 sum |values|^2)
};

} // namespace lgv
