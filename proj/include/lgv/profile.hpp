#pragma once

#include "lgv/types.hpp"

namespace lgv {

// Solve the radial self-dual equations
//   f' = (n/r)(1 - a) f,   a' = (e^2 v^2 r / n)(1 - f^2)
// with f(0) = 0, a(0) = 0, f,a -> 1. Internally works in s = e*v*r.
//
// shooting:   adaptive embedded RK4(5), bisection on the core coefficient c
//             (f ~ c s^n), then two-sided Newton matching against the
//             Bessel-K tail. relaxation: damped Newton on the second-order
//             finite-difference discretization of the critical-coupling
//             field equations, Richardson-extrapolated h -> h/2.
// Both are kept as mutual oracles.
RadialProfile solve_profile(const VortexParams& params, ProfileMethod method);

// Evaluates (f, a) off the profile grid: cubic (Catmull-Rom) in r with the
// series fallback f ~ c r^n, a ~ d r^2 near the origin, and (1, 1) beyond
// r_max. Values are clamped to [0, 1].
class ProfileInterpolant {
  public:
    explicit ProfileInterpolant(const RadialProfile& p);
    void eval(double r, double& f, double& a) const;
    double f_at(double r) const;
    double a_at(double r) const;
    // df/dr from the ODE right-hand side (exact on the solution).
    double fprime_at(double r) const;
    double core_c() const { return c_; }
    double core_d() const { return d_; }

  private:
    const RadialProfile* p_;
    double dr_;
    double c_;        // f ~ c r^n
    double d_;        // a ~ d r^2, d = (e v)^2 / (2n)
    double r_series_; // below this, use the series
};

void export_profile_csv(const RadialProfile& p, const std::string& path);

} // namespace lgv
