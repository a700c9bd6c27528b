#pragma once

#include "lgv/profile.hpp"
#include "lgv/types.hpp"

namespace lgv {

// Samples the 2D vortex background phi = v f(r) ((x+iy)/r)^n,
// e A_1 = -n a(r) y / r^2, e A_2 = n a(r) x / r^2 on the m_xy grid.
// The parallel version is bitwise identical to the serial reference.
Background2D sample_background(const RadialProfile& profile, int m_xy);
Background2D sample_background_serial(const RadialProfile& profile, int m_xy);

// Plaquette-summed flux: sum of trapezoid circulations of all grid cells
// whose four corners lie inside the disk. Converges to 2 pi n / e.
double flux(const Background2D& bg);

// Energy of the static configuration,
//   E = int d^2x [ 1/2 F12^2 + |D phi|^2 + 1/2 e^2 (|phi|^2 - v^2)^2 ],
// evaluated at cell centers. E >= e v^2 |Phi|, saturated on self-dual
// backgrounds.
double energy(const Background2D& bg);

// Winding of phi on a circle just inside the boundary, by phase unwrapping.
int boundary_winding(const Background2D& bg);

void export_background_csv(const Background2D& bg, const std::string& path);

} // namespace lgv
