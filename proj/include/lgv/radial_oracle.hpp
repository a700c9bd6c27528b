#pragma once

#include "lgv/profile.hpp"
#include "lgv/types.hpp"

namespace lgv {

// Per-channel kernel counts from the angular-momentum decomposition of the
// zero-mode operator. Channel m couples (psi_m, chi_{m-n+1}) through
//   psi' = ((m - n a)/s) psi + sqrt2 f chi
//   chi' = -((m-n+1)/s) chi + sqrt2 f psi        (s = e v r)
// The unique decaying solution is integrated backward from the tail; a
// channel carries a zero mode iff that solution stays bounded at the origin
// (local growth exponent > -1/2). Counts are real dimensions: 2 per
// admissible channel. Entirely independent of the 2D grid machinery.
struct ChannelCount {
    int m = 0;
    int count = 0;          // 0 or 2
    double growth_exponent = 0.0;
};

std::vector<ChannelCount> radial_channel_oracle(const RadialProfile& profile, int m_lo, int m_hi);

int total_channel_count(const std::vector<ChannelCount>& counts);

} // namespace lgv
