#include "lgv/radial_oracle.hpp"

#include <array>
#include <cmath>

namespace lgv {

namespace {

using Y2 = std::array<double, 2>;

// fixed-step RK4 is plenty here: only a growth exponent is needed
template <class RHS>
void rk4(RHS rhs, double s0, double s1, Y2& y, int steps) {
    const double h = (s1 - s0) / steps;
    Y2 k1, k2, k3, k4, t;
    double s = s0;
    for (int i = 0; i < steps; ++i) {
        rhs(s, y, k1);
        t = {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]};
        rhs(s + 0.5 * h, t, k2);
        t = {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]};
        rhs(s + 0.5 * h, t, k3);
        t = {y[0] + h * k3[0], y[1] + h * k3[1]};
        rhs(s + h, t, k4);
        y[0] += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        double m = std::max(std::abs(y[0]), std::abs(y[1]));
        if (m > 1e280) { y[0] /= 1e280; y[1] /= 1e280; } // rescale, only the direction matters
        s += h;
    }
}

} // namespace

std::vector<ChannelCount> radial_channel_oracle(const RadialProfile& profile, int m_lo,
                                                int m_hi) {
    if (m_lo > m_hi) throw InvalidParams("radial_channel_oracle: empty m range");
    const int n = profile.params.n;
    std::vector<ChannelCount> out;
    if (n == 0) {
        for (int m = m_lo; m <= m_hi; ++m) out.push_back({m, 0, -1.0});
        return out;
    }
    if (profile.residual_norm > 1e-6)
        throw ChannelNonConvergence("radial_channel_oracle: profile not converged");

    ProfileInterpolant itp(profile);
    const double ev = profile.params.scale();
    const double s_max = ev * profile.params.r_max;
    const double s0 = 0.02;
    const double SQ2 = std::sqrt(2.0);

    for (int m = m_lo; m <= m_hi; ++m) {
        const int j = m - n + 1;
        auto rhs = [&](double s, const Y2& y, Y2& dy) {
            double f, a;
            itp.eval(s / ev, f, a);
            dy[0] = ((m - n * a) / s) * y[0] + SQ2 * f * y[1];
            dy[1] = -(double(j) / s) * y[1] + SQ2 * f * y[0];
        };
        // decaying direction of the asymptotic system [[0, sq2],[sq2, 0]]
        Y2 y{1.0, -1.0};
        const int steps = 6000;
        rk4(rhs, s_max, 4.0 * s0, y, steps);
        double n2 = std::hypot(y[0], y[1]);
        rk4(rhs, 4.0 * s0, 2.0 * s0, y, 400);
        double n1 = std::hypot(y[0], y[1]);
        if (!(std::isfinite(n1) && std::isfinite(n2)) || n1 == 0.0 || n2 == 0.0)
            throw ChannelNonConvergence("radial_channel_oracle: channel m=" + std::to_string(m));
        // ||y|| ~ s^p near the origin
        double p = std::log(n2 / n1) / std::log(2.0);
        bool admissible = p > -0.5;
        out.push_back({m, admissible ? 2 : 0, p});
    }
    return out;
}

int total_channel_count(const std::vector<ChannelCount>& counts) {
    int t = 0;
    for (const auto& c : counts) t += c.count;
    return t;
}

} // namespace lgv
