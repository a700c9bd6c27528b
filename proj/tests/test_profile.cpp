#include <doctest.h>

#include "lgv/profile.hpp"

#include <array>
#include <cmath>

using namespace lgv;

namespace {

// Independent shooting oracle, written before the main solver: fixed-step
// RK4 on the first-order system in s-units, bisection on the core
// coefficient c of f ~ c s^n. Deliberately shares no code with
// solve_profile.
struct OracleResult {
    double c;
    double f_at(double s) const { return fs[idx(s)]; }
    double a_at(double s) const { return as[idx(s)]; }
    std::vector<double> fs, as;
    double ds;
    std::size_t idx(double s) const { return static_cast<std::size_t>(std::lround(s / ds)); }
};

OracleResult oracle_shoot(int n, double s_max) {
    const int steps = 240000;
    const double ds = s_max / steps;
    auto rhs = [n](double s, const std::array<double, 2>& y, std::array<double, 2>& d) {
        if (s <= 0.0) { d = {0.0, 0.0}; return; }
        d[0] = (n / s) * (1.0 - y[1]) * y[0];
        d[1] = (s / n) * (1.0 - y[0] * y[0]);
    };
    auto integrate = [&](double c, std::vector<double>* fs, std::vector<double>* as) {
        // start on the core series a little off the origin
        double s0 = 16 * ds;
        std::array<double, 2> y{c * std::pow(s0, n) * (1.0 - s0 * s0 / 4.0),
                                s0 * s0 / (2.0 * n)};
        if (fs) {
            fs->assign(steps + 1, 1.0);
            as->assign(steps + 1, 1.0);
            for (int i = 0; i <= 16; ++i) {
                double s = i * ds;
                (*fs)[i] = c * std::pow(s, n) * (1.0 - s * s / 4.0);
                (*as)[i] = s * s / (2.0 * n);
            }
        }
        std::array<double, 2> k1, k2, k3, k4, t;
        for (int i = 16; i < steps; ++i) {
            double s = i * ds;
            rhs(s, y, k1);
            t = {y[0] + 0.5 * ds * k1[0], y[1] + 0.5 * ds * k1[1]};
            rhs(s + 0.5 * ds, t, k2);
            t = {y[0] + 0.5 * ds * k2[0], y[1] + 0.5 * ds * k2[1]};
            rhs(s + 0.5 * ds, t, k3);
            t = {y[0] + ds * k3[0], y[1] + ds * k3[1]};
            rhs(s + ds, t, k4);
            y[0] += ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
            y[1] += ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
            if (fs) {
                (*fs)[i + 1] = y[0];
                (*as)[i + 1] = y[1];
            }
            if (y[0] > 1.5) return +1; // f blows up: c too large
            if (y[1] > 1.5) return -1; // a overshoots: c too small
        }
        return y[0] > 1.0 ? +1 : -1;
    };
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 70; ++it) {
        double mid = 0.5 * (lo + hi);
        (integrate(mid, nullptr, nullptr) > 0 ? hi : lo) = mid;
    }
    OracleResult r;
    r.c = 0.5 * (lo + hi);
    r.ds = ds;
    integrate(r.c, &r.fs, &r.as);
    return r;
}

} // namespace

// Golden values frozen from the oracle above (n=1, e=v=1):
//   c      = 0.85317786596
//   f(1.0) = 0.68973743638
// The oracle is re-run here so drift in either direction is caught.
static constexpr double kGoldenC1 = 0.85317786596;
static constexpr double kGoldenF1 = 0.68973743638;

TEST_CASE("shooting oracle reproduces frozen golden values") {
    OracleResult o = oracle_shoot(1, 12.0);
    CHECK(std::abs(o.c - kGoldenC1) < 2e-8);
    CHECK(std::abs(o.f_at(1.0) - kGoldenF1) < 2e-8);
}

TEST_CASE("solve_profile matches the golden core values") {
    VortexParams p{1, 1.0, 1.0, 12.0, 2401}; // node at r = 1.0
    RadialProfile prof = solve_profile(p, ProfileMethod::shooting);
    CHECK(prof.core_coefficient == doctest::Approx(kGoldenC1).epsilon(1e-8));
    CHECK(prof.f[200] == doctest::Approx(kGoldenF1).epsilon(1e-8)); // r = 1.0
}

TEST_CASE("profile invariants for n=1..3") {
    for (int n : {1, 2, 3}) {
        VortexParams p{n, 1.0, 1.0, 12.0, 1025};
        RadialProfile prof = solve_profile(p, ProfileMethod::shooting);
        CHECK(prof.f[0] == 0.0);
        CHECK(prof.a[0] == 0.0);
        CHECK(prof.f.back() >= 1.0 - 1e-3);
        CHECK(prof.a.back() >= 1.0 - 1e-3);
        CHECK(prof.residual_norm <= 1e-8);
        bool bounded = true, monotone = true;
        for (std::size_t i = 0; i < prof.f.size(); ++i) {
            bounded = bounded && prof.f[i] >= 0.0 && prof.f[i] <= 1.0 && prof.a[i] >= 0.0 &&
                      prof.a[i] <= 1.0;
            if (i > 0)
                monotone = monotone && prof.f[i] >= prof.f[i - 1] - 1e-12 &&
                           prof.a[i] >= prof.a[i - 1] - 1e-12;
        }
        CHECK(bounded);
        CHECK(monotone);
    }
}

TEST_CASE("vacuum profile is exact") {
    VortexParams p{0, 1.0, 1.0, 12.0, 256};
    for (auto m : {ProfileMethod::shooting, ProfileMethod::relaxation}) {
        RadialProfile prof = solve_profile(p, m);
        CHECK(prof.residual_norm == 0.0);
        for (std::size_t i = 0; i < prof.f.size(); ++i) {
            CHECK(prof.f[i] == 1.0);
            CHECK(prof.a[i] == 0.0);
        }
    }
}

TEST_CASE("shooting and relaxation agree to 1e-6") {
    for (int n : {1, 2, 3}) {
        VortexParams p{n, 1.0, 1.0, 12.0, 1025};
        RadialProfile s = solve_profile(p, ProfileMethod::shooting);
        RadialProfile r = solve_profile(p, ProfileMethod::relaxation);
        double worst = 0.0;
        for (std::size_t i = 0; i < s.f.size(); ++i) {
            worst = std::max(worst, std::abs(s.f[i] - r.f[i]));
            worst = std::max(worst, std::abs(s.a[i] - r.a[i]));
        }
        CHECK(worst < 1e-6);
        CHECK(r.residual_norm <= 1e-8);
    }
}

TEST_CASE("dimensionless collapse: (e,v)=(1,1) vs (2,0.5) after r -> e v r") {
    VortexParams p1{1, 1.0, 1.0, 12.0, 513};
    VortexParams p2{1, 2.0, 0.5, 12.0, 513}; // e v = 1 as well; same s-grid
    RadialProfile a = solve_profile(p1, ProfileMethod::shooting);
    RadialProfile b = solve_profile(p2, ProfileMethod::shooting);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.f.size(); ++i) {
        worst = std::max(worst, std::abs(a.f[i] - b.f[i]));
        worst = std::max(worst, std::abs(a.a[i] - b.a[i]));
    }
    CHECK(worst < 1e-5);

    VortexParams p3{1, 2.0, 1.0, 6.0, 513}; // e v = 2: s-grid matches after rescaling
    RadialProfile c = solve_profile(p3, ProfileMethod::shooting);
    worst = 0.0;
    for (std::size_t i = 0; i < a.f.size(); ++i) {
        worst = std::max(worst, std::abs(a.f[i] - c.f[i]));
        worst = std::max(worst, std::abs(a.a[i] - c.a[i]));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(solve_profile({-1, 1, 1, 12, 256}, ProfileMethod::shooting), InvalidParams);
    CHECK_THROWS_AS(solve_profile({1, -1, 1, 12, 256}, ProfileMethod::shooting), InvalidParams);
    CHECK_THROWS_AS(solve_profile({1, 1, 1, 12, 8}, ProfileMethod::shooting), InvalidParams);
}
