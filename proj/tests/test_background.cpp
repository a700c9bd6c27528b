#include <doctest.h>

#include "lgv/background.hpp"

#include <cmath>

using namespace lgv;

namespace {
RadialProfile profile_for(int n, int m_r = 1025) {
    return solve_profile({n, 1.0, 1.0, 12.0, m_r}, ProfileMethod::shooting);
}
} // namespace

TEST_CASE("boundary winding equals the vorticity") {
    CHECK(boundary_winding(sample_background(profile_for(1), 128)) == 1);
    CHECK(boundary_winding(sample_background(profile_for(3), 96)) == 3);
}

TEST_CASE("|phi| bounded by v and finite at the origin") {
    RadialProfile p = profile_for(1);
    // odd m_xy puts a node exactly at the origin
    Background2D bg = sample_background(p, 129);
    double mx = 0.0;
    for (const cd& z : bg.phi) mx = std::max(mx, std::abs(z));
    CHECK(mx <= 1.0 + 1e-9);
    int c = 64; // origin node
    CHECK(std::abs(bg.phi[bg.at(c, c)]) < 0.05); // f ~ c r vanishes there
    CHECK(std::isfinite(bg.a1[bg.at(c, c)]));
    CHECK(std::isfinite(bg.a2[bg.at(c, c)]));

    // even m_xy: nearest node sits at r = h/sqrt2; |phi| = c * r * v there
    Background2D bg2 = sample_background(p, 128);
    double r_min = std::hypot(bg2.x(63), bg2.y(63));
    double expect = p.core_coefficient * r_min;
    double got = std::abs(bg2.phi[bg2.at(63, 63)]);
    CHECK(got == doctest::Approx(expect).epsilon(2e-2));
}

TEST_CASE("parallel sampling is bitwise equal to the serial reference") {
    RadialProfile p = profile_for(2);
    Background2D a = sample_background(p, 96);
    Background2D b = sample_background_serial(p, 96);
    REQUIRE(a.phi.size() == b.phi.size());
    bool same = true;
    for (std::size_t i = 0; i < a.phi.size(); ++i)
        same = same && a.phi[i] == b.phi[i] && a.a1[i] == b.a1[i] && a.a2[i] == b.a2[i];
    CHECK(same);
}

TEST_CASE("flux quantization") {
    for (int n : {1, 2}) {
        Background2D bg = sample_background(profile_for(n), 128);
        double F = flux(bg);
        CHECK(std::abs(F / (2.0 * M_PI * n) - 1.0) < 1e-3);
    }
}

TEST_CASE("vacuum background: zero flux and zero energy") {
    Background2D bg = sample_background(profile_for(0, 256), 96);
    CHECK(flux(bg) == 0.0);
    CHECK(energy(bg) == 0.0);
}

TEST_CASE("energy saturates the Bogomolny bound") {
    for (int n : {1, 2}) {
        Background2D bg = sample_background(profile_for(n), 128);
        double E = energy(bg), F = flux(bg);
        CHECK(E >= F * (1.0 - 1e-3)); // e = v = 1
        double ratio = E / F;
        CHECK(ratio >= 0.99);
        CHECK(ratio <= 1.01);
    }
}

TEST_CASE("flux error decreases under grid refinement") {
    RadialProfile p = profile_for(1, 2049);
    double e96 = std::abs(flux(sample_background(p, 96)) / (2 * M_PI) - 1.0);
    double e192 = std::abs(flux(sample_background(p, 192)) / (2 * M_PI) - 1.0);
    CHECK(e192 < e96);
}
