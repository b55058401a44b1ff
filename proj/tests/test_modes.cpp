#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fibergap/modes.hpp"

using namespace fibergap;

namespace {

ModelParams params_with(int shells, DirectionSet dirs, double e = 0.1) {
    ModelParams p;
    p.e = e;
    p.grid.n_shells = shells;
    p.grid.directions = dirs;
    return p;
}

}  // namespace

TEST_CASE("dispersion") {
    CHECK(dispersion(Vec3::Zero(), 0.3) == doctest::Approx(0.3));
    CHECK(dispersion(Vec3(3, 0, 0), 4.0) == doctest::Approx(5.0));
    CHECK(dispersion(Vec3(0, 2, 0), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("dreibein") {
    auto [e1, e2] = dreibein(Vec3(0, 0, 1));
    CHECK((e1 - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((e2 - Vec3(0, 1, 0)).norm() < 1e-15);

    for (const Vec3& k : {Vec3(0, 0, -1), Vec3(1, 2, 3), Vec3(-0.3, 0.1, 0.0), Vec3(0, 0, 1e-3)}) {
        auto [a, b] = dreibein(k);
        CHECK(std::abs(a.dot(k)) < 1e-14);
        CHECK(std::abs(b.dot(k)) < 1e-14);
        CHECK(std::abs(a.dot(b)) < 1e-14);
        CHECK(a.norm() == doctest::Approx(1.0));
        CHECK(b.norm() == doctest::Approx(1.0));
        // right-handed {k/|k|, eps1, eps2}
        CHECK(k.normalized().cross(a).dot(b) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(dreibein(Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("mode set counting, closure and weights") {
    const auto small = build_mode_set(params_with(1, DirectionSet::pair2));
    CHECK(small.size() == 4);

    for (auto dirs : {DirectionSet::pair2, DirectionSet::axes6, DirectionSet::lebedev14}) {
        const auto p = params_with(3, dirs);
        const auto modes = build_mode_set(p);
        double total = 0.0;
        for (const auto& m : modes) {
            CHECK(m.k.norm() <= p.Lambda + 1e-15);
            CHECK(std::abs(m.eps.dot(m.k)) < 1e-14);
            CHECK(m.weight > 0.0);
            total += m.weight;
            bool partner = false;
            for (const auto& n : modes)
                partner = partner || ((n.k + m.k).norm() < 1e-15 && n.polarization == m.polarization &&
                                      n.weight == m.weight);
            CHECK(partner);
        }
        // sum over both polarizations of the ball volume, radial floor excluded
        const double lo = p.grid.radial_floor * p.Lambda;
        const double ball = 4.0 / 3.0 * std::numbers::pi * (std::pow(p.Lambda, 3) - std::pow(lo, 3));
        CHECK(total == doctest::Approx(2.0 * ball).epsilon(1e-12));
    }

    const auto a = build_mode_set(params_with(2, DirectionSet::axes6));
    const auto b = build_mode_set(params_with(2, DirectionSet::axes6));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].k == b[i].k);
}

TEST_CASE("form factors") {
    const auto p = params_with(2, DirectionSet::axes6, 0.2);
    const auto modes = build_mode_set(p);
    const auto t = form_factors(modes, p);
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double w = dispersion(modes[m].k, p.m_ph);
        const double expected = p.e * std::sqrt(modes[m].weight) / std::sqrt(2.0 * std::pow(2 * std::numbers::pi, 3) * w);
        CHECK(t.f[m].norm() == doctest::Approx(expected));
        CHECK(t.omega[m] == doctest::Approx(w));
    }

    auto p0 = p;
    p0.e = 0.0;
    for (const auto& f : form_factors(modes, p0).f) CHECK(f.norm() == 0.0);

    auto p2 = p;
    p2.e = 0.4;
    const auto t2 = form_factors(modes, p2);
    for (std::size_t m = 0; m < modes.size(); ++m) CHECK((t2.f[m] - 2.0 * t.f[m]).norm() < 1e-15);
}

TEST_CASE("coupling norms") {
    auto p = params_with(24, DirectionSet::axes6, 0.3);
    const auto modes = build_mode_set(p);
    const auto n = coupling_norms(modes, form_factors(modes, p));
    // closed form: sum over both polarizations of e^2 / (2 (2 pi)^3) int 4 pi k^2 / omega^2 dk
    const double lo = p.grid.radial_floor * p.Lambda, hi = p.Lambda, m = p.m_ph;
    const double radial = (hi - m * std::atan(hi / m)) - (lo - m * std::atan(lo / m));
    const double expected = p.e * p.e / std::pow(2 * std::numbers::pi, 3) * 4 * std::numbers::pi * radial;
    CHECK(n.n_half * n.n_half == doctest::Approx(expected).epsilon(1e-8));

    p.e = 0.0;
    const auto z = coupling_norms(modes, form_factors(modes, p));
    CHECK(z.n_half == 0.0);
    CHECK(z.n_curl == 0.0);

    p.e = 0.6;
    const auto d = coupling_norms(modes, form_factors(modes, p));
    CHECK(d.n_one == doctest::Approx(2.0 * n.n_one));
    CHECK(d.n_kin == doctest::Approx(2.0 * n.n_kin));
    CHECK(d.n_curl == doctest::Approx(2.0 * n.n_curl));

    for (std::size_t i = 0; i < modes.size(); ++i) CHECK(modes[i].k.norm() <= dispersion(modes[i].k, 0.5));
}

TEST_CASE("modes csv") {
    std::ostringstream os;
    write_modes_csv(os, build_mode_set(params_with(1, DirectionSet::pair2)));
    const std::string text = os.str();
    CHECK(text.rfind("k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("validation") {
    ModelParams p;
    p.gamma = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.M = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.gamma = 1.0;
    CHECK_NOTHROW(p.validate());
    CHECK_FALSE(p.gap_hypotheses());
}
