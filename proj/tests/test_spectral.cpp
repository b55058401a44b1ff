#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibergap/spectral.hpp"

using namespace fibergap;

namespace {

ModelParams desk(double e) {
    ModelParams p;
    p.e = e;
    return p;
}

}  // namespace

TEST_CASE("low_spectrum") {
    RVector d(3);
    d << 3, 1, 2;
    const auto low = low_spectrum(diagonal(d), 2);
    REQUIRE(low.values.size() == 2);
    CHECK(low.values(0) == doctest::Approx(1.0));
    CHECK(low.values(1) == doctest::Approx(2.0));

    const auto m = FiberModel::build(desk(0.1));
    const auto l = low_spectrum(build_H(m, Vec3(0.5, 0, 0)).matrix, 10);
    const CMatrix gram = l.vectors.adjoint() * l.vectors;
    CHECK((gram - CMatrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(l.max_residual <= 1e-9);
}

TEST_CASE("cluster_degeneracy") {
    const std::vector<double> v{1.0, 1.0 + 1e-12, 2.0};
    const auto c = cluster_degeneracy(v, 1e-9);
    REQUIRE(c.size() == 2);
    CHECK(c[0].multiplicity == 2);
    CHECK(c[1].multiplicity == 1);
    CHECK(c[1].value == 2.0);

    const std::vector<double> distinct{0.0, 1.0, 2.5, 4.0};
    for (const auto& cl : cluster_degeneracy(distinct)) CHECK(cl.multiplicity == 1);

    const auto m = FiberModel::build(desk(0.0));
    const RVector ev = hermitian_eigenvalues(build_H(m, Vec3(0.3, 0.2, 0)).matrix);
    std::vector<double> vals(ev.data(), ev.data() + ev.size());
    for (const auto& cl : cluster_degeneracy(vals)) CHECK(cl.multiplicity % 2 == 0);
}

TEST_CASE("ground data at zero coupling") {
    const auto m = FiberModel::build(desk(0.0));
    const auto& p = m.params;
    const auto g = ground_data(m, Vec3::Zero());
    CHECK(g.E == doctest::Approx(p.gamma * p.M).epsilon(1e-14));
    CHECK(g.multiplicity == 2);
    double e1 = std::numeric_limits<double>::infinity();
    for (const auto& mode : m.modes) e1 = std::min(e1, p.gamma * std::hypot(mode.k.norm(), p.M) + dispersion(mode.k, p.m_ph));
    REQUIRE(g.E1);
    CHECK(*g.E1 == doctest::Approx(e1).epsilon(1e-13));
}

TEST_CASE("ground data at small coupling") {
    const auto m = FiberModel::build(desk(0.1));
    for (double px : {0.0, 0.7, 1.5}) {
        const Vec3 P(px, 0.1, -0.2);
        const auto g = ground_data(m, P);
        CHECK(g.multiplicity == 2);
        CHECK(std::abs(g.E - ground_data(m, -P).E) < 1e-10);
    }
}

TEST_CASE("energy cache") {
    EnergyCache cache;
    const auto m = FiberModel::build(desk(0.05));
    const Vec3 P(0.4, 0, 0);
    const double a = ground_energy(m, P, &cache);
    CHECK(cache.size() == 1);
    CHECK(ground_energy(m, P + Vec3(1e-14, 0, 0), &cache) == a);
    CHECK(cache.size() == 1);
    CHECK(ground_energy(m, P) == a);
}

TEST_CASE("delta") {
    const auto m0 = FiberModel::build(desk(0.0));
    const auto& p = m0.params;
    const auto trial = default_trial_set(m0);
    CHECK(trial.front() == Vec3::Zero());
    for (double px : {0.0, 1.0, 2.0}) {
        const Vec3 P(px, 0, 0);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : trial)
            best = std::min(best, p.gamma * std::hypot((P - k).norm(), p.M) + dispersion(k, p.m_ph) -
                                      p.gamma * std::hypot(px, p.M));
        const auto d = delta_gap(m0, P, trial);
        CHECK(std::abs(d.delta - best) < 1e-10);
        CHECK(d.delta <= p.m_ph + 1e-12);
        CHECK(d.delta >= (1.0 - p.gamma) * p.m_ph - 1e-12);
    }

    const auto m = FiberModel::build(desk(0.1));
    const Vec3 P(0.9, 0, 0);
    const std::vector<Vec3> subset(trial.begin(), trial.begin() + 3);
    EnergyCache cache;
    const double d_all = delta_gap(m, P, trial, &cache).delta;
    const double d_sub = delta_gap(m, P, subset, &cache).delta;
    CHECK(d_all <= d_sub);
    CHECK(d_all > 0.0);
    CHECK(d_all <= m.params.m_ph + 1e-12);
}

TEST_CASE("convergence study") {
    const std::vector<ConvergenceRung> ladder{{0, GridSpec{}}, {1, GridSpec{}}, {2, GridSpec{}}};
    const auto free = convergence_study(Vec3(0.5, 0, 0), desk(0.0), ladder);
    REQUIRE(free.size() == 3);
    for (const auto& r : free) CHECK(r.E == doctest::Approx(free.front().E).epsilon(1e-14));
    CHECK_FALSE(free.front().change);

    const auto rows = convergence_study(Vec3(0.5, 0, 0), desk(0.1), ladder);
    // N_max = 0: one vacuum state per spin, where the compressed fields vanish
    auto p0 = desk(0.1);
    p0.N_max = 0;
    const auto m0 = FiberModel::build(p0);
    const CMatrix h0 = build_H(m0, Vec3(0.5, 0, 0)).matrix;
    REQUIRE(h0.rows() == 2);
    CHECK(rows[0].E == doctest::Approx(std::min(h0(0, 0).real(), h0(1, 1).real())).epsilon(1e-14));
    CHECK(rows[0].E == doctest::Approx(p0.gamma * std::hypot(0.5, p0.M)).epsilon(1e-14));
    CHECK(std::abs(*rows[2].change) <= std::abs(*rows[1].change));
}

TEST_CASE("radial deviation is reported") {
    const auto m = FiberModel::build(desk(0.1));
    const double dev = radial_deviation(m, 1.0);
    CHECK(dev >= 0.0);
    CHECK(std::isfinite(dev));
    CHECK(radial_deviation(FiberModel::build(desk(0.0)), 1.0) < 1e-12);
}
