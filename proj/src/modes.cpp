#include "fibergap/modes.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fibergap {

std::string to_string(DirectionSet set) {
    switch (set) {
        case DirectionSet::pair2: return "pair2";
        case DirectionSet::axes6: return "axes6";
        case DirectionSet::lebedev14: return "lebedev14";
    }
    return "unknown";
}

DirectionSet direction_set_from_string(const std::string& name) {
    if (name == "pair2") return DirectionSet::pair2;
    if (name == "axes6") return DirectionSet::axes6;
    if (name == "lebedev14") return DirectionSet::lebedev14;
    throw std::invalid_argument("unknown direction set '" + name + "'");
}

void ModelParams::validate() const {
    if (!(e >= 0.0)) throw std::invalid_argument("e must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (!(M > 0.0)) throw std::invalid_argument("M must be > 0");
    if (!(m_ph >= 0.0)) throw std::invalid_argument("m_ph must be >= 0");
    if (!(Lambda > 0.0) || !std::isfinite(Lambda))
        throw std::invalid_argument("Lambda must be finite and > 0");
    if (grid.n_shells < 1) throw std::invalid_argument("grid.n_shells must be >= 1");
    if (!(grid.radial_floor > 0.0 && grid.radial_floor < 1.0))
        throw std::invalid_argument("grid.radial_floor must lie in (0, 1)");
    if (N_max < 0) throw std::invalid_argument("N_max must be >= 0");
}

double dispersion(const Vec3& k, double m_ph) {
    return std::sqrt(k.squaredNorm() + m_ph * m_ph);
}

std::pair<Vec3, Vec3> dreibein(const Vec3& k) {
    const double norm = k.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("dreibein: k must be nonzero");
    Vec3 a(0.0, 0.0, 1.0);
    if (a.cross(k).norm() < 1e-9 * norm) a = Vec3(0.0, 1.0, 0.0);
    const Vec3 eps1 = a.cross(k).normalized();
    const Vec3 eps2 = k.cross(eps1).normalized();
    return {eps1, eps2};
}

std::vector<UnitDirection> directions(DirectionSet set) {
    constexpr double four_pi = 4.0 * std::numbers::pi;
    std::vector<UnitDirection> out;
    auto add_pair = [&](const Vec3& n, double w) {
        out.push_back({n, w});
        out.push_back({-n, w});
    };
    switch (set) {
        case DirectionSet::pair2:
            add_pair(Vec3::UnitX(), four_pi / 2.0);
            break;
        case DirectionSet::axes6:
            add_pair(Vec3::UnitX(), four_pi / 6.0);
            add_pair(Vec3::UnitY(), four_pi / 6.0);
            add_pair(Vec3::UnitZ(), four_pi / 6.0);
            break;
        case DirectionSet::lebedev14: {
            add_pair(Vec3::UnitX(), four_pi / 15.0);
            add_pair(Vec3::UnitY(), four_pi / 15.0);
            add_pair(Vec3::UnitZ(), four_pi / 15.0);
            const double c = 1.0 / std::sqrt(3.0);
            const double w = four_pi * 3.0 / 40.0;
            add_pair(Vec3(c, c, c), w);
            add_pair(Vec3(c, c, -c), w);
            add_pair(Vec3(c, -c, c), w);
            add_pair(Vec3(-c, c, c), w);
            break;
        }
    }
    return out;
}

ModeSet build_mode_set(const ModelParams& params) {
    params.validate();
    const auto rule = gauss_legendre(params.grid.n_shells);
    const double lo = params.grid.radial_floor * params.Lambda;
    const double hi = params.Lambda;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const auto dirs = directions(params.grid.directions);

    ModeSet modes;
    modes.reserve(rule.nodes.size() * dirs.size() * 2);
    for (std::size_t s = 0; s < rule.nodes.size(); ++s) {
        const double r = mid + half * rule.nodes[s];
        const double radial_weight = half * rule.weights[s] * r * r;
        for (const auto& d : dirs) {
            const Vec3 k = r * d.n;
            const auto [eps1, eps2] = dreibein(k);
            const double w = radial_weight * d.weight;
            modes.push_back({k, 1, eps1, w});
            modes.push_back({k, 2, eps2, w});
        }
    }
    return modes;
}

FormFactorTable form_factors(const ModeSet& modes, const ModelParams& params) {
    const double norm = 2.0 * std::pow(2.0 * std::numbers::pi, 3);
    FormFactorTable table;
    table.f.reserve(modes.size());
    table.scalar.reserve(modes.size());
    table.omega.reserve(modes.size());
    for (const auto& m : modes) {
        const double omega = dispersion(m.k, params.m_ph);
        double g = params.e * std::sqrt(m.weight) / std::sqrt(norm * omega);
        if (m.k.norm() > params.Lambda) g = 0.0;
        if (params.grid.smooth_envelope)
            g *= std::exp(-m.k.squaredNorm() / (2.0 * params.Lambda * params.Lambda));
        table.f.push_back(g * m.eps);
        table.scalar.push_back(g);
        table.omega.push_back(omega);
    }
    return table;
}

CouplingNorms coupling_norms(const ModeSet& modes, const FormFactorTable& table) {
    double half = 0.0, one = 0.0, kin = 0.0, curl = 0.0;
    Vec3 half_c = Vec3::Zero(), one_c = Vec3::Zero();
    for (std::size_t m = 0; m < table.size(); ++m) {
        const double w = table.omega[m];
        const double f2 = table.f[m].squaredNorm();
        const double lift = 1.0 + 1.0 / std::sqrt(w);
        const double kabs = modes[m].k.norm();
        half += f2 / w;
        one += lift * lift * f2;
        kin += kabs * f2;
        curl += lift * lift * kabs * kabs * f2;
        const Vec3 comp2 = table.f[m].cwiseAbs2();
        half_c += comp2 / w;
        one_c += lift * lift * comp2;
    }
    CouplingNorms n;
    n.n_half = std::sqrt(half);
    n.n_one = std::sqrt(one);
    n.n_kin = std::sqrt(kin);
    n.n_curl = std::sqrt(curl);
    n.n_half_component = half_c.cwiseSqrt();
    n.n_one_component = one_c.cwiseSqrt();
    return n;
}

void write_modes_csv(std::ostream& os, const ModeSet& modes) {
    const auto old_precision = os.precision();
    os << "k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight\n" << std::setprecision(17);
    for (const auto& m : modes) {
        os << m.k.x() << ',' << m.k.y() << ',' << m.k.z() << ',' << m.polarization << ','
           << m.eps.x() << ',' << m.eps.y() << ',' << m.eps.z() << ',' << m.weight << '\n';
    }
    os.precision(old_precision);
}

}  // namespace fibergap
