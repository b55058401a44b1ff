#include "fibergap/fock.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace fibergap {

namespace {

std::string too_large_message(std::size_t dim, std::size_t limit) {
    std::ostringstream os;
    os << "truncated Fock dimension " << dim << " exceeds the configured limit " << limit;
    return os.str();
}

// Binomial coefficient with saturation at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double r = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
    if (r > static_cast<long double>(std::numeric_limits<std::size_t>::max()))
        return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::llround(r));
}

// Appends every occupation of `modes` slots with exactly `n` quanta, in
// descending lexicographic order.
void emit_sector(std::size_t modes, int n, Occupation& cur, std::size_t pos, std::vector<Occupation>& out) {
    if (pos + 1 == modes) {
        cur[pos] = n;
        out.push_back(cur);
        cur[pos] = 0;
        return;
    }
    for (int take = n; take >= 0; --take) {
        cur[pos] = take;
        emit_sector(modes, n - take, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

}  // namespace

BasisTooLarge::BasisTooLarge(std::size_t dim, std::size_t lim)
    : std::length_error(too_large_message(dim, lim)), dimension(dim), limit(lim) {}

std::size_t truncated_fock_dimension(std::size_t n_modes, int n_max) {
    // sum_{n <= N} C(modes + n - 1, n) = C(modes + N, N)
    return binomial(n_modes + static_cast<std::size_t>(n_max), static_cast<std::size_t>(n_max));
}

FockBasis::FockBasis(std::size_t n_modes, int n_max, std::size_t max_dim)
    : n_modes_(n_modes), n_max_(n_max) {
    if (n_modes < 1) throw std::invalid_argument("FockBasis: n_modes must be >= 1");
    if (n_max < 0) throw std::invalid_argument("FockBasis: N_max must be >= 0");
    const std::size_t dim = truncated_fock_dimension(n_modes, n_max);
    if (dim > max_dim) throw BasisTooLarge(dim, max_dim);

    states_.reserve(dim);
    Occupation cur(n_modes, 0);
    for (int n = 0; n <= n_max; ++n) {
        sector_begin_.push_back(states_.size());
        emit_sector(n_modes, n, cur, 0, states_);
    }
    sector_begin_.push_back(states_.size());

    numbers_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        int total = 0;
        for (int v : states_[i]) total += v;
        numbers_.push_back(total);
        index_.emplace(states_[i], i);
    }
}

std::optional<std::size_t> FockBasis::index_of(const Occupation& occ) const {
    const auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

FockBasis enumerate_basis(std::size_t n_modes, int n_max, std::size_t max_dim) {
    return FockBasis(n_modes, n_max, max_dim);
}

CMatrix annihilator(const FockBasis& basis, std::size_t m) {
    if (m >= basis.n_modes()) throw std::out_of_range("annihilator: mode index out of range");
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    CMatrix a = CMatrix::Zero(dim, dim);
    Occupation lowered;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const auto& occ = basis.state(j);
        if (occ[m] == 0) continue;
        lowered = occ;
        lowered[m] -= 1;
        const auto i = basis.index_of(lowered);
        a(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j)) = std::sqrt(static_cast<double>(occ[m]));
    }
    return a;
}

RVector dgamma_diagonal(const FockBasis& basis, std::span<const double> c) {
    if (c.size() != basis.n_modes()) throw std::invalid_argument("dgamma: one scalar per mode required");
    RVector d(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto& occ = basis.state(i);
        double s = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m) s += c[m] * occ[m];
        d(static_cast<Eigen::Index>(i)) = s;
    }
    return d;
}

CMatrix dgamma(const FockBasis& basis, std::span<const double> c) {
    return diagonal(dgamma_diagonal(basis, c));
}

CMatrix annihilation_sum(const FockBasis& basis, std::span<const Complex> coeffs) {
    if (coeffs.size() != basis.n_modes())
        throw std::invalid_argument("annihilation_sum: one coefficient per mode required");
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    CMatrix a = CMatrix::Zero(dim, dim);
    Occupation lowered;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const auto& occ = basis.state(j);
        for (std::size_t m = 0; m < coeffs.size(); ++m) {
            if (occ[m] == 0 || coeffs[m] == Complex(0.0)) continue;
            lowered = occ;
            lowered[m] -= 1;
            const auto i = static_cast<Eigen::Index>(*basis.index_of(lowered));
            a(i, static_cast<Eigen::Index>(j)) += std::conj(coeffs[m]) * std::sqrt(static_cast<double>(occ[m]));
        }
    }
    return a;
}

CMatrix field_sum(const FockBasis& basis, std::span<const Complex> coeffs) {
    const CMatrix a = annihilation_sum(basis, coeffs);
    return a + a.adjoint();
}

CMatrix field_sum(const FockBasis& basis, std::span<const double> coeffs) {
    std::vector<Complex> c(coeffs.begin(), coeffs.end());
    return field_sum(basis, std::span<const Complex>(c));
}

}  // namespace fibergap
