#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fibergap/linalg.hpp"

namespace fibergap {

using Occupation = std::vector<int>;

class BasisTooLarge : public std::length_error {
public:
    BasisTooLarge(std::size_t dim, std::size_t limit);
    std::size_t dimension;
    std::size_t limit;
};

/// Number of occupation vectors over n_modes with total number <= n_max.
std::size_t truncated_fock_dimension(std::size_t n_modes, int n_max);

/// Truncated bosonic occupation basis. States are graded by total photon
/// number, so the vacuum is index 0 and each number sector is contiguous;
/// inside a sector the order is descending lexicographic, e.g. (1,0) before
/// (0,1).
class FockBasis {
public:
    FockBasis(std::size_t n_modes, int n_max, std::size_t max_dim = 1u << 16);

    std::size_t n_modes() const { return n_modes_; }
    int n_max() const { return n_max_; }
    std::size_t dim() const { return states_.size(); }

    const Occupation& state(std::size_t i) const { return states_.at(i); }
    const std::vector<Occupation>& states() const { return states_; }
    std::optional<std::size_t> index_of(const Occupation& occ) const;

    /// Total photon number of state i.
    int number(std::size_t i) const { return numbers_[i]; }
    /// First index of sector n (n in [0, n_max + 1]; n_max + 1 gives dim()).
    std::size_t sector_begin(int n) const { return sector_begin_.at(n); }

private:
    std::size_t n_modes_;
    int n_max_;
    std::vector<Occupation> states_;
    std::vector<int> numbers_;
    std::vector<std::size_t> sector_begin_;
    std::map<Occupation, std::size_t> index_;
};

FockBasis enumerate_basis(std::size_t n_modes, int n_max, std::size_t max_dim = 1u << 16);

/// a_m restricted to the truncation; a_m^dagger is its adjoint, so creation
/// out of the top sector is dropped.
CMatrix annihilator(const FockBasis& basis, std::size_t m);

/// Diagonal of dGamma(c): sum_m c_m n_m per basis state.
RVector dgamma_diagonal(const FockBasis& basis, std::span<const double> c);

CMatrix dgamma(const FockBasis& basis, std::span<const double> c);

/// sum_m (conj(c_m) a_m + c_m a_m^dagger).
CMatrix field_sum(const FockBasis& basis, std::span<const Complex> coeffs);

/// Real-coefficient convenience overload.
CMatrix field_sum(const FockBasis& basis, std::span<const double> coeffs);

/// sum_m conj(c_m) a_m, i.e. a(c).
CMatrix annihilation_sum(const FockBasis& basis, std::span<const Complex> coeffs);

}  // namespace fibergap
