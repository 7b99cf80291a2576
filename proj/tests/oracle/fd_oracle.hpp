#pragma once

#include <cstddef>
#include <vector>

#include "slorbit/potential.hpp"
#include "slorbit/types.hpp"

namespace oracle {

// Finite-difference discretisation of -y'' + q y on n interior nodes. The
// boundary values are free along the eigenvectors of U not belonging to -1
// and carry the term -<A psi, psi>; the -1 directions are pinned to zero.
// Eigenvalues are located by inertia (Sturm count plus a 2x2 Schur block).
class FiniteDifference {
public:
    FiniteDifference(const slorbit::Potential& q, const slorbit::Matrix2cd& u, std::size_t n);

    // Number of discrete eigenvalues below sigma.
    std::size_t count_below(double sigma) const;

    std::vector<double> lowest(std::size_t k) const;

    double h() const { return h_; }

private:
    std::size_t m_; // intervals
    double h_;
    std::vector<double> qn_; // q at the nodes 0..m
    std::vector<slorbit::Vector2cd> free_; // admissible boundary directions
    std::vector<double> robin_; // A restricted to them
};

// Richardson extrapolation of the lowest k eigenvalues over n and 2n nodes.
std::vector<double> fd_eigenvalues(const slorbit::Potential& q, const slorbit::Matrix2cd& u,
                                   std::size_t k, std::size_t n = 4000);

} // namespace oracle
