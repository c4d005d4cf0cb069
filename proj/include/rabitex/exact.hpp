// exact.hpp: reference spectrum of the truncated Rabi Hamiltonian
//
// The whole truncated space is diagonalized; parity is read off the eigenvectors
// afterwards instead of being imposed by a block reduction.

#pragma once

#include "rabitex/fock.hpp"

#include <stdexcept>
#include <vector>

namespace rabitex {

struct SpectrumResult {
    std::vector<double> levels;  // lowest L eigenvalues, ascending
    Eigen::MatrixXd vectors;     // matching eigenvectors (columns) in the atom-level-major basis
    int n_max_used{0};
    bool converged{false};
    double residual{0.0};  // max level change over the last doubling
};

class AmbiguousParity : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExactOptions {
    int n_max_start{64};
    int n_max_limit{4096};
};

// Lowest L levels at a fixed truncation.
SpectrumResult diagonalize(const RabiParams& params, int n_max, int L);

// Doubles n_max from 64 until the lowest L levels move by less than tol.
// Returns converged = false instead of throwing when n_max would pass the limit.
SpectrumResult exact_levels(const RabiParams& params, int L, double tol = 1e-10,
                            const ExactOptions& options = {});

// +1 / -1 per level from <Pi> in its eigenvector; |<Pi>| must exceed 0.999.
std::vector<int> parity_resolve(const RabiParams& params, const SpectrumResult& spectrum);

struct ParityLevel {
    double energy{0.0};
    int index{0};  // position in the full ascending spectrum
    SpectrumResult spectrum;
};

// Lowest level carrying the requested parity.
ParityLevel lowest_level_with_parity(const RabiParams& params, int parity, double tol = 1e-10,
                                     const ExactOptions& options = {});

}  // namespace rabitex
