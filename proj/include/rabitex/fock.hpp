// fock.hpp: truncated Fock-space realization of the Rabi Hamiltonian and trial states
//
// Basis ordering is atom-level-major: index n (0..n_max) is |down, n>, index
// n_max + 1 + n is |up, n>. The coupling is written with sigma^+ + sigma^- = 2 sigma^x,
// so <up, n+1| H |down, n> = 2 g sqrt(n+1).

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rabitex {

struct RabiParams {
    double omega0{1.0};  // atomic gap
    double omega{1.0};   // boson mode energy
    double g{0.0};       // coupling

    // Throws std::invalid_argument outside the canonical quadrant.
    void validate() const;
};

struct FockConfig {
    int n_max{32};
};

enum class TrialKind { NonSym, PosParity, NegParity };

struct TrialSpec {
    TrialKind kind{TrialKind::NonSym};
    double x{0.0};
    double y{0.0};
};

using StateVector = Eigen::VectorXd;

class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

// Below this |x| the parity-symmetrized states are built from their x -> 0 limit.
inline constexpr double kSmallX = 1e-6;

// max(32, ceil(x^2 + 10 sqrt(x^2 + 1) + 20)).
int default_n_max(double x);

inline Eigen::Index basis_dim(int n_max) { return 2 * (static_cast<Eigen::Index>(n_max) + 1); }
inline Eigen::Index down_index(int /*n_max*/, int n) { return n; }
inline Eigen::Index up_index(int n_max, int n) { return n_max + 1 + n; }

std::string to_string(TrialKind kind);
TrialKind trial_kind_from_string(const std::string& name);

// Symmetric chain form of H: the basis permutation
//   chain A = |d0>, |u1>, |d2>, |u3>, ...   chain B = |u0>, |d1>, |u2>, ...
// turns H into a tridiagonal matrix with a zero link between the two chains.
struct TridiagonalForm {
    Eigen::VectorXd diag;
    Eigen::VectorXd offdiag;             // offdiag[i] couples chain positions i and i+1
    std::vector<Eigen::Index> to_basis;  // chain position -> basis index
};

// Matrix-free application of H. Moments and optimizers use this; build_hamiltonian
// returns the same operator as a dense matrix.
class RabiOperator {
public:
    RabiOperator(const RabiParams& params, int n_max);

    int n_max() const { return n_max_; }
    Eigen::Index dim() const { return basis_dim(n_max_); }
    const RabiParams& params() const { return params_; }

    // out = (H - shift) in
    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out, double shift = 0.0) const;
    // Same, with H projected onto levels lo..hi of both atom blocks. Vectors have
    // length 2 (hi - lo + 1), laid out as the down block followed by the up block.
    void apply_window(const Eigen::VectorXd& in, Eigen::VectorXd& out, int lo, int hi,
                      double shift = 0.0) const;

    TridiagonalForm tridiagonal() const;

private:
    RabiParams params_;
    int n_max_;
    std::vector<double> sqrt_n_;  // sqrt(n) for n = 0..n_max+1
};

// Dense H, assembled entry by entry with both triangles written from the same value.
Eigen::MatrixXd build_hamiltonian(const RabiParams& params, const FockConfig& config);

// Coherent state exp(-x^2/2 + x b^dagger)|0> truncated to n <= n_max.
// Throws TruncationError when the discarded norm exceeds 1e-10.
Eigen::VectorXd coherent_state(double x, const FockConfig& config);

// Normalized trial state for the requested family.
StateVector trial_state(const TrialSpec& spec, const FockConfig& config);

// Diagonal of the parity operator -sigma^z (-1)^{b^dagger b} in the basis above.
Eigen::VectorXd parity_diagonal(int n_max);

double parity_expectation(const StateVector& state, int n_max);

}  // namespace rabitex
