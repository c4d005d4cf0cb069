// moments.hpp: raw and connected moments of H in a trial state

#pragma once

#include "rabitex/fock.hpp"

#include <utility>
#include <vector>

namespace rabitex {

inline constexpr int kMaxMomentOrder = 12;

// mu[m] = <psi|(H - shift)^{m+1}|psi>
struct MomentSet {
    std::vector<double> mu;
    double shift{0.0};

    int order() const { return static_cast<int>(mu.size()); }
};

// I[m] = I_{m+1}; I_1 is the variational energy, I_2 the energy variance.
struct ConnectedMoments {
    std::vector<double> I;

    int order() const { return static_cast<int>(I.size()); }
    // 1-based access matching the usual I_k labels.
    double at(int k) const { return I.at(static_cast<std::size_t>(k - 1)); }
};

// Moments by repeated application v_{k+1} = (H - shift) v_k and the symmetric
// split mu_p = <v_{floor(p/2)} | v_{ceil(p/2)}>.
MomentSet raw_moments(const StateVector& state, const RabiOperator& op, int M, double shift = 0.0);
MomentSet raw_moments(const StateVector& state, const Eigen::MatrixXd& hamiltonian, int M,
                      double shift = 0.0);

// Connected-moment recursion. A nonzero shift is restored on I_1 only; I_{m>=2}
// are shift invariant.
ConnectedMoments connected_from_raw(const MomentSet& moments);

struct MomentOptions {
    int n_max{0};         // 0 selects default_n_max(x)
    bool adaptive{true};  // double n_max until the top raw moment settles to 1e-12 relative
    int n_max_limit{8192};
};

struct TrialMoments {
    ConnectedMoments connected;
    MomentSet centered;  // shift = I_1
    int n_max_used{0};
};

// Centered pipeline: mu_1 first, then moments of (H - mu_1), then the recursion.
TrialMoments trial_moments(const RabiParams& params, const TrialSpec& spec, int M,
                           const MomentOptions& options = {});

// Closed-form (mu_1, mu_2) for all three trial families.
std::pair<double, double> analytic_moments_12(const RabiParams& params, const TrialSpec& spec);

}  // namespace rabitex
