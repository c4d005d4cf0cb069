// extrapolation.hpp: ground-state estimates from connected moments
//
// CMX treats E(t) as a sum of exponentials (odd orders only); CSM works with the
// inverse series t(E) around E = I_1 and takes a ratio of two of its derivatives.

#pragma once

#include "rabitex/moments.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace rabitex {

enum class Method { Variational, CMX, CSM };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct EnergyEstimate {
    double value{0.0};
    Method method{Method::Variational};
    int order{1};
    // CMX: condition number of T_k. CSM: |b_{m-1}| sigma^m with sigma = sqrt(I_2).
    double condition{1.0};
    // Set when the trial state is an eigenstate to working precision; value is I_1.
    bool eigenstate{false};
};

// Formal power series a_1 t + a_2 t^2 + ...; a[0] holds a_1.
struct SeriesCoeffs {
    std::vector<double> a;
};

class ExtrapolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class SingularMomentMatrix : public ExtrapolationError {
public:
    using ExtrapolationError::ExtrapolationError;
};
class ZeroLinearTerm : public ExtrapolationError {
public:
    using ExtrapolationError::ExtrapolationError;
};
class VanishingDenominator : public ExtrapolationError {
public:
    using ExtrapolationError::ExtrapolationError;
};

// True when sqrt(I_2) < 1e-8 max(1, |I_1|).
bool is_eigenstate(const ConnectedMoments& I);

EnergyEstimate cmx_estimate(const ConnectedMoments& I, int m);

// Coefficients b_1..b_K with t = sum b_k E^k whenever E = sum a_m t^m.
SeriesCoeffs series_revert(const SeriesCoeffs& a, int K);

EnergyEstimate csm_estimate(const ConnectedMoments& I, int m);

// Truncated E(t) = sum_{m} (-t)^m I_{m+1} / m!.
double e_of_t(const ConnectedMoments& I, double t);

// Dispatch on method; order 1 is the variational value for every method.
EnergyEstimate extrapolate(const ConnectedMoments& I, Method method, int m);

}  // namespace rabitex
