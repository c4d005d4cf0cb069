// optimize.hpp: stationary trial parameters for order-m energy estimates
//
// For each (x, y) the pipeline trial_state -> moments -> extrapolation gives
// E^(m)(x, y). Order 1 is minimized (variational); higher orders are made
// stationary, and among their minima the one continuously connected to the
// variational optimum is kept as the physical solution.

#pragma once

#include "rabitex/extrapolation.hpp"
#include "rabitex/fock.hpp"
#include "rabitex/moments.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rabitex {

enum class HessianClass { Minimum, Maximum, Saddle, Degenerate };

std::string to_string(HessianClass c);

struct StationaryPoint {
    double x{0.0};
    double y{0.0};
    double energy{0.0};
    Method method{Method::Variational};
    int order{1};
    HessianClass hessian_class{HessianClass::Degenerate};
    double grad_norm{0.0};
    double variance{0.0};  // I_2 of the trial state at (x, y)
    bool flat{false};      // Degenerate with no curvature resolved below zero, or a saddle whose
                           // descent gains less than 1e-10 |E|
    bool eigenstate{false};
};

struct SearchBox {
    double x_lo{0.0};
    double x_hi{1.0};
    double y_lo{-1.5};
    double y_hi{0.5};

    bool contains(double x, double y, double margin = 0.0) const {
        return x >= x_lo - margin && x <= x_hi + margin && y >= y_lo - margin && y <= y_hi + margin;
    }
};

// x in [0, 2g/omega + 1], y in [-1.5, 0.5]
SearchBox default_search_box(const RabiParams& params);

class NoMinimumFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NoPhysicalSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// E^(m)(x, y) for one parameter set. Parity families depend on x only through x^2,
// so they are evaluated at |x|; NaN marks points where the estimator is undefined.
class EnergySurface {
public:
    EnergySurface(const RabiParams& params, TrialKind kind, Method method, int order);

    double operator()(double x, double y) const;
    // Full-precision estimate with the adaptive truncation check.
    EnergyEstimate estimate(double x, double y) const;
    // At least I_1 and I_2, whatever the order.
    ConnectedMoments moments(double x, double y, bool adaptive) const;

    const RabiParams& params() const { return params_; }
    TrialKind kind() const { return kind_; }
    Method method() const { return method_; }
    int order() const { return order_; }

private:
    RabiParams params_;
    TrialKind kind_;
    Method method_;
    int order_;
};

struct SearchOptions {
    int grid{12};                 // starts per axis
    int max_iter{40};
    double newton_step{1e-4};     // relative FD step for the Newton model
    double gradient_step{1e-5};   // relative FD step for the reported gradient
    double grad_tol{1e-8};        // accept when |grad| <= grad_tol max(1, |E|)
    double dedup{1e-6};
};

// Local FD model of a surface at (x, y).
struct LocalModel {
    double value{0.0};
    double gx{0.0};
    double gy{0.0};
    double hxx{0.0};
    double hxy{0.0};
    double hyy{0.0};
    bool ok{false};
};

LocalModel probe(const EnergySurface& surface, double x, double y, double rel_step);
// Central-difference gradient refined once by Richardson extrapolation (h and 2h).
bool refined_gradient(const EnergySurface& surface, double x, double y, double rel_step, double& gx,
                      double& gy);
HessianClass classify(const LocalModel& model);
// Degenerate model whose smallest curvature is not resolved as negative.
bool flat_minimum(const LocalModel& model);

StationaryPoint variational_optimum(const RabiParams& params, TrialKind kind,
                                    const SearchOptions& options = {});

std::vector<StationaryPoint> stationary_points(const RabiParams& params, TrialKind kind, Method method,
                                               int order, const SearchBox& box,
                                               const SearchOptions& options = {});

enum class BranchLabel { Physical, BlindArm };

std::string to_string(BranchLabel label);

struct BranchTrace {
    std::vector<double> g_grid;
    std::vector<std::optional<StationaryPoint>> points;  // aligned with g_grid; empty where undefined
    BranchLabel label{BranchLabel::Physical};
};

// Interval of g over which the physical branch could not be continued.
struct BranchGap {
    double g_from{0.0};
    double g_to{0.0};
};

struct ContinuationOptions {
    SearchOptions search{};
    double capture_min{0.25};
    double capture_factor{3.0};
    double dg_min{1e-4};
    int refined_grid{24};
    int jobs{1};  // parallel scans over grid points; chaining stays sequential
};

struct ContinuationResult {
    BranchTrace physical;
    std::vector<BranchTrace> blind_arms;
    std::vector<BranchGap> gaps;
    std::vector<double> variational_energy;  // aligned with g_grid
};

ContinuationResult continue_branch(const RabiParams& params_base, TrialKind kind, Method method,
                                   int order, const std::vector<double>& g_grid,
                                   const ContinuationOptions& options = {});

struct EnergyResult {
    EnergyEstimate estimate;
    StationaryPoint point;
};

EnergyResult estimate_energy(const RabiParams& params, TrialKind kind, Method method, int order,
                             const SearchOptions& options = {});

}  // namespace rabitex
