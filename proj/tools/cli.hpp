// cli.hpp: run configuration and the three subcommands behind the rabitex tool
#pragma once

#include "rabitex/exact.hpp"
#include "rabitex/optimize.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rabitex::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kNoPhysicalSolution = 2, kOracleNotConverged = 3 };

struct RunConfig {
    double omega0{1.0};
    double omega{1.0};
    std::optional<double> g;  // single point
    std::optional<double> g_start;
    std::optional<double> g_stop;
    std::optional<int> g_count;
    TrialKind kind{TrialKind::PosParity};
    Method method{Method::CSM};
    int order{6};
    int jobs{1};
    double exact_tol{1e-10};
    int exact_n_max_limit{4096};
    std::vector<double> omega_list{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};

    bool has_grid() const { return g_start || g_stop || g_count; }
    // The g-grid, or the fallback [0, 1] with 101 points when none was given.
    std::vector<double> grid(bool allow_default) const;
    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

// Fixed 12 significant digits, as written to every output.
std::string format_number(double v);
double round12(double v);

struct Oracle {
    double energy{0.0};
    bool converged{false};
};
// Exact comparison level: the lowest negative-parity level for NegParity, E_0 otherwise.
Oracle oracle(const RabiParams& params, TrialKind kind, const RunConfig& config);

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
// target in {table1, table2, fig3, fig4, fig5}
int cmd_reproduce(const std::string& target, const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace rabitex::cli
