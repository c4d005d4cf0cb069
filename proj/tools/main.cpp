#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace rabitex;
    cli::RunConfig config;

    CLI::App app{"Optimized t-expansion estimates for the quantum Rabi model"};
    app.set_config("--config", "", "key=value file using the flag names; flags given on the command line win");
    app.require_subcommand(1);

    double g = 0, g_start = 0, g_stop = 0;
    int g_count = 0;
    std::string kind = "pparity", method = "csm", output;
    app.add_option("--omega0", config.omega0, "two-level splitting")->capture_default_str();
    app.add_option("--omega", config.omega, "oscillator frequency")->capture_default_str();
    auto* g_opt = app.add_option("--g", g, "coupling (single point)");
    auto* gs_opt = app.add_option("--g-start", g_start, "first grid coupling");
    auto* ge_opt = app.add_option("--g-stop", g_stop, "last grid coupling");
    auto* gc_opt = app.add_option("--g-count", g_count, "grid points");
    app.add_option("--kind", kind, "trial family")
        ->check(CLI::IsMember({"nonsym", "pparity", "nparity"}))
        ->capture_default_str();
    app.add_option("--method", method, "estimator")->check(CLI::IsMember({"var", "cmx", "csm"}))->capture_default_str();
    auto* order_opt = app.add_option("--order", config.order, "expansion order m")->capture_default_str();
    app.add_option("--jobs", config.jobs, "parallel scans over grid points")->capture_default_str();
    app.add_option("--exact-tol", config.exact_tol, "convergence tolerance of the exact levels")->capture_default_str();
    app.add_option("--exact-n-max", config.exact_n_max_limit, "largest Fock cutoff for the exact levels")
        ->capture_default_str();
    app.add_option("--omega-list", config.omega_list, "frequencies for fig4")->delimiter(',');
    app.add_option("-o,--output", output, "write to this file instead of stdout");

    auto* estimate = app.add_subcommand("estimate", "single-point estimate as JSON")->fallthrough();
    auto* sweep = app.add_subcommand("sweep", "g-sweep with branch tracking as CSV")->fallthrough();
    auto* reproduce = app.add_subcommand("reproduce", "tables and figure data as CSV")->fallthrough();
    std::string target;
    reproduce->add_option("target", target, "table1, table2, fig3, fig4 or fig5")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "fig3", "fig4", "fig5"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (g_opt->count()) config.g = g;
        if (gs_opt->count()) config.g_start = g_start;
        if (ge_opt->count()) config.g_stop = g_stop;
        if (gc_opt->count()) config.g_count = g_count;
        config.kind = trial_kind_from_string(kind);
        config.method = method_from_string(method);
        if (config.method == Method::Variational && !order_opt->count()) config.order = 1;

        std::ofstream file;
        if (!output.empty()) {
            file.open(output, std::ios::binary);
            if (!file) throw std::runtime_error("cannot open " + output);
        }
        std::ostream& out = output.empty() ? std::cout : file;

        if (estimate->parsed()) return cli::cmd_estimate(config, out, std::cerr);
        if (sweep->parsed()) return cli::cmd_sweep(config, out, std::cerr);
        return cli::cmd_reproduce(target, config, out, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "rabitex: " << e.what() << '\n';
        return cli::kFailure;
    }
}
