#include "cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace rabitex::cli {

std::vector<double> RunConfig::grid(bool allow_default) const {
    if (!has_grid()) {
        if (!allow_default) throw std::invalid_argument("a g-grid (--g-start, --g-stop, --g-count) is required");
        std::vector<double> v;
        for (int i = 0; i <= 100; ++i) v.push_back(i / 100.0);
        return v;
    }
    if (!g_start || !g_stop || !g_count) {
        throw std::invalid_argument("--g-start, --g-stop and --g-count must be given together");
    }
    if (*g_count < 2) throw std::invalid_argument("--g-count must be >= 2");
    if (!(*g_stop > *g_start)) throw std::invalid_argument("--g-stop must exceed --g-start");
    std::vector<double> v;
    for (int i = 0; i < *g_count; ++i) v.push_back(*g_start + (*g_stop - *g_start) * i / (*g_count - 1));
    return v;
}

void RunConfig::validate() const {
    if (g && has_grid()) throw std::invalid_argument("give either --g or a g-grid, not both");
    RabiParams{omega0, omega, g.value_or(0.0)}.validate();
    if (!(omega > 0.0)) throw std::invalid_argument("--omega must be > 0");
    if (g_start && *g_start < 0.0) throw std::invalid_argument("--g-start must be >= 0");
    if (jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    if (method == Method::Variational && order != 1) throw std::invalid_argument("--method var needs --order 1");
    if (method == Method::CMX && (order < 1 || order % 2 == 0)) throw std::invalid_argument("CMX needs an odd order");
    if (method == Method::CSM && (order == 2 || order < 1)) throw std::invalid_argument("CSM needs order 1 or >= 3");
    if (order > kMaxMomentOrder) throw std::invalid_argument("--order exceeds " + std::to_string(kMaxMomentOrder));
    for (double w : omega_list) {
        if (!(w > 0.0)) throw std::invalid_argument("--omega-list entries must be > 0");
    }
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) { return std::stod(format_number(v)); }

Oracle oracle(const RabiParams& params, TrialKind kind, const RunConfig& config) {
    ExactOptions opts;
    opts.n_max_limit = config.exact_n_max_limit;
    opts.n_max_start = std::min(opts.n_max_start, opts.n_max_limit);
    if (kind == TrialKind::NegParity) {
        const ParityLevel l = lowest_level_with_parity(params, -1, config.exact_tol, opts);
        return {l.energy, l.spectrum.converged};
    }
    const SpectrumResult s = exact_levels(params, 1, config.exact_tol, opts);
    return {s.levels[0], s.converged};
}

namespace {

using json = nlohmann::ordered_json;

// Relative error recomputable from the rounded columns it sits next to.
double rel_error(double energy, double exact) {
    const double e = round12(energy), x = round12(exact);
    return std::abs(e - x) / std::abs(x);
}

// Empty where there is no estimate or the exact level is zero.
std::string rel_cell(const std::optional<double>& energy, double exact) {
    if (!energy || round12(exact) == 0.0) return {};
    return format_number(rel_error(*energy, exact));
}

std::optional<double> energy_of(const std::optional<StationaryPoint>& p) {
    return p ? std::optional<double>(p->energy) : std::nullopt;
}

struct Row {
    double g{0.0};
    std::optional<StationaryPoint> point;
    BranchLabel label{BranchLabel::Physical};
    double exact{0.0};
};

struct Sweep {
    std::vector<Row> rows;
    bool oracle_ok{true};
    std::size_t gaps{0};
};

Sweep run_sweep(const RabiParams& base, TrialKind kind, Method method, int order, const std::vector<double>& gs,
                const RunConfig& config, bool with_arms) {
    ContinuationOptions opts;
    opts.jobs = config.jobs;
    const ContinuationResult r = continue_branch(base, kind, method, order, gs, opts);
    Sweep s;
    s.gaps = r.gaps.size();
    std::vector<double> exact(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        RabiParams p = base;
        p.g = gs[i];
        const Oracle o = oracle(p, kind, config);
        exact[i] = o.energy;
        s.oracle_ok = s.oracle_ok && o.converged;
        s.rows.push_back({gs[i], r.physical.points[i], BranchLabel::Physical, o.energy});
    }
    if (with_arms) {
        for (const auto& arm : r.blind_arms) {
            for (std::size_t i = 0; i < gs.size(); ++i) {
                if (arm.points[i]) s.rows.push_back({gs[i], arm.points[i], BranchLabel::BlindArm, exact[i]});
            }
        }
    }
    return s;
}

std::string opt(const std::optional<StationaryPoint>& p, double StationaryPoint::*field) {
    return p ? format_number((*p).*field) : std::string();
}

void write_sweep(std::ostream& out, const Sweep& s, Method method, int order) {
    out << "g,x_opt,y_opt,energy,branch_label,method,order,exact,rel_error\n";
    for (const Row& r : s.rows) {
        out << format_number(r.g) << ',' << opt(r.point, &StationaryPoint::x) << ',' << opt(r.point, &StationaryPoint::y)
            << ',' << opt(r.point, &StationaryPoint::energy) << ',' << to_string(r.label) << ',' << to_string(method)
            << ',' << order << ',' << format_number(r.exact) << ','
            << rel_cell(energy_of(r.point), r.exact) << '\n';
    }
}

RabiParams base_params(const RunConfig& c) { return RabiParams{c.omega0, c.omega, 0.0}; }

double estimate_value(const RabiParams& p, TrialKind kind, Method method, int order) {
    return estimate_energy(p, kind, order == 1 ? Method::Variational : method, order).estimate.value;
}

int reproduce_table1(const RunConfig& c, std::ostream& out) {
    struct Column {
        double e0v, e06, e0x, e1v, e16, e1x;
    };
    std::vector<Column> cols;
    bool ok = true;
    for (double w : {1.0, 2.0}) {
        const RabiParams p{1.0, w, 5.0};
        const Oracle o = oracle(p, TrialKind::NonSym, c);
        const Oracle o1 = oracle(p, TrialKind::NegParity, c);
        ok = ok && o.converged && o1.converged;
        cols.push_back({estimate_value(p, TrialKind::NonSym, Method::Variational, 1),
                        estimate_value(p, TrialKind::NonSym, Method::CSM, 6), o.energy,
                        estimate_value(p, TrialKind::NegParity, Method::Variational, 1),
                        estimate_value(p, TrialKind::NegParity, Method::CSM, 6), o1.energy});
    }
    out << "quantity,omega0=1 omega=1,omega0=1 omega=2\n";
    auto line = [&](const char* name, double Column::*f) {
        out << name << ',' << format_number(cols[0].*f) << ',' << format_number(cols[1].*f) << '\n';
    };
    line("E0_var", &Column::e0v);
    line("E0_csm6", &Column::e06);
    line("E0_exact", &Column::e0x);
    line("E1_var_n", &Column::e1v);
    line("E1_csm6_n", &Column::e16);
    line("E1_exact", &Column::e1x);
    return ok ? kOk : kOracleNotConverged;
}

int reproduce_table2(const RunConfig& c, std::ostream& out) {
    const RabiParams p{1.0, 1.0, 0.2};
    const Oracle o = oracle(p, TrialKind::NegParity, c);
    out << "quantity,estimate,rel_error\n";
    const struct {
        const char* name;
        Method method;
        int order;
    } rows[] = {{"E1_var_n", Method::Variational, 1}, {"E1_cmx5_n", Method::CMX, 5}, {"E1_csm6_n", Method::CSM, 6}};
    for (const auto& r : rows) {
        const double e = estimate_value(p, TrialKind::NegParity, r.method, r.order);
        out << r.name << ',' << format_number(e) << ',' << rel_cell(e, o.energy) << '\n';
    }
    out << "E1_exact," << format_number(o.energy) << ",0\n";
    return o.converged ? kOk : kOracleNotConverged;
}

int reproduce_fig3(const RunConfig& c, std::ostream& out) {
    const RabiParams p{1.0, 1.0, 1.0};
    const Oracle o = oracle(p, TrialKind::PosParity, c);
    out << "method,order,energy,exact,rel_error\n";
    auto row = [&](Method m, int order) {
        const double e = estimate_value(p, TrialKind::PosParity, m, order);
        out << to_string(m) << ',' << order << ',' << format_number(e) << ',' << format_number(o.energy) << ','
            << rel_cell(e, o.energy) << '\n';
    };
    for (int m : {1, 3, 4, 5, 6}) row(Method::CSM, m);
    for (int m : {1, 3, 5}) row(Method::CMX, m);
    out << "exact,," << format_number(o.energy) << ',' << format_number(o.energy) << ",0\n";
    return o.converged ? kOk : kOracleNotConverged;
}

int reproduce_fig4(const RunConfig& c, std::ostream& out) {
    const std::vector<double> gs = c.grid(true);
    out << "omega,g,x_opt,y_opt,energy,exact,rel_error\n";
    bool ok = true;
    for (double w : c.omega_list) {
        const Sweep s = run_sweep(RabiParams{c.omega0, w, 0.0}, TrialKind::PosParity, Method::CSM, 6, gs, c, false);
        ok = ok && s.oracle_ok;
        for (const Row& r : s.rows) {
            out << format_number(w) << ',' << format_number(r.g) << ',' << opt(r.point, &StationaryPoint::x) << ','
                << opt(r.point, &StationaryPoint::y) << ',' << opt(r.point, &StationaryPoint::energy) << ','
                << format_number(r.exact) << ','
                << rel_cell(energy_of(r.point), r.exact) << '\n';
        }
        out.flush();
    }
    return ok ? kOk : kOracleNotConverged;
}

int reproduce_fig5(const RunConfig& c, std::ostream& out) {
    const std::vector<double> gs = c.grid(true);
    const Sweep p = run_sweep(base_params(c), TrialKind::PosParity, Method::CSM, 6, gs, c, false);
    const Sweep n = run_sweep(base_params(c), TrialKind::NegParity, Method::CSM, 6, gs, c, false);
    out << "g,energy_p,exact_p,rel_error_p,energy_n,exact_n,rel_error_n\n";
    auto cells = [&](const Row& r) {
        return opt(r.point, &StationaryPoint::energy) + ',' + format_number(r.exact) + ',' +
               rel_cell(energy_of(r.point), r.exact);
    };
    for (std::size_t i = 0; i < gs.size(); ++i) {
        out << format_number(gs[i]) << ',' << cells(p.rows[i]) << ',' << cells(n.rows[i]) << '\n';
    }
    return p.oracle_ok && n.oracle_ok ? kOk : kOracleNotConverged;
}

}  // namespace

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    config.validate();
    if (!config.g) throw std::invalid_argument("estimate needs --g");
    const RabiParams p{config.omega0, config.omega, *config.g};
    EnergyResult r;
    try {
        r = estimate_energy(p, config.kind, config.method, config.order);
    } catch (const NoPhysicalSolution& e) {
        err << "estimate: optimize stage: " << e.what() << '\n';
        return kNoPhysicalSolution;
    }
    const Oracle o = oracle(p, config.kind, config);
    json j;
    j["omega0"] = p.omega0;
    j["omega"] = p.omega;
    j["g"] = p.g;
    j["kind"] = to_string(config.kind);
    j["method"] = to_string(config.method);
    j["order"] = config.order;
    j["energy"] = round12(r.estimate.value);
    j["x_opt"] = round12(r.point.x);
    j["y_opt"] = round12(r.point.y);
    j["grad_norm"] = round12(r.point.grad_norm);
    j["hessian_class"] = to_string(r.point.hessian_class);
    j["eigenstate"] = r.estimate.eigenstate;
    j["exact"] = round12(o.energy);
    j["exact_converged"] = o.converged;
    j["rel_error"] = round12(rel_error(r.estimate.value, o.energy));
    out << j.dump(2) << '\n';
    if (!o.converged) {
        err << "estimate: exact stage: spectrum not converged below n_max = " << config.exact_n_max_limit << '\n';
        return kOracleNotConverged;
    }
    return kOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
    config.validate();
    const std::vector<double> gs = config.grid(false);
    const Sweep s = run_sweep(base_params(config), config.kind, config.method, config.order, gs, config, true);
    write_sweep(out, s, config.method, config.order);
    if (s.gaps > 0) err << "sweep: " << s.gaps << " gap(s) in the physical branch\n";
    if (!s.oracle_ok) {
        err << "sweep: exact stage: spectrum not converged below n_max = " << config.exact_n_max_limit << '\n';
        return kOracleNotConverged;
    }
    return kOk;
}

int cmd_reproduce(const std::string& target, const RunConfig& config, std::ostream& out, std::ostream& err) {
    config.validate();
    int code = kOk;
    if (target == "table1") {
        code = reproduce_table1(config, out);
    } else if (target == "table2") {
        code = reproduce_table2(config, out);
    } else if (target == "fig3") {
        code = reproduce_fig3(config, out);
    } else if (target == "fig4") {
        code = reproduce_fig4(config, out);
    } else if (target == "fig5") {
        code = reproduce_fig5(config, out);
    } else {
        throw std::invalid_argument("unknown reproduce target '" + target + "'");
    }
    if (code == kOracleNotConverged) err << "reproduce " << target << ": exact stage: spectrum not converged\n";
    return code;
}

}  // namespace rabitex::cli
