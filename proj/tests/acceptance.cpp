// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exits non-zero when any criterion fails.

#include "rabitex/exact.hpp"
#include "rabitex/extrapolation.hpp"
#include "rabitex/optimize.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace rabitex;

namespace {

struct Criterion {
    int id;
    std::string title;
    bool pass{true};

    void detail(bool ok, const char* fmt, ...) {
        va_list ap;
        va_start(ap, fmt);
        std::printf("    [%s] ", ok ? "ok" : "xx");
        std::vprintf(fmt, ap);
        std::printf("\n");
        va_end(ap);
        pass = pass && ok;
    }
    // Informational line; never affects the verdict.
    static void info(const char* fmt, ...) {
        va_list ap;
        va_start(ap, fmt);
        std::printf("    info: ");
        std::vprintf(fmt, ap);
        std::printf("\n");
        va_end(ap);
    }
};

int failures = 0;

void run(int id, const std::string& title, const std::function<void(Criterion&)>& body) {
    Criterion c{id, title};
    std::printf("criterion %d: %s\n", id, title.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.detail(false, "exception: %s", e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %d %s (%.1f s)\n\n", id, c.pass ? "PASS" : "FAIL", dt);
    std::fflush(stdout);
    if (!c.pass) ++failures;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

double exact_e0(const RabiParams& p) { return exact_levels(p, 1).levels[0]; }
double exact_e1(const RabiParams& p) { return lowest_level_with_parity(p, -1).energy; }

double estimate(const RabiParams& p, TrialKind k, Method m, int order) {
    return estimate_energy(p, k, order == 1 ? Method::Variational : m, order).estimate.value;
}

void compare(Criterion& c, const char* what, double got, double want, double tol) {
    c.detail(std::abs(got - want) <= tol, "%-28s got %.12f  expected %.12f  |diff| %.3e  tol %.0e", what, got, want,
             std::abs(got - want), tol);
}

void strong_coupling(Criterion& c) {
    struct Row {
        double omega;
        double e0_var, e0_csm6, e0_exact, e1_var, e1_csm6;
    };
    const Row rows[] = {{1.0, -100.006250000, -100.006265682, -100.006265704, -100.006250000, -100.006265686},
                        {2.0, -50.001250000, -50.001262703, -50.001262758, -50.001250000, -50.001262703}};
    for (const Row& r : rows) {
        const RabiParams p{1.0, r.omega, 5.0};
        const double e0v = estimate(p, TrialKind::NonSym, Method::Variational, 1);
        const double e06 = estimate(p, TrialKind::NonSym, Method::CSM, 6);
        const double e1v = estimate(p, TrialKind::NegParity, Method::Variational, 1);
        const double e16 = estimate(p, TrialKind::NegParity, Method::CSM, 6);
        const double ex = exact_e0(p);
        std::printf("    omega = %g\n", r.omega);
        compare(c, "E0 variational", e0v, r.e0_var, 1e-6);
        compare(c, "E0 CSM m=6", e06, r.e0_csm6, 1e-6);
        compare(c, "E0 exact", ex, r.e0_exact, 1e-8);
        compare(c, "E1 variational (n)", e1v, r.e1_var, 1e-6);
        compare(c, "E1 CSM m=6 (n)", e16, r.e1_csm6, 1e-6);
        if (r.omega == 1.0) {
            // the reference column reads as if a zero after "100.00" were lost:
            // shifting the fractional part one place restores every entry
            auto shift = [](double v) { return -100.0 + (v + 100.0) / 10.0; };
            Criterion::info("omega=1 column with the fractional part shifted one place:");
            const double pairs[][2] = {{e0v, shift(r.e0_var)}, {e06, shift(r.e0_csm6)}, {ex, shift(r.e0_exact)},
                                       {e1v, shift(r.e1_var)}, {e16, shift(r.e1_csm6)}};
            const char* names[] = {"E0 variational", "E0 CSM m=6", "E0 exact", "E1 variational (n)", "E1 CSM m=6 (n)"};
            for (int i = 0; i < 5; ++i) {
                Criterion::info("  %-20s got %.12f  shifted %.12f  |diff| %.3e", names[i], pairs[i][0], pairs[i][1],
                                std::abs(pairs[i][0] - pairs[i][1]));
            }
        }
    }
}

void excited_level(Criterion& c) {
    const RabiParams p{1.0, 1.0, 0.2};
    const double var = estimate(p, TrialKind::NegParity, Method::Variational, 1);
    const double cmx = estimate(p, TrialKind::NegParity, Method::CMX, 5);
    const double csm = estimate(p, TrialKind::NegParity, Method::CSM, 6);
    const double ex = exact_e1(p);
    compare(c, "E1 variational (n)", var, 0.00324806, 1e-5);
    compare(c, "E1 CMX m=5 (n)", cmx, 0.00233753, 1e-5);
    compare(c, "E1 CSM m=6 (n)", csm, 0.00234135, 1e-5);
    compare(c, "E1 exact", ex, 0.00233675, 1e-5);
    const double rel[3] = {std::abs(var - ex) / std::abs(ex), std::abs(cmx - ex) / std::abs(ex),
                           std::abs(csm - ex) / std::abs(ex)};
    const double want[3] = {0.39, 0.000335, 0.00197};
    const char* names[3] = {"variational", "CMX m=5", "CSM m=6"};
    for (int i = 0; i < 3; ++i) {
        c.detail(std::abs(rel[i] - want[i]) <= 0.1 * want[i], "relative error %-12s %.6g  expected %.6g within 10%%",
                 names[i], rel[i], want[i]);
    }
    Criterion::info("estimates and exact value all sit at ten times the reference numbers:");
    const double got[4] = {var, cmx, csm, ex};
    const double reference[4] = {0.00324806, 0.00233753, 0.00234135, 0.00233675};
    for (int i = 0; i < 4; ++i) {
        Criterion::info("  got %.10f  10 x reference %.8f  |diff| %.2e", got[i], 10 * reference[i],
                        std::abs(got[i] - 10 * reference[i]));
    }
}

void spot_values(Criterion& c) {
    const double gs[2] = {0.3, 0.4};
    const double csm_want[2] = {-0.69761396, -0.87854267};
    const double exact_want[2] = {-0.69761529, -0.87854932};
    for (int i = 0; i < 2; ++i) {
        const RabiParams p{1.0, 1.0, gs[i]};
        const EnergyResult r = estimate_energy(p, TrialKind::PosParity, Method::CSM, 6);
        std::printf("    g = %g\n", gs[i]);
        compare(c, "E0 CSM m=6 (p)", r.estimate.value, csm_want[i], 1e-6);
        compare(c, "E0 exact", exact_e0(p), exact_want[i], 1e-7);
        Criterion::info("selected minimum at (%.6f, %.6f)", r.point.x, r.point.y);
        if (std::abs(r.estimate.value - csm_want[i]) > 1e-6) {
            const StationaryPoint v = variational_optimum(p, TrialKind::PosParity);
            for (const auto& q : stationary_points(p, TrialKind::PosParity, Method::CSM, 6, default_search_box(p))) {
                if (q.hessian_class != HessianClass::Minimum) continue;
                Criterion::info("  minimum (%.6f, %.6f) E %.10f  distance to variational optimum %.4f", q.x, q.y,
                                q.energy, std::hypot(q.x - v.x, q.y - v.y));
            }
        }
    }
}

void envelope(Criterion& c) {
    const std::vector<double> gs = linspace(0.0, 1.0, 101);
    for (double w : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const ContinuationResult r = continue_branch(RabiParams{1.0, w, 0.0}, TrialKind::PosParity, Method::CSM, 6, gs);
        double worst = 0.0, g_worst = 0.0;
        int missing = 0, above = 0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            if (!r.physical.points[i]) {
                ++missing;
                continue;
            }
            const double ex = exact_e0(RabiParams{1.0, w, gs[i]});
            const double rel = std::abs(r.physical.points[i]->energy - ex) / std::abs(ex);
            if (rel >= 1e-4) ++above;
            if (rel > worst) {
                worst = rel;
                g_worst = gs[i];
            }
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.detail(missing == 0 && worst < 1e-4,
                 "(p) omega=%-5g max rel error %.3e at g=%.2f, %d points >= 1e-4, %d undefined, %zu gaps (%.0f s)", w,
                 worst, g_worst, above, missing, r.gaps.size(), dt);
    }
    {
        const ContinuationResult r = continue_branch(RabiParams{1.0, 1.0, 0.0}, TrialKind::NegParity, Method::CSM, 6, gs);
        double worst = 0.0, g_worst = 0.0, e_worst = 0.0;
        int missing = 0, skipped = 0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            if (!r.physical.points[i]) {
                ++missing;
                continue;
            }
            const double ex = exact_e1(RabiParams{1.0, 1.0, gs[i]});
            if (std::abs(ex) < 1e-6) {
                ++skipped;
                continue;
            }
            const double rel = std::abs(r.physical.points[i]->energy - ex) / std::abs(ex);
            if (rel > worst) {
                worst = rel;
                g_worst = gs[i];
                e_worst = ex;
            }
        }
        c.detail(missing == 0 && worst < 1e-2,
                 "(n) omega=1 max rel error %.3e at g=%.2f (E1 exact %.3e), %d excluded, %d undefined", worst, g_worst,
                 e_worst, skipped, missing);
    }
}

void closed_forms(Criterion& c) {
    std::mt19937 rng(20240501);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst3 = 0.0, worst4 = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const ConnectedMoments I{{u(rng), 0.1 + std::abs(u(rng)), u(rng), u(rng)}};
        const double I1 = I.at(1), I2 = I.at(2), I3 = I.at(3), I4 = I.at(4);
        const double f3 = I1 - I2 * I2 / I3;
        const double f4 = I1 + 2 * I2 * I2 * I3 / (I2 * I4 - 3 * I3 * I3);
        worst3 = std::max(worst3, std::abs(csm_estimate(I, 3).value - f3) / std::abs(f3));
        worst4 = std::max(worst4, std::abs(csm_estimate(I, 4).value - f4) / std::abs(f4));
    }
    c.detail(worst3 <= 1e-10, "CSM m=3 vs closed form, 200 vectors: max rel diff %.3e", worst3);
    c.detail(worst4 <= 1e-10, "CSM m=4 vs closed form, 200 vectors: max rel diff %.3e", worst4);
    double worst = 0.0;
    for (double w : {0.5, 1.0, 2.0}) {
        for (double g : {0.01, 0.02, 0.03, 0.04, 0.05}) {
            const RabiParams p{1.0, w, g};
            const double closed = -0.5 - 4 * g * g / (w + 1);
            for (Method m : {Method::CSM, Method::CMX}) {
                worst = std::max(worst, std::abs(EnergySurface(p, TrialKind::NonSym, m, 3)(0.0, 0.0) - closed));
            }
        }
    }
    c.detail(worst <= 1e-10, "order-3 value at the origin vs -w0/2 - 4g^2/(w+w0), g <= 0.05: max diff %.3e", worst);
}

void optimized_point(Criterion& c) {
    const RabiParams p{1.0, 1.0, 5.0};
    const EnergyResult r = estimate_energy(p, TrialKind::NonSym, Method::CSM, 6);
    const double d = std::max(std::abs(r.point.x - 9.99997), std::abs(r.point.y + 0.997364));
    c.detail(d <= 1e-3, "selected minimum (%.6f, %.6f), max coordinate offset from (9.99997, -0.997364) %.3e", r.point.x,
             r.point.y, d);
}

void convergence(Criterion& c) {
    const RabiParams p{1.0, 1.0, 1.0};
    const double ex = exact_e0(p);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last_rel = 0.0;
    for (int m : {1, 3, 4, 5, 6}) {
        const double e = estimate(p, TrialKind::PosParity, Method::CSM, m);
        const double err = std::abs(e - ex);
        Criterion::info("m=%d  E %.10f  |error| %.3e", m, e, err);
        monotone = monotone && err <= prev;
        prev = err;
        last_rel = err / std::abs(ex);
    }
    c.detail(monotone, "error sequence over m = 1, 3, 4, 5, 6 is non-increasing");
    c.detail(last_rel < 1e-4, "m=6 relative error %.3e < 1e-4", last_rel);
}

void properties(Criterion& c) {
    std::mt19937 rng(7);
    {
        const RabiParams p{1.0, 1.0, 0.8};
        const int N = 40;
        const RabiOperator op(p, N);
        std::normal_distribution<double> nd;
        Eigen::VectorXd v(op.dim());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = nd(rng);
        v.normalize();
        const ConnectedMoments base = connected_from_raw(raw_moments(v, op, 8));
        double worst = 0.0;
        for (double s : {-3.0, 0.5, 10.0}) {
            const ConnectedMoments sh = connected_from_raw(raw_moments(v, op, 8, s));
            for (int k = 2; k <= 8; ++k) {
                worst = std::max(worst, std::abs(sh.at(k) - base.at(k)) / std::max(1.0, std::abs(base.at(k))));
            }
        }
        c.detail(worst < 1e-8, "shift invariance of I_2..I_8: max rel change %.3e", worst);
    }
    {
        double worst = 0.0;
        for (double g : {0.5, 1.0, 2.0}) {
            const ConnectedMoments I =
                trial_moments(RabiParams{0.0, 1.0, g}, TrialSpec{TrialKind::NonSym, 2 * g, -1.0}, 8).connected;
            for (int k = 2; k <= 8; ++k) worst = std::max(worst, std::abs(I.at(k)) / std::pow(4 * g * g, k));
        }
        c.detail(worst < 1e-9, "zero-gap coherent eigenstate: max |I_k| / |E|^k for k >= 2 is %.3e", worst);
    }
    {
        double worst = 0.0;
        for (double w : {0.5, 1.0, 2.0}) {
            for (double g : {0.1, 0.5, 1.0, 3.0}) {
                const RabiParams p{1.0, w, g};
                const double e0 = exact_e0(p), e1 = exact_e1(p);
                for (TrialKind k : {TrialKind::NonSym, TrialKind::PosParity}) {
                    worst = std::max(worst, e0 - estimate(p, k, Method::Variational, 1));
                }
                worst = std::max(worst, e1 - estimate(p, TrialKind::NegParity, Method::Variational, 1));
            }
        }
        c.detail(worst <= 1e-12, "variational estimates never below the exact level: max violation %.3e", worst);
    }
    {
        const int N = 30;
        const Eigen::MatrixXd H = build_hamiltonian(RabiParams{1.0, 0.7, 1.3}, FockConfig{N});
        const Eigen::VectorXd P = parity_diagonal(N);
        const double comm = (H * P.asDiagonal() - P.asDiagonal() * H).cwiseAbs().maxCoeff();
        c.detail(comm == 0.0, "[H, Pi] max entry %.3e", comm);
    }
    {
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> a(6);
            for (double& x : a) x = u(rng);
            a[0] = 0.7 + std::abs(a[0]);
            const SeriesCoeffs b = series_revert(SeriesCoeffs{a}, 6);
            const SeriesCoeffs back = series_revert(b, 6);
            for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(back.a[k] - a[k]) / std::max(1.0, std::abs(a[k])));
        }
        c.detail(worst < 1e-10, "reverting twice returns the series: max rel diff %.3e", worst);
    }
    {
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const ConnectedMoments I{{u(rng), 0.2 + std::abs(u(rng)), u(rng)}};
            const double a = cmx_estimate(I, 3).value, b = csm_estimate(I, 3).value;
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        c.detail(worst < 1e-12, "CMX m=3 vs CSM m=3: max rel diff %.3e", worst);
    }
    {
        double worst = 0.0;
        for (double g : {0.5, 1.0, 2.0, 5.0}) {
            const RabiParams p{0.0, 1.0, g};
            const double ref = -4 * g * g;
            worst = std::max(worst, std::abs(exact_e0(p) - ref) / std::abs(ref));
            worst = std::max(worst, std::abs(estimate(p, TrialKind::NonSym, Method::Variational, 1) - ref) / std::abs(ref));
            for (int m : {3, 4, 5, 6}) {
                worst = std::max(worst, std::abs(estimate(p, TrialKind::NonSym, Method::CSM, m) - ref) / std::abs(ref));
            }
            for (int m : {3, 5}) {
                worst = std::max(worst, std::abs(estimate(p, TrialKind::NonSym, Method::CMX, m) - ref) / std::abs(ref));
            }
        }
        c.detail(worst < 1e-8, "zero-gap limit -4g^2/w, exact and every estimator: max rel diff %.3e", worst);
    }
}

}  // namespace

int main() {
    run(1, "strong-coupling energies (w0 = 1, g = 5, w in {1, 2})", strong_coupling);
    run(2, "excited level (w0 = w = 1, g = 0.2, negative parity)", excited_level);
    run(3, "spot values at g = 0.3 and 0.4 (w0 = w = 1, positive parity)", spot_values);
    run(4, "relative error envelope of the m = 6 sweeps", envelope);
    run(5, "closed-form identities", closed_forms);
    run(6, "optimized point at g = 5", optimized_point);
    run(7, "convergence in m at w0 = w = g = 1", convergence);
    run(8, "property suite", properties);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
