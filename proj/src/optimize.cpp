#include "rabitex/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace rabitex {

std::string to_string(HessianClass c) {
    switch (c) {
        case HessianClass::Minimum: return "Minimum";
        case HessianClass::Maximum: return "Maximum";
        case HessianClass::Saddle: return "Saddle";
        case HessianClass::Degenerate: return "Degenerate";
    }
    return "unknown";
}

std::string to_string(BranchLabel label) {
    return label == BranchLabel::Physical ? "Physical" : "BlindArm";
}

SearchBox default_search_box(const RabiParams& params) {
    if (!(params.omega > 0.0)) {
        throw std::invalid_argument("default_search_box: omega must be > 0 (H is unbounded below at omega = 0)");
    }
    return SearchBox{0.0, 2.0 * params.g / params.omega + 1.0, -1.5, 0.5};
}

// ------------------------------- energy surface --------------------------------

EnergySurface::EnergySurface(const RabiParams& params, TrialKind kind, Method method, int order)
    : params_(params), kind_(kind), method_(method), order_(order) {
    params_.validate();
    if (order < 1 || order > kMaxMomentOrder) throw std::invalid_argument("EnergySurface: bad order");
    if (method == Method::Variational && order != 1) {
        throw std::invalid_argument("EnergySurface: the variational method has order 1");
    }
    if (method == Method::CMX && order % 2 == 0) {
        throw std::invalid_argument("EnergySurface: CMX needs an odd order");
    }
    if (method == Method::CSM && order == 2) {
        throw std::invalid_argument("EnergySurface: CSM needs order 1 or >= 3");
    }
}

ConnectedMoments EnergySurface::moments(double x, double y, bool adaptive) const {
    const double xe = kind_ == TrialKind::NonSym ? x : std::abs(x);
    MomentOptions opts;
    opts.adaptive = adaptive;
    return trial_moments(params_, TrialSpec{kind_, xe, y}, std::max(order_, 2), opts).connected;
}

double EnergySurface::operator()(double x, double y) const {
    const double xe = kind_ == TrialKind::NonSym ? x : std::abs(x);
    if (order_ == 1) return analytic_moments_12(params_, TrialSpec{kind_, xe, y}).first;
    try {
        return extrapolate(moments(x, y, false), method_, order_).value;
    } catch (const ExtrapolationError&) {
        return std::numeric_limits<double>::quiet_NaN();
    } catch (const TruncationError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

EnergyEstimate EnergySurface::estimate(double x, double y) const {
    return extrapolate(moments(x, y, true), method_, order_);
}

// ------------------------------- local models ----------------------------------

LocalModel probe(const EnergySurface& f, double x, double y, double rel_step) {
    const double hx = rel_step * std::max(1.0, std::abs(x));
    const double hy = rel_step * std::max(1.0, std::abs(y));
    LocalModel m;
    m.value = f(x, y);
    const double fxp = f(x + hx, y), fxm = f(x - hx, y);
    const double fyp = f(x, y + hy), fym = f(x, y - hy);
    const double fpp = f(x + hx, y + hy), fpm = f(x + hx, y - hy);
    const double fmp = f(x - hx, y + hy), fmm = f(x - hx, y - hy);
    m.ok = std::isfinite(m.value) && std::isfinite(fxp) && std::isfinite(fxm) && std::isfinite(fyp) &&
           std::isfinite(fym) && std::isfinite(fpp) && std::isfinite(fpm) && std::isfinite(fmp) &&
           std::isfinite(fmm);
    if (!m.ok) return m;
    m.gx = (fxp - fxm) / (2.0 * hx);
    m.gy = (fyp - fym) / (2.0 * hy);
    m.hxx = (fxp - 2.0 * m.value + fxm) / (hx * hx);
    m.hyy = (fyp - 2.0 * m.value + fym) / (hy * hy);
    m.hxy = (fpp - fpm - fmp + fmm) / (4.0 * hx * hy);
    return m;
}

bool refined_gradient(const EnergySurface& f, double x, double y, double rel_step, double& gx, double& gy) {
    const double hx = rel_step * std::max(1.0, std::abs(x));
    const double hy = rel_step * std::max(1.0, std::abs(y));
    const double a1 = f(x + hx, y), a2 = f(x - hx, y), a3 = f(x + 2 * hx, y), a4 = f(x - 2 * hx, y);
    const double b1 = f(x, y + hy), b2 = f(x, y - hy), b3 = f(x, y + 2 * hy), b4 = f(x, y - 2 * hy);
    for (double v : {a1, a2, a3, a4, b1, b2, b3, b4}) {
        if (!std::isfinite(v)) return false;
    }
    const double dx1 = (a1 - a2) / (2 * hx), dx2 = (a3 - a4) / (4 * hx);
    const double dy1 = (b1 - b2) / (2 * hy), dy2 = (b3 - b4) / (4 * hy);
    gx = (4.0 * dx1 - dx2) / 3.0;
    gy = (4.0 * dy1 - dy2) / 3.0;
    return true;
}

namespace {

double curvature_tol(const LocalModel& m, const Eigen::Vector2d& lam) {
    // FD noise on the curvature grows like |E| eps / h^2
    return std::max(1e-6 * lam.cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, std::abs(m.value)));
}

Eigen::Vector2d hessian_eigenvalues(const LocalModel& m) {
    Eigen::Matrix2d H;
    H << m.hxx, m.hxy, m.hxy, m.hyy;
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues();
}

}  // namespace

HessianClass classify(const LocalModel& m) {
    const Eigen::Vector2d lam = hessian_eigenvalues(m);
    const double tol = curvature_tol(m, lam);
    if (std::abs(lam[0]) <= tol || std::abs(lam[1]) <= tol) return HessianClass::Degenerate;
    if (lam[0] > 0.0) return HessianClass::Minimum;
    if (lam[1] < 0.0) return HessianClass::Maximum;
    return HessianClass::Saddle;
}

bool flat_minimum(const LocalModel& m) {
    const Eigen::Vector2d lam = hessian_eigenvalues(m);
    return classify(m) == HessianClass::Degenerate && lam[0] >= -curvature_tol(m, lam);
}

namespace {

// Newton direction from the symmetric 2x2 model; near-null curvature directions are skipped.
Eigen::Vector2d newton_step(const LocalModel& m) {
    Eigen::Matrix2d H;
    H << m.hxx, m.hxy, m.hxy, m.hyy;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(H);
    const Eigen::Vector2d g(m.gx, m.gy);
    const double big = eig.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::Vector2d step = Eigen::Vector2d::Zero();
    for (int i = 0; i < 2; ++i) {
        const double lam = eig.eigenvalues()[i];
        if (std::abs(lam) <= 1e-12 * big || big == 0.0) continue;
        const Eigen::Vector2d v = eig.eigenvectors().col(i);
        step -= (v.dot(g) / lam) * v;
    }
    return step;
}

void cap_step(Eigen::Vector2d& step, const SearchBox& box) {
    const double cx = 0.25 * (box.x_hi - box.x_lo);
    const double cy = 0.25 * (box.y_hi - box.y_lo);
    if (cx == 0.0) step[0] = 0.0;
    if (cy == 0.0) step[1] = 0.0;
    const double s = std::max(cx > 0.0 ? std::abs(step[0]) / cx : 0.0, cy > 0.0 ? std::abs(step[1]) / cy : 0.0);
    if (s > 1.0) step /= s;
}

std::vector<std::pair<double, double>> start_grid(const SearchBox& box, int n) {
    std::vector<std::pair<double, double>> starts;
    starts.reserve(static_cast<std::size_t>(n) * n);
    const double dx = (box.x_hi - box.x_lo) / n;
    const double dy = (box.y_hi - box.y_lo) / n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) starts.emplace_back(box.x_lo + (i + 0.5) * dx, box.y_lo + (j + 0.5) * dy);
    }
    return starts;
}

// (x, y) as a stationary point if the refined gradient passes the acceptance test.
// Largest energy drop found by walking both ways along the negative-curvature direction.
double descent_gain(const EnergySurface& f, double x, double y, const LocalModel& m) {
    Eigen::Matrix2d H;
    H << m.hxx, m.hxy, m.hxy, m.hyy;
    const Eigen::Vector2d v = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvectors().col(0);
    double lowest = m.value;
    for (double sign : {-1.0, 1.0}) {
        for (double t = 1e-6; t < 1.0; t *= 2.0) {
            const double e = f(x + sign * t * v[0], y + sign * t * v[1]);
            if (!std::isfinite(e)) break;
            lowest = std::min(lowest, e);
            if (e > m.value && e > lowest + 1e-10 * std::max(1.0, std::abs(m.value))) break;
        }
    }
    return m.value - lowest;
}

std::optional<StationaryPoint> stationary_here(const EnergySurface& f, double x, double y, const SearchOptions& opt) {
    double gx = 0.0, gy = 0.0;
    if (!refined_gradient(f, x, y, opt.gradient_step, gx, gy)) return std::nullopt;
    const LocalModel m = probe(f, x, y, opt.newton_step);
    if (!m.ok) return std::nullopt;

    StationaryPoint p;
    p.x = f.kind() == TrialKind::NonSym ? x : std::abs(x);
    p.y = y;
    p.energy = m.value;
    p.method = f.method();
    p.order = f.order();
    p.grad_norm = std::hypot(gx, gy);
    p.hessian_class = classify(m);
    p.flat = flat_minimum(m);
    if (p.grad_norm > opt.grad_tol * std::max(1.0, std::abs(p.energy))) return std::nullopt;
    // A pair of minima closer than the FD step straddles a ridge this shallow; as an energy it is flat.
    if (p.hessian_class == HessianClass::Saddle) {
        p.flat = descent_gain(f, x, y, m) <= 1e-10 * std::max(1.0, std::abs(p.energy));
    }
    p.variance = f.moments(x, y, false).at(2);
    return p;
}

std::optional<StationaryPoint> newton_from(const EnergySurface& f, double x, double y, const SearchBox& box,
                                           const SearchOptions& opt) {
    const double margin_x = 0.25 * (box.x_hi - box.x_lo);
    const double margin_y = 0.25 * (box.y_hi - box.y_lo);
    auto escaped = [&](double px, double py) {
        return px < box.x_lo - margin_x || px > box.x_hi + margin_x || py < box.y_lo - margin_y ||
               py > box.y_hi + margin_y;
    };

    LocalModel m;
    bool settled = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        m = probe(f, x, y, opt.newton_step);
        if (!m.ok) return std::nullopt;
        Eigen::Vector2d step = newton_step(m);
        cap_step(step, box);
        x += step[0];
        y += step[1];
        if (escaped(x, y)) return std::nullopt;
        if (step.norm() <= 1e-10 * (1.0 + std::abs(x) + std::abs(y))) {
            settled = true;
            break;
        }
    }
    if (!settled) return std::nullopt;

    // polish against the Richardson gradient, reusing the coarse curvature
    double gx = 0.0, gy = 0.0;
    for (int it = 0; it < 4; ++it) {
        if (!refined_gradient(f, x, y, opt.gradient_step, gx, gy)) return std::nullopt;
        LocalModel polish = m;
        polish.gx = gx;
        polish.gy = gy;
        const Eigen::Vector2d step = newton_step(polish);
        const double scale = 1.0 + std::abs(x) + std::abs(y);
        if (step.norm() > 1e-3 * scale) return std::nullopt;
        if (step.norm() <= 1e-13 * scale) break;
        x += step[0];
        y += step[1];
    }
    return stationary_here(f, x, y, opt);
}

// Projected modified-Newton descent with backtracking.
StationaryPoint minimize_from(const EnergySurface& f, double x, double y, const SearchBox& box,
                              const SearchOptions& opt) {
    auto clamp = [&](Eigen::Vector2d p) {
        p[0] = std::clamp(p[0], box.x_lo, box.x_hi);
        p[1] = std::clamp(p[1], box.y_lo, box.y_hi);
        return p;
    };
    Eigen::Vector2d p(x, y);
    double fp = f(p[0], p[1]);
    for (int it = 0; it < 200; ++it) {
        const LocalModel m = probe(f, p[0], p[1], opt.newton_step);
        if (!m.ok) break;
        Eigen::Matrix2d H;
        H << m.hxx, m.hxy, m.hxy, m.hyy;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(H);
        const Eigen::Vector2d g(m.gx, m.gy);
        const double floor = 1e-6 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i) {
            const Eigen::Vector2d v = eig.eigenvectors().col(i);
            d -= (v.dot(g) / std::max(std::abs(eig.eigenvalues()[i]), floor)) * v;
        }
        if (g.dot(d) >= 0.0) d = -g;
        cap_step(d, box);
        double alpha = 1.0;
        Eigen::Vector2d next = p;
        double fn = fp;
        bool moved = false;
        while (alpha > 1e-12) {
            next = clamp(p + alpha * d);
            fn = f(next[0], next[1]);
            if (std::isfinite(fn) && fn < fp) {
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
        const double dist = (next - p).norm();
        p = next;
        fp = fn;
        if (dist <= 1e-12 * (1.0 + p.norm())) break;
    }
    StationaryPoint out;
    out.x = p[0];
    out.y = p[1];
    out.energy = fp;
    out.method = f.method();
    out.order = f.order();
    const LocalModel m = probe(f, p[0], p[1], opt.newton_step);
    out.hessian_class = m.ok ? classify(m) : HessianClass::Degenerate;
    double gx = 0.0, gy = 0.0;
    out.grad_norm = refined_gradient(f, p[0], p[1], opt.gradient_step, gx, gy)
                        ? std::hypot(gx, gy)
                        : std::numeric_limits<double>::infinity();
    return out;
}

StationaryPoint variational_optimum_impl(const RabiParams& params, TrialKind kind, const SearchOptions& opt,
                                         bool allow_nudge) {
    SearchBox box = default_search_box(params);
    // Decoupled case: the displacement only costs energy, so the optimum sits on x = 0.
    if (params.g == 0.0) box.x_hi = box.x_lo;
    const EnergySurface f(params, kind, Method::Variational, 1);
    std::optional<StationaryPoint> best;
    for (const auto& [x0, y0] : start_grid(box, opt.grid)) {
        const StationaryPoint p = minimize_from(f, x0, y0, box, opt);
        if (!std::isfinite(p.energy)) continue;
        if (!best || p.energy < best->energy) best = p;
    }
    if (!best) throw NoMinimumFound("variational_optimum: every local minimization failed");

    // Energy values only pin a minimum down to ~sqrt(eps); the gradient root is much sharper.
    if (auto q = newton_from(f, best->x, best->y, box, opt)) {
        const bool keep = q->hessian_class == HessianClass::Minimum || q->flat;
        if (keep && box.contains(q->x, q->y) &&
            q->energy <= best->energy + 1e-12 * std::max(1.0, std::abs(best->energy))) {
            best = *q;
        }
    }

    // A flat valley (e.g. degenerate levels at g = 0) has no preferred point; take the
    // one reached by continuity from slightly larger g.
    if (best->hessian_class == HessianClass::Degenerate && allow_nudge) {
        RabiParams nudged = params;
        nudged.g += 1e-3 * std::max({params.omega, params.omega0, 1e-3});
        const StationaryPoint seed = variational_optimum_impl(nudged, kind, opt, false);
        StationaryPoint p = minimize_from(f, seed.x, seed.y, box, opt);
        if (std::isfinite(p.energy) && p.energy <= best->energy + 1e-12 * std::max(1.0, std::abs(best->energy))) {
            best = p;
        }
    }
    return *best;
}

double distance(const StationaryPoint& a, double x, double y) { return std::hypot(a.x - x, a.y - y); }

// Minimum nearest to (x, y) within radius; equidistant candidates go to the one
// whose energy is closest to the variational energy. Flat points only count when no strict
// minimum qualifies (tiny g, where the surface is level to within the
// finite-difference noise).
std::optional<StationaryPoint> nearest_minimum(const std::vector<StationaryPoint>& points, double x, double y,
                                               double radius, double variational_energy) {
    auto select = [&](bool flat) {
        std::optional<StationaryPoint> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& p : points) {
            if (flat ? !p.flat : p.hessian_class != HessianClass::Minimum) continue;
            const double d = distance(p, x, y);
            if (d > radius) continue;
            const bool tie = std::abs(d - best_d) <= 1e-12 * (1.0 + d);
            if (!best || (d < best_d && !tie) || (tie && std::abs(p.energy - variational_energy) < std::abs(best->energy - variational_energy))) {
                best = p;
                best_d = std::min(best_d, d);
            }
        }
        return best;
    };
    if (auto p = select(false)) return p;
    return select(true);
}

// When the variational optimum is an exact eigenstate every order reproduces I_1
// and the point is trivially stationary.
std::optional<StationaryPoint> eigenstate_solution(const RabiParams& params, TrialKind kind, Method method,
                                                   int order, const StationaryPoint& var) {
    if (order == 1) return std::nullopt;
    const EnergySurface f(params, kind, method, order);
    const ConnectedMoments I = f.moments(var.x, var.y, false);
    if (!is_eigenstate(I)) return std::nullopt;
    StationaryPoint p = var;
    p.energy = I.at(1);
    p.method = method;
    p.order = order;
    p.eigenstate = true;
    p.variance = I.at(2);
    p.hessian_class = HessianClass::Minimum;
    return p;
}

}  // namespace

StationaryPoint variational_optimum(const RabiParams& params, TrialKind kind, const SearchOptions& options) {
    return variational_optimum_impl(params, kind, options, true);
}

std::vector<StationaryPoint> stationary_points(const RabiParams& params, TrialKind kind, Method method,
                                               int order, const SearchBox& box, const SearchOptions& options) {
    const EnergySurface f(params, kind, method, order);
    std::vector<StationaryPoint> found;
    for (const auto& [x0, y0] : start_grid(box, options.grid)) {
        auto p = newton_from(f, x0, y0, box, options);
        if (!p || !box.contains(p->x, p->y, 1e-6)) continue;
        auto dup = std::find_if(found.begin(), found.end(), [&](const StationaryPoint& q) {
            return distance(q, p->x, p->y) < options.dedup;
        });
        if (dup == found.end()) {
            found.push_back(*p);
        } else if (p->grad_norm < dup->grad_norm) {
            *dup = *p;
        }
    }
    std::sort(found.begin(), found.end(), [](const StationaryPoint& a, const StationaryPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return found;
}

EnergyResult estimate_energy(const RabiParams& params, TrialKind kind, Method method, int order,
                             const SearchOptions& options) {
    params.validate();
    const StationaryPoint var = variational_optimum(params, kind, options);
    const EnergySurface f(params, kind, method, order);
    if (order == 1) {
        StationaryPoint p = var;
        p.method = method;
        const EnergyEstimate est = f.estimate(p.x, p.y);
        p.energy = est.value;
        return {est, p};
    }
    if (auto exact = eigenstate_solution(params, kind, method, order, var)) {
        return {f.estimate(exact->x, exact->y), *exact};
    }
    const SearchBox box = default_search_box(params);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<StationaryPoint> points = stationary_points(params, kind, method, order, box, options);
    // In a flat valley of near-eigenstates the multi-start search can miss the optimum itself.
    if (auto here = stationary_here(f, var.x, var.y, options)) points.push_back(*here);
    auto chosen = nearest_minimum(points, var.x, var.y, inf, var.energy);
    if (!chosen) {
        SearchOptions refined = options;
        refined.grid = 2 * options.grid;
        chosen = nearest_minimum(stationary_points(params, kind, method, order, box, refined), var.x, var.y,
                                  inf, var.energy);
    }
    if (!chosen) {
        throw NoPhysicalSolution("estimate_energy: no minimum of the order-" + std::to_string(order) + " " +
                                 to_string(method) + " estimate in the search box");
    }
    EnergyEstimate est = f.estimate(chosen->x, chosen->y);
    chosen->energy = est.value;
    return {est, *chosen};
}

// ------------------------------- continuation ----------------------------------

namespace {

struct GridScan {
    StationaryPoint variational;
    std::optional<StationaryPoint> exact;  // eigenstate short cut
    std::vector<StationaryPoint> points;
    bool refined{false};
};

RabiParams at_g(const RabiParams& base, double g) {
    RabiParams p = base;
    p.g = g;
    return p;
}

GridScan scan_at(const RabiParams& params, TrialKind kind, Method method, int order, const SearchOptions& opt) {
    GridScan s;
    s.variational = variational_optimum(params, kind, opt);
    if (order == 1) return s;
    s.exact = eigenstate_solution(params, kind, method, order, s.variational);
    if (s.exact) return s;
    s.points = stationary_points(params, kind, method, order, default_search_box(params), opt);
    return s;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

bool same_point(const StationaryPoint& a, const StationaryPoint& b) {
    return std::abs(a.x - b.x) <= 1e-12 && std::abs(a.y - b.y) <= 1e-12;
}

}  // namespace

ContinuationResult continue_branch(const RabiParams& params_base, TrialKind kind, Method method, int order,
                                   const std::vector<double>& g_grid, const ContinuationOptions& options) {
    if (g_grid.empty()) throw std::invalid_argument("continue_branch: empty g grid");
    for (std::size_t i = 1; i < g_grid.size(); ++i) {
        if (!(g_grid[i] > g_grid[i - 1])) throw std::invalid_argument("continue_branch: g grid must ascend");
    }
    const std::size_t N = g_grid.size();
    const SearchOptions& opt = options.search;

    std::vector<GridScan> scans(N);
    parallel_for(N, options.jobs, [&](std::size_t i) {
        scans[i] = scan_at(at_g(params_base, g_grid[i]), kind, method, order, opt);
    });

    ContinuationResult result;
    result.physical.g_grid = g_grid;
    result.physical.points.assign(N, std::nullopt);
    result.physical.label = BranchLabel::Physical;
    result.variational_energy.resize(N);
    for (std::size_t i = 0; i < N; ++i) result.variational_energy[i] = scans[i].variational.energy;

    auto refine = [&](GridScan& s, double g) {
        if (s.refined || s.exact || order == 1) return false;
        SearchOptions fine = opt;
        fine.grid = options.refined_grid;
        s.points = stationary_points(at_g(params_base, g), kind, method, order,
                                     default_search_box(at_g(params_base, g)), fine);
        s.refined = true;
        return true;
    };

    // Candidates must lie within the capture radius of the prediction (continuity);
    // among them the one closest to the variational optimum wins. The scan is
    // complemented by a Newton corrector started at the prediction itself.
    auto pick = [&](const GridScan& s, double g, double px, double py,
                    double radius) -> std::optional<StationaryPoint> {
        if (order == 1) return s.variational;
        if (s.exact) return s.exact;
        std::vector<StationaryPoint> candidates;
        for (const auto& p : s.points) {
            if (distance(p, px, py) <= radius) candidates.push_back(p);
        }
        const EnergySurface f(at_g(params_base, g), kind, method, order);
        const double h = 0.5 * radius;
        if (auto c = newton_from(f, px, py, SearchBox{px - h, px + h, py - h, py + h}, opt)) {
            if (distance(*c, px, py) <= radius) candidates.push_back(*c);
        }
        if (auto c = stationary_here(f, s.variational.x, s.variational.y, opt)) {
            if (distance(*c, px, py) <= radius) candidates.push_back(*c);
        }
        return nearest_minimum(candidates, s.variational.x, s.variational.y,
                               std::numeric_limits<double>::infinity(), s.variational.energy);
    };

    struct Accepted {
        double g;
        StationaryPoint p;
    };
    std::vector<Accepted> history;

    auto reseed = [&](std::size_t i) -> std::optional<StationaryPoint> {
        const GridScan& s = scans[i];
        auto p = pick(s, g_grid[i], s.variational.x, s.variational.y, options.capture_min);
        if (!p && refine(scans[i], g_grid[i])) {
            p = pick(scans[i], g_grid[i], s.variational.x, s.variational.y, options.capture_min);
        }
        return p;
    };

    // A jump of the variational optimum itself breaks continuity; the branch restarts there.
    auto variational_jump = [&](std::size_t i) {
        if (i == 0 || order == 1) return false;
        const StationaryPoint& a = scans[i].variational;
        const StationaryPoint& b = scans[i - 1].variational;
        double step = 0.0;
        if (i >= 2) step = distance(b, scans[i - 2].variational.x, scans[i - 2].variational.y);
        return distance(a, b.x, b.y) > std::max(options.capture_min, options.capture_factor * step);
    };

    for (std::size_t i = 0; i < N; ++i) {
        const double target = g_grid[i];
        if (variational_jump(i)) history.clear();
        if (history.empty()) {
            if (auto p = reseed(i)) {
                result.physical.points[i] = *p;
                history.push_back({target, *p});
            }
            continue;
        }

        double g_try = target;
        while (true) {
            const Accepted& last = history.back();
            double px = last.p.x, py = last.p.y;
            if (history.size() >= 2) {
                const Accepted& prev = history[history.size() - 2];
                const double t = (g_try - last.g) / (last.g - prev.g);
                px += t * (last.p.x - prev.p.x);
                py += t * (last.p.y - prev.p.y);
            }
            const double radius = std::max(options.capture_min, options.capture_factor * std::abs(px - last.p.x));

            std::optional<StationaryPoint> chosen;
            if (g_try == target) {
                chosen = pick(scans[i], target, px, py, radius);
                if (!chosen && refine(scans[i], target)) chosen = pick(scans[i], target, px, py, radius);
            } else {
                chosen = pick(scan_at(at_g(params_base, g_try), kind, method, order, opt), g_try, px, py, radius);
            }

            if (chosen) {
                history.push_back({g_try, *chosen});
                if (g_try == target) {
                    result.physical.points[i] = *chosen;
                    break;
                }
                g_try = target;
                continue;
            }
            const double g_from = history.back().g;
            if (g_try - g_from <= options.dg_min) {
                result.gaps.push_back({g_from, target});
                history.clear();
                if (auto p = reseed(i)) {
                    result.physical.points[i] = *p;
                    history.push_back({target, *p});
                }
                break;
            }
            g_try = g_from + 0.5 * (g_try - g_from);
        }
    }

    // Leftover minima at grid points chained into blind arms by nearest neighbour.
    struct Arm {
        BranchTrace trace;
        std::size_t last{0};
    };
    std::vector<Arm> arms;
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<StationaryPoint> leftovers;
        for (const auto& p : scans[i].points) {
            if (p.hessian_class != HessianClass::Minimum) continue;
            if (result.physical.points[i] && same_point(*result.physical.points[i], p)) continue;
            leftovers.push_back(p);
        }
        std::vector<bool> extended(arms.size(), false);
        for (const auto& p : leftovers) {
            std::size_t best = arms.size();
            double best_d = options.capture_min;
            for (std::size_t a = 0; a < arms.size(); ++a) {
                if (extended[a] || i == 0 || arms[a].last != i - 1) continue;
                const double d = distance(*arms[a].trace.points[i - 1], p.x, p.y);
                if (d <= best_d) {
                    best_d = d;
                    best = a;
                }
            }
            if (best == arms.size()) {
                Arm arm;
                arm.trace.g_grid = g_grid;
                arm.trace.points.assign(N, std::nullopt);
                arm.trace.label = BranchLabel::BlindArm;
                arms.push_back(std::move(arm));
                extended.push_back(false);
            }
            arms[best].trace.points[i] = p;
            arms[best].last = i;
            extended[best] = true;
        }
    }
    for (auto& a : arms) result.blind_arms.push_back(std::move(a.trace));
    return result;
}

}  // namespace rabitex
