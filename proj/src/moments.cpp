#include "rabitex/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rabitex {

namespace {

template <typename Apply>
MomentSet moments_by_powers(const StateVector& state, Apply&& apply, int M, double shift) {
    if (M < 1 || M > kMaxMomentOrder) {
        throw std::invalid_argument("raw_moments: order must be in [1, " +
                                    std::to_string(kMaxMomentOrder) + "]");
    }
    const int depth = (M + 1) / 2;
    std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(depth) + 1);
    v[0] = state;
    for (int k = 1; k <= depth; ++k) apply(v[k - 1], v[k]);

    MomentSet out;
    out.shift = shift;
    out.mu.resize(static_cast<std::size_t>(M));
    for (int p = 1; p <= M; ++p) {
        const int j = p / 2;
        out.mu[p - 1] = v[j].dot(v[p - j]);
    }
    return out;
}

}  // namespace

MomentSet raw_moments(const StateVector& state, const RabiOperator& op, int M, double shift) {
    if (state.size() != op.dim()) throw std::invalid_argument("raw_moments: dimension mismatch");
    // H moves one level per application, so powers up to the needed depth stay inside the
    // support of the state widened by that depth. Amplitudes below 1e-30 of the peak count as zero.
    const int N = op.n_max();
    const Eigen::Index off = N + 1;
    const double cut = 1e-30 * state.cwiseAbs().maxCoeff();
    int lo = N, hi = 0;
    for (int n = 0; n <= N; ++n) {
        if (std::abs(state[n]) > cut || std::abs(state[off + n]) > cut) {
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
    }
    if (lo > hi) lo = hi = 0;
    const int depth = (M + 1) / 2;
    lo = std::max(0, lo - depth);
    hi = std::min(N, hi + depth);
    const Eigen::Index len = hi - lo + 1;
    Eigen::VectorXd window(2 * len);
    window << state.segment(lo, len), state.segment(off + lo, len);
    return moments_by_powers(
        window, [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply_window(in, out, lo, hi, shift); },
        M, shift);
}

MomentSet raw_moments(const StateVector& state, const Eigen::MatrixXd& hamiltonian, int M,
                      double shift) {
    if (state.size() != hamiltonian.rows()) {
        throw std::invalid_argument("raw_moments: dimension mismatch");
    }
    return moments_by_powers(
        state,
        [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
            out.noalias() = hamiltonian * in;
            out -= shift * in;
        },
        M, shift);
}

ConnectedMoments connected_from_raw(const MomentSet& moments) {
    const int M = moments.order();
    if (M < 1) throw std::invalid_argument("connected_from_raw: empty moment set");
    const auto& mu = moments.mu;
    ConnectedMoments out;
    auto& I = out.I;
    I.assign(static_cast<std::size_t>(M), 0.0);
    I[0] = mu[0];
    for (int m = 2; m <= M; ++m) {
        double sum = 0.0;
        double binom = 1.0;  // C(m-1, k)
        for (int k = 0; k <= m - 2; ++k) {
            sum += binom * I[k] * mu[m - k - 2];
            binom = binom * (m - 1 - k) / (k + 1);
        }
        I[m - 1] = mu[m - 1] - sum;
    }
    I[0] += moments.shift;
    return out;
}

TrialMoments trial_moments(const RabiParams& params, const TrialSpec& spec, int M,
                           const MomentOptions& options) {
    int n_max = options.n_max > 0 ? options.n_max : default_n_max(spec.x);

    auto run = [&](int n) {
        const RabiOperator op(params, n);
        const StateVector psi = trial_state(spec, FockConfig{n});
        const double mu1 = raw_moments(psi, op, 1, 0.0).mu[0];
        TrialMoments out;
        out.centered = raw_moments(psi, op, M, mu1);
        out.connected = connected_from_raw(out.centered);
        out.n_max_used = n;
        return out;
    };

    TrialMoments current = run(n_max);
    if (!options.adaptive) return current;

    const double scale = std::max(1.0, std::abs(current.centered.shift));
    while (true) {
        if (2 * n_max > options.n_max_limit) {
            throw TruncationError("trial_moments: moments did not settle below n_max=" +
                                  std::to_string(options.n_max_limit));
        }
        n_max *= 2;
        TrialMoments next = run(n_max);
        const double a = current.centered.mu.back();
        const double b = next.centered.mu.back();
        const double floor = 1e-14 * std::pow(scale, M);
        const bool settled = std::abs(a - b) <= std::max(1e-12 * std::abs(b), floor);
        current = std::move(next);
        if (settled) return current;
    }
}

namespace {

// x^2 coth(x^2), x^2 tanh(x^2) and x / sqrt(1 - e^{-4x^2}) with their small-x limits.
struct CatFactors {
    double x2_coth;
    double x2_tanh;
    double x_over_root;
};

CatFactors cat_factors(double x) {
    const double x2 = x * x;
    if (std::abs(x) < kSmallX) {
        return {1.0 + x2 * x2 / 3.0, x2 * x2, x < 0.0 ? -0.5 : 0.5};
    }
    return {x2 / std::tanh(x2), x2 * std::tanh(x2), x / std::sqrt(-std::expm1(-4.0 * x2))};
}

}  // namespace

std::pair<double, double> analytic_moments_12(const RabiParams& p, const TrialSpec& spec) {
    const double w0 = p.omega0;
    const double w = p.omega;
    const double g = p.g;
    const double x = spec.x;
    const double y = spec.y;
    const double x2 = x * x;
    const double y2 = y * y;
    const double ny = y2 + 1.0;

    if (spec.kind == TrialKind::NonSym) {
        const double mu1 = w * x2 + 8.0 * g * x * y / ny + 0.5 * w0 * (y2 - 1.0) / ny;
        const double mu2 = 0.25 * w0 * w0 + 4.0 * g * g * (1.0 + 4.0 * x2) + w * w * (x2 + x2 * x2) +
                           (8.0 * g * w * x * y * (1.0 + 2.0 * x2) + w0 * w * x2 * (y2 - 1.0)) / ny;
        return {mu1, mu2};
    }

    const CatFactors f = cat_factors(x);
    // (p): y^2 coth + tanh; (n): y^2 tanh + coth; each multiplied by x^2
    const bool pos = spec.kind == TrialKind::PosParity;
    const double a = pos ? f.x2_coth : f.x2_tanh;  // x^2 (coth x^2)^{+-1}
    const double b = pos ? f.x2_tanh : f.x2_coth;  // x^2 (tanh x^2)^{+-1}
    const double sum = y2 * a + b;
    const double diff = y2 * a - b;

    const double mu1 = 0.5 * w0 * (y2 - 1.0) / ny + 8.0 * g * y * f.x_over_root / ny + w * sum / ny;
    const double mu2 = 0.25 * w0 * w0 + w * w * x2 * x2 + 4.0 * g * g * (1.0 + 2.0 * x2) +
                       8.0 * g * w * y * (1.0 + 2.0 * x2) * f.x_over_root / ny + w0 * w * diff / ny +
                       (8.0 * g * g + w * w) * sum / ny;
    return {mu1, mu2};
}

}  // namespace rabitex
