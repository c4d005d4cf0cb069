#include "rabitex/fock.hpp"

#include <algorithm>
#include <cmath>

namespace rabitex {

void RabiParams::validate() const {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("RabiParams: omega must be finite and >= 0");
    }
    if (!(omega0 >= 0.0) || !std::isfinite(omega0)) {
        throw std::invalid_argument("RabiParams: omega0 must be finite and >= 0");
    }
    if (!(g >= 0.0) || !std::isfinite(g)) {
        throw std::invalid_argument("RabiParams: g must be finite and >= 0");
    }
}

int default_n_max(double x) {
    const double x2 = x * x;
    if (!(x2 < 1e7)) throw TruncationError("default_n_max: |x| too large for a Fock representation");
    const double n = std::ceil(x2 + 10.0 * std::sqrt(x2 + 1.0) + 20.0);
    return std::max(32, static_cast<int>(n));
}

std::string to_string(TrialKind kind) {
    switch (kind) {
        case TrialKind::NonSym: return "nonsym";
        case TrialKind::PosParity: return "pparity";
        case TrialKind::NegParity: return "nparity";
    }
    return "unknown";
}

TrialKind trial_kind_from_string(const std::string& name) {
    if (name == "nonsym") return TrialKind::NonSym;
    if (name == "pparity") return TrialKind::PosParity;
    if (name == "nparity") return TrialKind::NegParity;
    throw std::invalid_argument("unknown trial kind '" + name + "'");
}

RabiOperator::RabiOperator(const RabiParams& params, int n_max) : params_(params), n_max_(n_max) {
    if (n_max < 1) throw std::invalid_argument("RabiOperator: n_max must be >= 1");
    sqrt_n_.resize(static_cast<std::size_t>(n_max) + 2);
    for (std::size_t n = 0; n < sqrt_n_.size(); ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));
}

void RabiOperator::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out, double shift) const {
    apply_window(in, out, 0, n_max_, shift);
}

void RabiOperator::apply_window(const Eigen::VectorXd& in, Eigen::VectorXd& out, int lo, int hi,
                                double shift) const {
    if (lo < 0 || hi > n_max_ || lo > hi) throw std::invalid_argument("RabiOperator: bad level window");
    const Eigen::Index off = hi - lo + 1;
    if (in.size() != 2 * off) throw std::invalid_argument("RabiOperator: dimension mismatch");
    out.resize(2 * off);
    const double* d = in.data();
    const double* u = in.data() + off;
    double* od = out.data();
    double* ou = out.data() + off;
    const double half = 0.5 * params_.omega0;
    const double w = params_.omega;
    const double c = 2.0 * params_.g;
    for (Eigen::Index i = 0; i < off; ++i) {
        const int n = lo + static_cast<int>(i);
        const double level = w * n - shift;
        double cd = 0.0;
        double cu = 0.0;
        if (i > 0) {
            cd += sqrt_n_[n] * u[i - 1];
            cu += sqrt_n_[n] * d[i - 1];
        }
        if (i + 1 < off) {
            cd += sqrt_n_[n + 1] * u[i + 1];
            cu += sqrt_n_[n + 1] * d[i + 1];
        }
        od[i] = (level - half) * d[i] + c * cd;
        ou[i] = (level + half) * u[i] + c * cu;
    }
}

TridiagonalForm RabiOperator::tridiagonal() const {
    const int N = n_max_;
    TridiagonalForm t;
    const Eigen::Index dim = basis_dim(N);
    t.diag.resize(dim);
    t.offdiag.setZero(dim - 1);
    t.to_basis.resize(static_cast<std::size_t>(dim));
    const double half = 0.5 * params_.omega0;
    Eigen::Index pos = 0;
    // chain A starts on |down, 0>, chain B on |up, 0>; levels alternate along each chain
    for (int chain = 0; chain < 2; ++chain) {
        for (int n = 0; n <= N; ++n, ++pos) {
            const bool up = ((n + chain) % 2) == 1;
            t.to_basis[static_cast<std::size_t>(pos)] = up ? up_index(N, n) : down_index(N, n);
            t.diag[pos] = params_.omega * n + (up ? half : -half);
            if (n < N) t.offdiag[pos] = 2.0 * params_.g * sqrt_n_[n + 1];
        }
    }
    return t;
}

Eigen::MatrixXd build_hamiltonian(const RabiParams& params, const FockConfig& config) {
    const int N = config.n_max;
    if (N < 1) throw std::invalid_argument("build_hamiltonian: n_max must be >= 1");
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(basis_dim(N), basis_dim(N));
    for (int n = 0; n <= N; ++n) {
        H(down_index(N, n), down_index(N, n)) = params.omega * n - 0.5 * params.omega0;
        H(up_index(N, n), up_index(N, n)) = params.omega * n + 0.5 * params.omega0;
        if (n < N) {
            const double v = 2.0 * params.g * std::sqrt(static_cast<double>(n + 1));
            // |down, n> <-> |up, n+1>
            H(down_index(N, n), up_index(N, n + 1)) = v;
            H(up_index(N, n + 1), down_index(N, n)) = v;
            // |up, n> <-> |down, n+1>
            H(up_index(N, n), down_index(N, n + 1)) = v;
            H(down_index(N, n + 1), up_index(N, n)) = v;
        }
    }
    return H;
}

Eigen::VectorXd coherent_state(double x, const FockConfig& config) {
    const int N = config.n_max;
    if (N < 1) throw std::invalid_argument("coherent_state: n_max must be >= 1");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N + 1);
    const double ax = std::abs(x);
    if (ax == 0.0) {
        c[0] = 1.0;
        return c;
    }
    // Start at the Poisson peak so e^{-x^2/2} never underflows, then recur outwards.
    const int peak = std::min(N, static_cast<int>(std::floor(ax * ax)));
    const double log_peak =
        -0.5 * ax * ax + peak * std::log(ax) - 0.5 * std::lgamma(static_cast<double>(peak) + 1.0);
    c[peak] = std::exp(log_peak);
    for (int n = peak; n < N; ++n) c[n + 1] = c[n] * ax / std::sqrt(static_cast<double>(n + 1));
    for (int n = peak; n > 0; --n) c[n - 1] = c[n] * std::sqrt(static_cast<double>(n)) / ax;

    const double tail = 1.0 - c.squaredNorm();
    if (tail > 1e-10) {
        throw TruncationError("coherent_state: n_max=" + std::to_string(N) +
                              " too small for x=" + std::to_string(x) +
                              " (discarded norm " + std::to_string(tail) + ")");
    }
    if (x < 0.0) {
        for (int n = 1; n <= N; n += 2) c[n] = -c[n];
    }
    return c;
}

namespace {

// Normalized even and odd cat components (|x> + |-x>) and (|x> - |-x>).
void cat_components(double x, int n_max, Eigen::VectorXd& even, Eigen::VectorXd& odd) {
    even = Eigen::VectorXd::Zero(n_max + 1);
    odd = Eigen::VectorXd::Zero(n_max + 1);
    if (std::abs(x) < kSmallX) {
        even[0] = 1.0;
        odd[1] = x < 0.0 ? -1.0 : 1.0;
        return;
    }
    const Eigen::VectorXd c = coherent_state(x, FockConfig{n_max});
    for (int n = 0; n <= n_max; ++n) {
        if (n % 2 == 0) {
            even[n] = c[n];
        } else {
            odd[n] = c[n];
        }
    }
    even /= even.norm();
    odd /= odd.norm();
}

}  // namespace

StateVector trial_state(const TrialSpec& spec, const FockConfig& config) {
    const int N = config.n_max;
    StateVector psi(basis_dim(N));
    auto down = psi.head(N + 1);
    auto up = psi.tail(N + 1);
    switch (spec.kind) {
        case TrialKind::NonSym: {
            const Eigen::VectorXd c = coherent_state(spec.x, config);
            down = c;
            up = spec.y * c;
            break;
        }
        case TrialKind::PosParity:
        case TrialKind::NegParity: {
            Eigen::VectorXd even, odd;
            cat_components(spec.x, N, even, odd);
            if (spec.kind == TrialKind::PosParity) {
                down = even;
                up = spec.y * odd;
            } else {
                down = odd;
                up = spec.y * even;
            }
            break;
        }
    }
    psi /= psi.norm();
    return psi;
}

Eigen::VectorXd parity_diagonal(int n_max) {
    Eigen::VectorXd p(basis_dim(n_max));
    for (int n = 0; n <= n_max; ++n) {
        const double boson = (n % 2 == 0) ? 1.0 : -1.0;
        p[down_index(n_max, n)] = boson;   // -sigma^z = +1 on the lower level
        p[up_index(n_max, n)] = -boson;
    }
    return p;
}

double parity_expectation(const StateVector& state, int n_max) {
    return state.dot(parity_diagonal(n_max).cwiseProduct(state));
}

}  // namespace rabitex
