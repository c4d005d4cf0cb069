#include "rabitex/exact.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace rabitex {

SpectrumResult diagonalize(const RabiParams& params, int n_max, int L) {
    const RabiOperator op(params, n_max);
    TridiagonalForm t = op.tridiagonal();
    const lapack_int n = static_cast<lapack_int>(t.diag.size());
    if (L < 1 || L > n) throw std::invalid_argument("diagonalize: L out of range");

    // H is an exact permutation of this tridiagonal matrix; the zero link between
    // the two chains lets LAPACK split it, so degenerate levels stay unmixed.
    Eigen::VectorXd d = t.diag;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e.head(n - 1) = t.offdiag;
    lapack_int found = 0;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, L);  // column major
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(L));
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, L, 0.0, &found,
                       w.data(), z.data(), n, isuppz.data());
    if (info != 0 || found != L) {
        throw std::runtime_error("diagonalize: LAPACKE_dstevr failed (info=" + std::to_string(info) + ")");
    }

    SpectrumResult out;
    out.n_max_used = n_max;
    out.levels.assign(w.data(), w.data() + L);
    out.vectors = Eigen::MatrixXd::Zero(n, L);
    for (lapack_int i = 0; i < n; ++i) out.vectors.row(t.to_basis[static_cast<std::size_t>(i)]) = z.row(i);
    out.converged = true;
    return out;
}

SpectrumResult exact_levels(const RabiParams& params, int L, double tol, const ExactOptions& options) {
    params.validate();
    if (L < 1) throw std::invalid_argument("exact_levels: L must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("exact_levels: tol must be > 0");

    int n_max = options.n_max_start;
    SpectrumResult prev = diagonalize(params, n_max, L);
    while (true) {
        if (2 * n_max > options.n_max_limit) {
            prev.converged = false;
            return prev;
        }
        n_max *= 2;
        SpectrumResult next = diagonalize(params, n_max, L);
        double change = 0.0;
        for (int i = 0; i < L; ++i) change = std::max(change, std::abs(next.levels[i] - prev.levels[i]));
        next.residual = change;
        next.converged = change < tol;
        if (next.converged) return next;
        prev = std::move(next);
    }
}

std::vector<int> parity_resolve(const RabiParams& /*params*/, const SpectrumResult& spectrum) {
    if (spectrum.vectors.cols() != static_cast<Eigen::Index>(spectrum.levels.size())) {
        throw std::invalid_argument("parity_resolve: spectrum carries no eigenvectors");
    }
    const Eigen::VectorXd parity = parity_diagonal(spectrum.n_max_used);
    std::vector<int> labels;
    labels.reserve(spectrum.levels.size());
    for (Eigen::Index i = 0; i < spectrum.vectors.cols(); ++i) {
        const auto v = spectrum.vectors.col(i);
        const double p = v.dot(parity.cwiseProduct(v)) / v.squaredNorm();
        if (std::abs(p) <= 0.999) {
            throw AmbiguousParity("parity_resolve: level " + std::to_string(i) + " has <Pi> = " +
                                  std::to_string(p));
        }
        labels.push_back(p > 0.0 ? 1 : -1);
    }
    return labels;
}

ParityLevel lowest_level_with_parity(const RabiParams& params, int parity, double tol, const ExactOptions& options) {
    for (int L = 2; L <= 16; L *= 2) {
        SpectrumResult s = exact_levels(params, L, tol, options);
        const std::vector<int> labels = parity_resolve(params, s);
        for (int i = 0; i < L; ++i) {
            if (labels[i] == parity) return ParityLevel{s.levels[i], i, std::move(s)};
        }
    }
    throw std::runtime_error("lowest_level_with_parity: no level with parity " + std::to_string(parity));
}

}  // namespace rabitex
