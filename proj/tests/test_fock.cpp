#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "rabitex/fock.hpp"

#include <cmath>

using namespace rabitex;

namespace {

double energy(const RabiParams& p, const TrialSpec& spec, int n_max) {
    const StateVector psi = trial_state(spec, FockConfig{n_max});
    return psi.dot(build_hamiltonian(p, FockConfig{n_max}) * psi);
}

}  // namespace

TEST_CASE("params validation rejects the non-canonical quadrant") {
    auto check = [](double w0, double w, double g) { RabiParams{w0, w, g}.validate(); };
    CHECK_NOTHROW(check(1.0, 1.0, 0.5));
    CHECK_THROWS_AS(check(-1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(check(1.0, -1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(check(1.0, 1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(check(1.0, NAN, 0.5), std::invalid_argument);
}

TEST_CASE("default truncation follows the occupation margin") {
    CHECK(default_n_max(0.0) == 32);
    CHECK(default_n_max(10.0) == static_cast<int>(std::ceil(100 + 10 * std::sqrt(101.0) + 20)));
    CHECK(default_n_max(-10.0) == default_n_max(10.0));
}

TEST_CASE("hamiltonian matches the Kronecker-product construction") {
    for (const RabiParams p : {RabiParams{1, 1, 0}, RabiParams{1, 1, 0.7}, RabiParams{0.3, 2.0, 1.9},
                               RabiParams{0, 1, 1}}) {
        for (int n_max : {1, 5, 17}) {
            const Eigen::MatrixXd H = build_hamiltonian(p, FockConfig{n_max});
            CHECK((H - oracle::hamiltonian(p, n_max)).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(H == H.transpose());
        }
    }
}

TEST_CASE("decoupled spectrum at n_max = 1") {
    const Eigen::MatrixXd H = build_hamiltonian(RabiParams{1, 1, 0}, FockConfig{1});
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues();
    CHECK(ev[0] == doctest::Approx(-0.5));
    CHECK(ev[1] == doctest::Approx(0.5));
    CHECK(ev[2] == doctest::Approx(0.5));
    CHECK(ev[3] == doctest::Approx(1.5));
}

TEST_CASE("zero gap ground state is -4 g^2 / omega") {
    const Eigen::MatrixXd H = build_hamiltonian(RabiParams{0, 1, 1}, FockConfig{120});
    const double e0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues()[0];
    CHECK(std::abs(e0 + 4.0) < 1e-10);
}

TEST_CASE("matrix-free operator and chain form reproduce the dense matrix") {
    std::mt19937 rng(7);
    const RabiParams p{0.8, 1.3, 0.9};
    const int N = 23;
    const RabiOperator op(p, N);
    const Eigen::MatrixXd H = build_hamiltonian(p, FockConfig{N});
    const Eigen::VectorXd v = oracle::random_unit(op.dim(), rng);
    Eigen::VectorXd out;
    op.apply(v, out, 0.37);
    CHECK((out - (H * v - 0.37 * v)).cwiseAbs().maxCoeff() < 1e-13);

    const TridiagonalForm t = op.tridiagonal();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(op.dim(), op.dim());
    T.diagonal() = t.diag;
    for (Eigen::Index i = 0; i + 1 < op.dim(); ++i) T(i, i + 1) = T(i + 1, i) = t.offdiag[i];
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(op.dim(), op.dim());
    for (Eigen::Index i = 0; i < op.dim(); ++i) P(t.to_basis[static_cast<std::size_t>(i)], i) = 1.0;
    CHECK((P * T * P.transpose() - H).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(t.offdiag[N] == 0.0);
}

TEST_CASE("windowed operator is the projection of the dense matrix") {
    std::mt19937 rng(8);
    const RabiParams p{0.6, 1.1, 0.7};
    const int N = 30, lo = 9, hi = 21, len = hi - lo + 1;
    const RabiOperator op(p, N);
    const Eigen::MatrixXd H = build_hamiltonian(p, FockConfig{N});
    std::vector<Eigen::Index> idx;
    for (int n = lo; n <= hi; ++n) idx.push_back(down_index(N, n));
    for (int n = lo; n <= hi; ++n) idx.push_back(up_index(N, n));
    const Eigen::MatrixXd Hw = H(idx, idx);
    const Eigen::VectorXd v = oracle::random_unit(2 * len, rng);
    Eigen::VectorXd out;
    op.apply_window(v, out, lo, hi, -0.2);
    CHECK((out - (Hw * v + 0.2 * v)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK_THROWS_AS(op.apply_window(v, out, lo, N + 1), std::invalid_argument);
    CHECK_THROWS_AS(op.apply_window(v, out, lo, hi - 1), std::invalid_argument);
}

TEST_CASE("coherent state against the closed form") {
    for (double x : {0.0, 0.3, -1.2, 2.0, 4.5}) {
        const int N = default_n_max(x);
        const Eigen::VectorXd c = coherent_state(x, FockConfig{N});
        CHECK((c - oracle::coherent(x, N)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(std::abs(c.squaredNorm() - 1.0) < 1e-14);
    }
    const Eigen::VectorXd vac = coherent_state(0.0, FockConfig{8});
    CHECK(vac[0] == 1.0);
    CHECK(vac.tail(8).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coherent state mean occupation and vacuum overlap") {
    const int N = 60;
    const Eigen::VectorXd c2 = coherent_state(2.0, FockConfig{N});
    double mean = 0.0;
    for (int n = 0; n <= N; ++n) mean += n * c2[n] * c2[n];
    CHECK(std::abs(mean - 4.0) < 1e-10);

    const double ov = coherent_state(1.0, FockConfig{N}).dot(coherent_state(-1.0, FockConfig{N}));
    CHECK(std::abs(ov - std::exp(-2.0)) < 1e-14);
}

TEST_CASE("coherent state far from the vacuum stays normalized") {
    // e^{-x^2/2} underflows here; the coefficients must not
    const double x = 40.0;
    const Eigen::VectorXd c = coherent_state(x, FockConfig{default_n_max(x)});
    CHECK(std::abs(c.squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("coherent state refuses a too small cutoff") {
    CHECK_THROWS_AS(coherent_state(5.0, FockConfig{20}), TruncationError);
    CHECK_THROWS_AS(default_n_max(1e4), TruncationError);
}

TEST_CASE("displaced matrix elements obey the overlap identity") {
    for (double x : {0.5, 1.0, 2.0, 5.0}) {
        const int N = default_n_max(x) + 10;
        const Eigen::MatrixXd b = oracle::annihilation(N);
        const Eigen::MatrixXd bd = b.transpose();
        for (double x1 : {x, -x}) {
            for (double x2 : {x, -x}) {
                const Eigen::VectorXd c1 = coherent_state(x1, FockConfig{N});
                const Eigen::VectorXd c2 = coherent_state(x2, FockConfig{N});
                Eigen::MatrixXd bdk = Eigen::MatrixXd::Identity(N + 1, N + 1);
                for (int k = 0; k <= 3; ++k) {
                    Eigen::MatrixXd bl = Eigen::MatrixXd::Identity(N + 1, N + 1);
                    for (int l = 0; l <= 3; ++l) {
                        const double num = c1.dot(bdk * bl * c2);
                        const double ref = std::pow(x1, k) * std::pow(x2, l) * std::exp(-0.5 * (x1 - x2) * (x1 - x2));
                        CHECK(std::abs(num - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
                        bl = bl * b;
                    }
                    bdk = bdk * bd;
                }
            }
        }
    }
}

TEST_CASE("parity commutes with the hamiltonian") {
    const int N = 30;
    const Eigen::MatrixXd H = build_hamiltonian(RabiParams{1.0, 0.7, 1.3}, FockConfig{N});
    const Eigen::MatrixXd P = parity_diagonal(N).asDiagonal();
    CHECK((H * P - P * H).cwiseAbs().maxCoeff() == 0.0);
    CHECK((P - oracle::parity(N)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trial states are normalized and carry the right parity") {
    const int N = 80;
    for (double x : {0.0, 1e-7, 0.2, 1.0, 3.0}) {
        for (double y : {-1.2, -0.4, 0.0, 0.3}) {
            for (TrialKind k : {TrialKind::NonSym, TrialKind::PosParity, TrialKind::NegParity}) {
                const StateVector psi = trial_state(TrialSpec{k, x, y}, FockConfig{N});
                CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
            }
            const StateVector p = trial_state(TrialSpec{TrialKind::PosParity, x, y}, FockConfig{N});
            const StateVector n = trial_state(TrialSpec{TrialKind::NegParity, x, y}, FockConfig{N});
            const Eigen::VectorXd par = parity_diagonal(N);
            CHECK((par.cwiseProduct(p) - p).cwiseAbs().maxCoeff() < 1e-14);
            CHECK((par.cwiseProduct(n) + n).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(std::abs(p.dot(n)) < 1e-12);
        }
    }
}

TEST_CASE("non-symmetrized trial at the origin is the decoupled ground state") {
    const StateVector psi = trial_state(TrialSpec{TrialKind::NonSym, 0.0, 0.0}, FockConfig{10});
    CHECK(psi[down_index(10, 0)] == 1.0);
    CHECK(psi.cwiseAbs().sum() == 1.0);
}

TEST_CASE("parity trial states built from the explicit cat combination") {
    // (|x> +- |-x>) normalised, spinor (y, 1) with y on the upper level
    const int N = 60;
    const double x = 0.9, y = -0.6;
    const Eigen::VectorXd a = oracle::coherent(x, N), b = oracle::coherent(-x, N);
    const Eigen::VectorXd even = (a + b).normalized(), odd = (a - b).normalized();
    StateVector p(basis_dim(N)), n(basis_dim(N));
    p << even, y * odd;
    n << odd, y * even;
    CHECK((trial_state(TrialSpec{TrialKind::PosParity, x, y}, FockConfig{N}) - p.normalized()).norm() < 1e-13);
    CHECK((trial_state(TrialSpec{TrialKind::NegParity, x, y}, FockConfig{N}) - n.normalized()).norm() < 1e-13);
}

TEST_CASE("symmetrized trial energy is continuous at x -> 0") {
    const RabiParams p{1.0, 1.0, 0.3};
    for (TrialKind k : {TrialKind::PosParity, TrialKind::NegParity}) {
        for (double y : {-0.8, -0.2, 0.0}) {
            CHECK(std::abs(energy(p, TrialSpec{k, 1e-4, y}, 40) - energy(p, TrialSpec{k, 0.0, y}, 40)) < 1e-6);
        }
    }
}

TEST_CASE("doubling the cutoff leaves trial energies unchanged") {
    const RabiParams p{1.0, 1.0, 2.0};
    for (TrialKind k : {TrialKind::NonSym, TrialKind::PosParity, TrialKind::NegParity}) {
        for (double x : {0.0, 0.5, 2.0, 4.0}) {
            for (double y : {-1.0, -0.5, 0.2}) {
                const int N = default_n_max(x);
                const double e1 = energy(p, TrialSpec{k, x, y}, N);
                const double e2 = energy(p, TrialSpec{k, x, y}, 2 * N);
                CHECK(std::abs(e1 - e2) <= 1e-10 * std::max(1.0, std::abs(e1)));
            }
        }
    }
}

TEST_CASE("trial kind names round trip") {
    for (TrialKind k : {TrialKind::NonSym, TrialKind::PosParity, TrialKind::NegParity}) {
        CHECK(trial_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(trial_kind_from_string("odd"), std::invalid_argument);
}
