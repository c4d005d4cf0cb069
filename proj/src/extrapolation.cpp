#include "rabitex/extrapolation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rabitex {

std::string to_string(Method method) {
    switch (method) {
        case Method::Variational: return "var";
        case Method::CMX: return "cmx";
        case Method::CSM: return "csm";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "var") return Method::Variational;
    if (name == "cmx") return Method::CMX;
    if (name == "csm") return Method::CSM;
    throw std::invalid_argument("unknown method '" + name + "'");
}

bool is_eigenstate(const ConnectedMoments& I) {
    if (I.order() < 2) return false;
    const double spread = std::sqrt(std::max(I.at(2), 0.0));
    return spread < 1e-8 * std::max(1.0, std::abs(I.at(1)));
}

namespace {

EnergyEstimate eigenstate_estimate(const ConnectedMoments& I, Method method, int m) {
    return EnergyEstimate{I.at(1), method, m, 1.0, true};
}

void require_order(const ConnectedMoments& I, int m, const char* who) {
    if (m > I.order()) {
        throw std::invalid_argument(std::string(who) + ": order " + std::to_string(m) +
                                    " needs that many connected moments, have " +
                                    std::to_string(I.order()));
    }
}

}  // namespace

EnergyEstimate cmx_estimate(const ConnectedMoments& I, int m) {
    if (m < 1 || m % 2 == 0) throw std::invalid_argument("cmx_estimate: order must be odd and >= 1");
    require_order(I, m, "cmx_estimate");
    if (m == 1) return EnergyEstimate{I.at(1), Method::CMX, 1, 1.0, false};
    if (is_eigenstate(I)) return eigenstate_estimate(I, Method::CMX, m);

    const int k = (m - 1) / 2;
    Eigen::MatrixXd T(k, k);
    Eigen::VectorXd X(k);
    for (int i = 1; i <= k; ++i) {
        X[i - 1] = I.at(i + 1);
        for (int j = 1; j <= k; ++j) T(i - 1, j - 1) = I.at(i + j + 1);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseAbs();
    const double cond = lam.minCoeff() > 0.0 ? lam.maxCoeff() / lam.minCoeff()
                                             : std::numeric_limits<double>::infinity();
    if (!(cond <= 1e12)) {
        throw SingularMomentMatrix("cmx_estimate: moment matrix condition " + std::to_string(cond));
    }
    const Eigen::VectorXd sol = T.ldlt().solve(X);
    return EnergyEstimate{I.at(1) - X.dot(sol), Method::CMX, m, cond, false};
}

SeriesCoeffs series_revert(const SeriesCoeffs& series, int K) {
    const auto& a = series.a;
    if (K < 1 || K > static_cast<int>(a.size())) {
        throw std::invalid_argument("series_revert: K must be in [1, number of coefficients]");
    }
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (a[0] == 0.0 || std::abs(a[0]) < 1e-14 * scale) {
        throw ZeroLinearTerm("series_revert: vanishing linear coefficient");
    }

    // powers[k][n] = [t^n] (sum a_m t^m)^k for n <= K
    std::vector<std::vector<double>> powers(static_cast<std::size_t>(K) + 1,
                                            std::vector<double>(static_cast<std::size_t>(K) + 1, 0.0));
    for (int n = 1; n <= K; ++n) powers[1][n] = a[n - 1];
    for (int k = 2; k <= K; ++k) {
        for (int n = k; n <= K; ++n) {
            double s = 0.0;
            for (int j = 1; j <= n - k + 1; ++j) s += a[j - 1] * powers[k - 1][n - j];
            powers[k][n] = s;
        }
    }

    SeriesCoeffs out;
    out.a.assign(static_cast<std::size_t>(K), 0.0);
    out.a[0] = 1.0 / a[0];
    double a1_pow = a[0];
    for (int n = 2; n <= K; ++n) {
        a1_pow *= a[0];
        double s = 0.0;
        for (int k = 1; k < n; ++k) s += out.a[k - 1] * powers[k][n];
        out.a[n - 1] = -s / a1_pow;
    }
    return out;
}

EnergyEstimate csm_estimate(const ConnectedMoments& I, int m) {
    if (m < 3) throw std::invalid_argument("csm_estimate: order must be >= 3");
    require_order(I, m, "csm_estimate");
    if (is_eigenstate(I)) return eigenstate_estimate(I, Method::CSM, m);

    // E(t) - I_1 = sum_{j>=1} (-1)^j I_{j+1} t^j / j!
    SeriesCoeffs forward;
    forward.a.resize(static_cast<std::size_t>(m) - 1);
    double factorial = 1.0;
    for (int j = 1; j <= m - 1; ++j) {
        factorial *= j;
        forward.a[j - 1] = ((j % 2 == 0) ? 1.0 : -1.0) * I.at(j + 1) / factorial;
    }
    SeriesCoeffs inverse;
    try {
        inverse = series_revert(forward, m - 1);
    } catch (const ZeroLinearTerm&) {
        return eigenstate_estimate(I, Method::CSM, m);
    }
    const double b_num = inverse.a[m - 3];  // b_{m-2}
    const double b_den = inverse.a[m - 2];  // b_{m-1}
    const double sigma = std::sqrt(std::abs(I.at(2)));
    const double condition = std::abs(b_den) * std::pow(sigma, m);
    if (!(condition >= 1e-12)) {
        throw VanishingDenominator("csm_estimate: |b_" + std::to_string(m - 1) +
                                   "| sigma^m = " + std::to_string(condition));
    }
    // d^k t / dE^k = k! b_k
    const double value = I.at(1) + (m - 2) * b_num / ((m - 1) * b_den);
    return EnergyEstimate{value, Method::CSM, m, condition, false};
}

double e_of_t(const ConnectedMoments& I, double t) {
    double sum = 0.0;
    double term = 1.0;  // (-t)^m / m!
    for (int m = 0; m < I.order(); ++m) {
        sum += term * I.I[m];
        term *= -t / (m + 1);
    }
    return sum;
}

EnergyEstimate extrapolate(const ConnectedMoments& I, Method method, int m) {
    if (m == 1 || method == Method::Variational) {
        if (method == Method::Variational && m != 1) {
            throw std::invalid_argument("extrapolate: the variational estimate has order 1");
        }
        return EnergyEstimate{I.at(1), method, 1, 1.0, false};
    }
    return method == Method::CMX ? cmx_estimate(I, m) : csm_estimate(I, m);
}

}  // namespace rabitex
