#pragma once

#include <Eigen/Eigenvalues>

#include <random>
#include <vector>

#include "rbshadow/dense.hpp"

namespace rbshadow::testutil {

// Random CPTP map: K_k = G_k S^{-1/2} with S = sum G^dag G.
inline std::vector<Matrix> random_kraus(int n, int count, std::mt19937_64& gen) {
    const auto d = Eigen::Index{1} << n;
    std::normal_distribution<double> nd;
    std::vector<Matrix> g(static_cast<std::size_t>(count), Matrix(d, d));
    Matrix S = Matrix::Zero(d, d);
    for (auto& m : g) {
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cd(nd(gen), nd(gen));
        S += m.adjoint() * m;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    const Matrix inv_sqrt = es.operatorInverseSqrt();
    for (auto& m : g) m = m * inv_sqrt;
    return g;
}

inline Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& X) {
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    for (const auto& k : kraus) out += k * X * k.adjoint();
    return out;
}

inline Matrix random_unitary(int n, std::mt19937_64& gen) {
    const auto d = Eigen::Index{1} << n;
    std::normal_distribution<double> nd;
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cd(nd(gen), nd(gen));
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ();
}

// Distance modulo global phase.
inline double phase_distance(const Matrix& a, const Matrix& b) {
    const cd overlap = (a.adjoint() * b).trace();
    const cd ph = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cd(1);
    return (a * ph - b).cwiseAbs().maxCoeff();
}

}  // namespace rbshadow::testutil
