#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pauli.hpp"

namespace rbshadow {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cd kI{0.0, 1.0};

inline cd i_pow(int k) {
    switch (k & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
    }
}

namespace detail {

struct LocalLayout {
    std::vector<std::int64_t> offsets;
    std::int64_t mask = 0;
};

inline LocalLayout layout(const std::vector<int>& qubits, std::int64_t dim) {
    LocalLayout l;
    const std::size_t k = qubits.size();
    l.offsets.assign(std::size_t{1} << k, 0);
    for (std::size_t j = 0; j < l.offsets.size(); ++j)
        for (std::size_t b = 0; b < k; ++b)
            if ((j >> b) & 1) l.offsets[j] |= std::int64_t{1} << qubits[b];
    for (int q : qubits) {
        if ((std::int64_t{1} << q) >= dim) throw std::invalid_argument("qubit index out of range");
        if (l.mask & (std::int64_t{1} << q)) throw std::invalid_argument("repeated qubit");
        l.mask |= std::int64_t{1} << q;
    }
    return l;
}

}  // namespace detail

// m <- (op on qubits) * m. Bit b of op's index is qubits[b].
inline void apply_left(Matrix& m, const Matrix& op, const std::vector<int>& qubits) {
    const std::int64_t d = m.rows();
    const auto l = detail::layout(qubits, d);
    const auto K = static_cast<Eigen::Index>(l.offsets.size());
    if (op.rows() != K || op.cols() != K) throw std::invalid_argument("operator size does not match qubit list");
    if (K == 2) {
        const cd a = op(0, 0), b = op(0, 1), c = op(1, 0), e = op(1, 1);
        const std::int64_t off = l.offsets[1];
        for (Eigen::Index col = 0; col < m.cols(); ++col)
            for (std::int64_t r = 0; r < d; ++r) {
                if (r & l.mask) continue;
                const cd u = m(r, col), v = m(r + off, col);
                m(r, col) = a * u + b * v;
                m(r + off, col) = c * u + e * v;
            }
        return;
    }
    Vector buf(K);
    for (Eigen::Index col = 0; col < m.cols(); ++col)
        for (std::int64_t base = 0; base < d; ++base) {
            if (base & l.mask) continue;
            for (Eigen::Index j = 0; j < K; ++j) buf(j) = m(base + l.offsets[j], col);
            const Vector out = op * buf;
            for (Eigen::Index j = 0; j < K; ++j) m(base + l.offsets[j], col) = out(j);
        }
}

// m <- m * (op on qubits)^dagger
inline void apply_right_adjoint(Matrix& m, const Matrix& op, const std::vector<int>& qubits) {
    const std::int64_t d = m.cols();
    const auto l = detail::layout(qubits, d);
    const auto K = static_cast<Eigen::Index>(l.offsets.size());
    if (op.rows() != K || op.cols() != K) throw std::invalid_argument("operator size does not match qubit list");
    if (K == 2) {
        const cd a = std::conj(op(0, 0)), b = std::conj(op(0, 1)), c = std::conj(op(1, 0)), e = std::conj(op(1, 1));
        const std::int64_t off = l.offsets[1];
        for (std::int64_t col = 0; col < d; ++col) {
            if (col & l.mask) continue;
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                const cd u = m(r, col), v = m(r, col + off);
                m(r, col) = u * a + v * b;
                m(r, col + off) = u * c + v * e;
            }
        }
        return;
    }
    const Matrix opc = op.conjugate();
    Eigen::RowVectorXcd buf(K);
    for (std::int64_t base = 0; base < d; ++base) {
        if (base & l.mask) continue;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index j = 0; j < K; ++j) buf(j) = m(r, base + l.offsets[j]);
            const Eigen::RowVectorXcd out = buf * opc.transpose();
            for (Eigen::Index j = 0; j < K; ++j) m(r, base + l.offsets[j]) = out(j);
        }
    }
}

inline void conjugate_local(Matrix& m, const Matrix& op, const std::vector<int>& qubits) {
    apply_left(m, op, qubits);
    apply_right_adjoint(m, op, qubits);
}

// Full 2^n x 2^n matrix of op acting on the listed qubits.
inline Matrix embed(const Matrix& op, const std::vector<int>& qubits, int n) {
    Matrix m = Matrix::Identity(std::int64_t{1} << n, std::int64_t{1} << n);
    apply_left(m, op, qubits);
    return m;
}

inline Matrix pauli_matrix(const PauliString& p) {
    const std::int64_t d = std::int64_t{1} << p.n;
    Matrix m = Matrix::Zero(d, d);
    const cd ph = i_pow(std::popcount(p.x & p.z));
    for (std::int64_t y = 0; y < d; ++y) {
        const double s = parity(p.z & static_cast<std::uint64_t>(y)) ? -1.0 : 1.0;
        m(y ^ static_cast<std::int64_t>(p.x), y) = ph * s;
    }
    return m;
}

inline Matrix pauli_matrix(const SignedPauli& s) {
    Matrix m = pauli_matrix(s.p);
    if (s.negative) m = -m;
    return m;
}

// In-place Walsh-Hadamard transform: f(z) = sum_y (-1)^{z.y} v(y).
inline void walsh_hadamard(Vector& v) {
    const Eigen::Index d = v.size();
    for (Eigen::Index h = 1; h < d; h <<= 1)
        for (Eigen::Index i = 0; i < d; i += 2 * h)
            for (Eigen::Index j = i; j < i + h; ++j) {
                const cd a = v(j), b = v(j + h);
                v(j) = a + b;
                v(j + h) = a - b;
            }
}

// Table from (x, z) masks to the base-4 Pauli index.
inline std::vector<std::uint32_t> xz_to_index_table(int n) {
    const std::uint64_t d = std::uint64_t{1} << n;
    std::vector<std::uint32_t> t(d * d);
    for (std::uint64_t x = 0; x < d; ++x)
        for (std::uint64_t z = 0; z < d; ++z)
            t[x * d + z] = static_cast<std::uint32_t>(PauliString{n, x, z}.index());
    return t;
}

// Tr[P M] for every Pauli string P, indexed base-4.
inline Vector pauli_traces(const Matrix& M) {
    const std::int64_t d = M.rows();
    if (M.cols() != d || !std::has_single_bit(static_cast<std::uint64_t>(d))) throw std::invalid_argument("pauli_traces needs a 2^n square matrix");
    const int n = std::countr_zero(static_cast<std::uint64_t>(d));
    const auto table = xz_to_index_table(n);
    Vector out(d * d);
    Vector v(d);
    for (std::int64_t s = 0; s < d; ++s) {
        for (std::int64_t y = 0; y < d; ++y) v(y) = M(y, y ^ s);
        walsh_hadamard(v);
        for (std::int64_t z = 0; z < d; ++z)
            out(table[static_cast<std::size_t>(s * d + z)]) = i_pow(std::popcount(static_cast<std::uint64_t>(s & z))) * v(z);
    }
    return out;
}

inline int qubits_of_dim(std::int64_t d) {
    if (d < 1 || !std::has_single_bit(static_cast<std::uint64_t>(d))) throw std::invalid_argument("dimension is not a power of two");
    return std::countr_zero(static_cast<std::uint64_t>(d));
}

}  // namespace rbshadow
