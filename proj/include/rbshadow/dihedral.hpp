#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "clifford.hpp"
#include "limits.hpp"
#include "rng.hpp"

namespace rbshadow {

namespace gf2 {

// Rows as bitmasks: (A x)_i = parity(A[i] & x).
using BitMatrix = std::vector<std::uint64_t>;

inline std::uint64_t apply(const BitMatrix& A, std::uint64_t x) {
    std::uint64_t y = 0;
    for (std::size_t i = 0; i < A.size(); ++i) y |= std::uint64_t(parity(A[i] & x)) << i;
    return y;
}

inline BitMatrix identity(int n) {
    BitMatrix I(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) I[i] = 1ULL << i;
    return I;
}

inline BitMatrix multiply(const BitMatrix& A, const BitMatrix& B) {
    const int n = static_cast<int>(A.size());
    BitMatrix C(A.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if ((A[i] >> k) & 1) C[i] ^= B[k];
    return C;
}

inline int rank(BitMatrix A) {
    int r = 0;
    const int n = static_cast<int>(A.size());
    for (int col = 0; col < 64 && r < n; ++col) {
        int piv = -1;
        for (int i = r; i < n; ++i)
            if ((A[i] >> col) & 1) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(A[r], A[piv]);
        for (int i = 0; i < n; ++i)
            if (i != r && ((A[i] >> col) & 1)) A[i] ^= A[r];
        ++r;
    }
    return r;
}

// Row operations (control, target) meaning row_t ^= row_c that reduce A to I.
inline std::vector<std::pair<int, int>> reduce_to_identity(BitMatrix A) {
    const int n = static_cast<int>(A.size());
    std::vector<std::pair<int, int>> ops;
    auto add = [&](int c, int t) {
        A[t] ^= A[c];
        ops.emplace_back(c, t);
    };
    for (int col = 0; col < n; ++col) {
        if (!((A[col] >> col) & 1)) {
            int r = col + 1;
            while (r < n && !((A[r] >> col) & 1)) ++r;
            if (r == n) throw std::invalid_argument("matrix is singular");
            add(r, col);
        }
        for (int r = 0; r < n; ++r)
            if (r != col && ((A[r] >> col) & 1)) add(col, r);
    }
    return ops;
}

inline BitMatrix inverse(const BitMatrix& A) {
    BitMatrix inv = identity(static_cast<int>(A.size()));
    for (auto [c, t] : reduce_to_identity(A)) inv[t] ^= inv[c];
    return inv;
}

}  // namespace gf2

// |x> -> i^{a.x + 2 x^T Q x} |A x + c>, identified modulo global phase.
class DihedralElement {
public:
    DihedralElement() = default;

    DihedralElement(int n, gf2::BitMatrix A, std::uint64_t c, std::vector<std::uint8_t> a, std::vector<std::uint64_t> Q)
        : n_(n), A_(std::move(A)), c_(c), a_(std::move(a)), Q_(std::move(Q)) {
        validate();
    }

    static DihedralElement identity(int n) {
        return DihedralElement(n, gf2::identity(n), 0, std::vector<std::uint8_t>(n, 0), std::vector<std::uint64_t>(n, 0));
    }

    // Builds the canonical tuple from an affine map and an arbitrary phase function (mod 4).
    static DihedralElement from_phase_function(int n, gf2::BitMatrix A, std::uint64_t c, const std::function<int(std::uint64_t)>& f) {
        const int f0 = f(0);
        std::vector<int> fe(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> a(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            fe[i] = f(1ULL << i);
            a[i] = static_cast<std::uint8_t>((fe[i] - f0) & 3);
        }
        std::vector<std::uint64_t> Q(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const int q = (f((1ULL << i) | (1ULL << j)) - fe[i] - fe[j] + f0) & 3;
                if (q & 1) throw std::logic_error("phase function is not of dihedral form");
                if (q) Q[i] |= 1ULL << j;
            }
        return DihedralElement(n, std::move(A), c, std::move(a), std::move(Q));
    }

    int n() const { return n_; }
    const gf2::BitMatrix& A() const { return A_; }
    std::uint64_t c() const { return c_; }
    const std::vector<std::uint8_t>& a() const { return a_; }
    const std::vector<std::uint64_t>& Q() const { return Q_; }

    int phase(std::uint64_t x) const {
        int p = 0;
        for (int i = 0; i < n_; ++i)
            if ((x >> i) & 1) p += a_[i] + 2 * parity(Q_[i] & x);
        return p & 3;
    }

    std::uint64_t map(std::uint64_t x) const { return gf2::apply(A_, x) ^ c_; }

    // (this * rhs): rhs acts first.
    DihedralElement compose(const DihedralElement& rhs) const {
        if (rhs.n_ != n_) throw std::invalid_argument("qubit count mismatch");
        return from_phase_function(n_, gf2::multiply(A_, rhs.A_), gf2::apply(A_, rhs.c_) ^ c_,
                                   [&](std::uint64_t x) { return rhs.phase(x) + phase(rhs.map(x)); });
    }

    DihedralElement inverse() const {
        const auto Ainv = gf2::inverse(A_);
        return from_phase_function(n_, Ainv, gf2::apply(Ainv, c_),
                                   [&](std::uint64_t y) { return -phase(gf2::apply(Ainv, y ^ c_)); });
    }

    bool is_identity() const { return *this == identity(n_); }

    // Clifford tableau of the same unitary.
    CliffordElement promote() const {
        const auto Ainv = gf2::inverse(A_);
        auto image = [&](std::uint64_t s, std::uint64_t zz) {
            auto mu = [&](std::uint64_t y) {
                const std::uint64_t x = gf2::apply(Ainv, y ^ c_);
                return (2 * parity(zz & x) + phase(x ^ s) - phase(x)) & 3;
            };
            const int k = mu(0);
            std::uint64_t zp = 0;
            for (int j = 0; j < n_; ++j)
                if (((mu(1ULL << j) - k) & 3) == 2) zp |= 1ULL << j;
            return to_signed(PhasedPauli{gf2::apply(A_, s), zp, k}, n_);
        };
        std::vector<SignedPauli> rows(2 * static_cast<std::size_t>(n_));
        for (int q = 0; q < n_; ++q) {
            rows[q] = image(1ULL << q, 0);
            rows[n_ + q] = image(0, 1ULL << q);
        }
        return CliffordElement::from_images(std::move(rows));
    }

    // Time-ordered circuit over {S, Sdg, CX, X}: phases, then the linear map, then the shift.
    Circuit compile() const {
        Circuit circ;
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < a_[i]; ++k) circ.push_back({GateKind::S, i});
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if ((Q_[i] >> j) & 1) {
                    circ.push_back({GateKind::S, i});
                    circ.push_back({GateKind::S, j});
                    circ.push_back({GateKind::CX, i, j});
                    circ.push_back({GateKind::Sdg, j});
                    circ.push_back({GateKind::CX, i, j});
                }
        const auto ops = gf2::reduce_to_identity(A_);
        for (auto it = ops.rbegin(); it != ops.rend(); ++it) circ.push_back({GateKind::CX, it->first, it->second});
        for (int i = 0; i < n_; ++i)
            if ((c_ >> i) & 1) circ.push_back({GateKind::X, i});
        return circ;
    }

    friend bool operator==(const DihedralElement&, const DihedralElement&) = default;

private:
    void validate() const {
        if (n_ < 1 || n_ > kMaxPauliQubits) throw std::invalid_argument("qubit count out of range");
        const auto N = static_cast<std::size_t>(n_);
        if (A_.size() != N || a_.size() != N || Q_.size() != N) throw std::invalid_argument("component sizes must equal n");
        const std::uint64_t full = n_ == 64 ? ~0ULL : (1ULL << n_) - 1;
        for (int i = 0; i < n_; ++i) {
            if (A_[i] & ~full) throw std::invalid_argument("A has bits beyond n");
            if (a_[i] > 3) throw std::invalid_argument("linear phase must be in Z4");
            if (Q_[i] & ~(full & ~((2ULL << i) - 1))) throw std::invalid_argument("Q must be strictly upper triangular");
        }
        if (c_ & ~full) throw std::invalid_argument("shift has bits beyond n");
        if (gf2::rank(A_) != n_) throw std::invalid_argument("A is not invertible");
    }

    int n_ = 0;
    gf2::BitMatrix A_;
    std::uint64_t c_ = 0;
    std::vector<std::uint8_t> a_;
    std::vector<std::uint64_t> Q_;
};

inline DihedralElement sample_dihedral(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    require_cap(n, limits().dense_state_qubits, "sample_dihedral");
    gf2::BitMatrix A(static_cast<std::size_t>(n));
    do
        for (auto& row : A) row = rng.bits(n);
    while (gf2::rank(A) != n);
    const std::uint64_t c = rng.bits(n);
    std::vector<std::uint8_t> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = static_cast<std::uint8_t>(rng.bits(2));
    std::vector<std::uint64_t> Q(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) Q[i] = rng.bits(n - i - 1) << (i + 1);
    return DihedralElement(n, std::move(A), c, std::move(a), std::move(Q));
}

inline Matrix unitary_of(const DihedralElement& k) {
    require_cap(k.n(), limits().dense_state_qubits, "unitary_of");
    const auto d = Eigen::Index{1} << k.n();
    Matrix U = Matrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) U(static_cast<Eigen::Index>(k.map(x)), x) = i_pow(k.phase(x));
    return U;
}

}  // namespace rbshadow
