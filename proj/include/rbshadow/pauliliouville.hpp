#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense.hpp"
#include "limits.hpp"

namespace rbshadow {

// Pauli transfer matrix R_PQ = Tr[P L(Q)] / d, basis ordered by base-4 index.
class SuperOp {
public:
    SuperOp() = default;
    SuperOp(int n, RealMatrix m) : n_(n), m_(std::move(m)) {
        const auto D = dim();
        if (m_.rows() != D || m_.cols() != D) throw std::invalid_argument("transfer matrix must be 4^n x 4^n");
    }

    static SuperOp identity(int n) {
        require_cap(n, limits().dense_superop_qubits, "SuperOp");
        const auto D = Eigen::Index{1} << (2 * n);
        return SuperOp(n, RealMatrix::Identity(D, D));
    }

    int n() const { return n_; }
    Eigen::Index dim() const { return Eigen::Index{1} << (2 * n_); }
    const RealMatrix& matrix() const { return m_; }
    RealMatrix& matrix() { return m_; }
    double operator()(Eigen::Index p, Eigen::Index q) const { return m_(p, q); }
    double trace() const { return m_.trace(); }

    // this after other: (A * B) = A o B
    SuperOp operator*(const SuperOp& other) const {
        if (other.n_ != n_) throw std::invalid_argument("qubit count mismatch");
        return SuperOp(n_, m_ * other.m_);
    }
    SuperOp adjoint() const { return SuperOp(n_, m_.transpose()); }

    bool is_trace_preserving(double tol = 1e-10) const {
        if (std::abs(m_(0, 0) - 1.0) > tol) return false;
        for (Eigen::Index q = 1; q < dim(); ++q)
            if (std::abs(m_(0, q)) > tol) return false;
        return true;
    }
    bool is_unital(double tol = 1e-10) const {
        for (Eigen::Index p = 1; p < dim(); ++p)
            if (std::abs(m_(p, 0)) > tol) return false;
        return true;
    }

private:
    int n_ = 0;
    RealMatrix m_;
};

enum class ProjectorLabel { Triv, Adj, Z, Ort, B, Pattern, Custom };

inline std::string to_string(ProjectorLabel l) {
    switch (l) {
    case ProjectorLabel::Triv: return "triv";
    case ProjectorLabel::Adj: return "adj";
    case ProjectorLabel::Z: return "Z";
    case ProjectorLabel::Ort: return "ort";
    case ProjectorLabel::B: return "B";
    case ProjectorLabel::Pattern: return "w";
    default: return "custom";
    }
}

// Diagonal 0/1 projector on the Pauli basis.
struct DiagonalProjector {
    int n = 0;
    ProjectorLabel label = ProjectorLabel::Custom;
    std::uint64_t pattern = 0;  // only meaningful for Pattern
    std::vector<std::uint8_t> mask;

    std::size_t trace() const {
        std::size_t t = 0;
        for (auto b : mask) t += b;
        return t;
    }
    bool contains(std::uint64_t index) const { return mask.at(index) != 0; }

    DiagonalProjector operator&(const DiagonalProjector& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }
    DiagonalProjector operator|(const DiagonalProjector& o) const {
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] && o.mask.at(i)) throw std::invalid_argument("projector sum requires disjoint supports");
        return combine(o, [](bool a, bool b) { return a || b; });
    }
    DiagonalProjector complement() const {
        DiagonalProjector r{n, ProjectorLabel::Custom, 0, mask};
        for (auto& b : r.mask) b = !b;
        return r;
    }
    RealMatrix dense() const {
        RealMatrix m = RealMatrix::Zero(static_cast<Eigen::Index>(mask.size()), static_cast<Eigen::Index>(mask.size()));
        for (std::size_t i = 0; i < mask.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = mask[i];
        return m;
    }

private:
    template <class F>
    DiagonalProjector combine(const DiagonalProjector& o, F f) const {
        if (o.n != n) throw std::invalid_argument("qubit count mismatch");
        DiagonalProjector r{n, ProjectorLabel::Custom, 0, mask};
        for (std::size_t i = 0; i < mask.size(); ++i) r.mask[i] = f(mask[i] != 0, o.mask[i] != 0);
        return r;
    }
};

inline bool is_z_type(const PauliString& p) { return p.x == 0; }

// Pi_triv, Pi_adj, Pi_Z, Pi_ort, B, or Pi_w (strings supported exactly on w).
inline DiagonalProjector build_projector(ProjectorLabel label, int n, std::optional<std::uint64_t> w = std::nullopt) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    require_cap(n, limits().dense_superop_qubits, "projector");
    const std::uint64_t D = std::uint64_t{1} << (2 * n);
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    if (label == ProjectorLabel::Pattern) {
        if (!w) throw std::invalid_argument("pattern projector needs a support pattern");
        if (*w & ~full) throw std::invalid_argument("pattern has bits beyond n");
    } else if (w) {
        throw std::invalid_argument("support pattern given for a non-pattern projector");
    }
    if (label == ProjectorLabel::Custom) throw std::invalid_argument("custom projectors are built by combination");
    DiagonalProjector P{n, label, w.value_or(0), std::vector<std::uint8_t>(D, 0)};
    for (std::uint64_t i = 0; i < D; ++i) {
        const auto s = PauliString::from_index(n, i);
        bool in = false;
        switch (label) {
        case ProjectorLabel::Triv: in = s.is_identity(); break;
        case ProjectorLabel::Adj: in = !s.is_identity(); break;
        case ProjectorLabel::Z: in = is_z_type(s) && !s.is_identity(); break;
        case ProjectorLabel::Ort: in = !is_z_type(s); break;
        case ProjectorLabel::B: in = is_z_type(s); break;
        case ProjectorLabel::Pattern: in = s.support() == *w; break;
        default: break;
        }
        P.mask[i] = in;
    }
    return P;
}

// P * L, i.e. rows outside the projector zeroed.
inline SuperOp apply_diagonal(const DiagonalProjector& P, const SuperOp& L) {
    if (P.n != L.n()) throw std::invalid_argument("qubit count mismatch");
    RealMatrix m = L.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (!P.mask[static_cast<std::size_t>(r)]) m.row(r).setZero();
    return SuperOp(L.n(), std::move(m));
}

inline double projected_trace(const DiagonalProjector& P, const SuperOp& L) {
    if (P.n != L.n()) throw std::invalid_argument("qubit count mismatch");
    double t = 0;
    for (Eigen::Index i = 0; i < L.dim(); ++i)
        if (P.mask[static_cast<std::size_t>(i)]) t += L(i, i);
    return t;
}

// PTM of an arbitrary linear map given as a function on d x d operators.
inline SuperOp ptm_from_map(int n, const std::function<Matrix(const Matrix&)>& map) {
    require_cap(n, limits().dense_superop_qubits, "ptm");
    const auto D = Eigen::Index{1} << (2 * n);
    const double d = static_cast<double>(std::int64_t{1} << n);
    RealMatrix R(D, D);
    for (Eigen::Index q = 0; q < D; ++q) {
        const Matrix out = map(pauli_matrix(PauliString::from_index(n, static_cast<std::uint64_t>(q))));
        const Vector tr = pauli_traces(out);
        for (Eigen::Index p = 0; p < D; ++p) {
            if (std::abs(tr(p).imag()) > 1e-9 * (1 + std::abs(tr(p).real()))) throw std::invalid_argument("map is not Hermiticity preserving");
            R(p, q) = tr(p).real() / d;
        }
    }
    return SuperOp(n, std::move(R));
}

inline void check_kraus(const std::vector<Matrix>& kraus, double tol = 1e-10) {
    if (kraus.empty()) throw std::invalid_argument("empty Kraus list");
    const auto d = kraus.front().rows();
    Matrix s = Matrix::Zero(d, d);
    for (const auto& k : kraus) {
        if (k.rows() != d || k.cols() != d) throw std::invalid_argument("Kraus operators have inconsistent dimensions");
        s += k.adjoint() * k;
    }
    if ((s - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("Kraus operators are not trace preserving");
}

inline SuperOp ptm_from_kraus(const std::vector<Matrix>& kraus) {
    check_kraus(kraus);
    const int n = qubits_of_dim(kraus.front().rows());
    return ptm_from_map(n, [&](const Matrix& X) {
        Matrix out = Matrix::Zero(X.rows(), X.cols());
        for (const auto& k : kraus) out += k * X * k.adjoint();
        return out;
    });
}

inline SuperOp adjoint_ptm(const Matrix& U) {
    const int n = qubits_of_dim(U.rows());
    return ptm_from_map(n, [&](const Matrix& X) { return Matrix(U * X * U.adjoint()); });
}

inline double lambda_Z_of(const SuperOp& L) {
    const double d = static_cast<double>(std::int64_t{1} << L.n());
    return projected_trace(build_projector(ProjectorLabel::Z, L.n()), L) / (d - 1);
}

inline double lambda_adj_of(const SuperOp& L) {
    const double d = static_cast<double>(std::int64_t{1} << L.n());
    return (L.trace() - L(0, 0)) / (d * d - 1);
}

}  // namespace rbshadow
