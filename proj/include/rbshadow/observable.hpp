#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clifford.hpp"
#include "dense.hpp"
#include "limits.hpp"

namespace rbshadow {

struct PauliTerm {
    double coeff = 0.0;
    PauliString p;
};

// Hermitian observable, either a real Pauli sum or a dense matrix.
class Observable {
public:
    static Observable pauli_sum(std::string name, int n, const std::vector<PauliTerm>& terms) {
        Observable o;
        o.name_ = std::move(name);
        o.n_ = n;
        std::map<std::pair<std::uint64_t, std::uint64_t>, double> merged;
        for (const auto& t : terms) {
            if (t.p.n != n) throw std::invalid_argument("pauli term has the wrong qubit count");
            if (!std::isfinite(t.coeff)) throw std::invalid_argument("non-finite coefficient");
            merged[{t.p.x, t.p.z}] += t.coeff;
        }
        for (const auto& [xz, c] : merged)
            if (c != 0.0) o.terms_.push_back({c, PauliString{n, xz.first, xz.second}});
        return o;
    }

    static Observable dense(std::string name, const Matrix& m) {
        const int n = qubits_of_dim(m.rows());
        if (m.cols() != m.rows()) throw std::invalid_argument("observable must be square");
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("observable must be Hermitian");
        Observable o;
        o.name_ = std::move(name);
        o.n_ = n;
        o.dense_ = m;
        return o;
    }

    const std::string& name() const { return name_; }
    int n() const { return n_; }
    bool is_pauli() const { return !dense_.has_value(); }
    const std::vector<PauliTerm>& terms() const {
        if (!is_pauli()) throw std::logic_error("dense observable has no stored Pauli terms");
        return terms_;
    }

    double dim() const { return std::pow(2.0, n_); }

    double trace() const {
        if (dense_) return dense_->trace().real();
        for (const auto& t : terms_)
            if (t.p.is_identity()) return t.coeff * dim();
        return 0.0;
    }

    double trace_sq() const {
        if (dense_) return (*dense_ * *dense_).trace().real();
        double s = 0;
        for (const auto& t : terms_) s += t.coeff * t.coeff;
        return s * dim();
    }

    Matrix matrix() const {
        if (dense_) return *dense_;
        require_cap(n_, limits().dense_state_qubits, "observable matrix");
        const auto d = Eigen::Index{1} << n_;
        Matrix m = Matrix::Zero(d, d);
        for (const auto& t : terms_) m += t.coeff * pauli_matrix(t.p);
        return m;
    }

    // Pauli expansion, computing it for dense observables.
    std::vector<PauliTerm> expansion() const {
        if (!dense_) return terms_;
        require_cap(n_, limits().dense_superop_qubits, "dense observable expansion");
        const Vector tr = pauli_traces(*dense_);
        std::vector<PauliTerm> out;
        for (Eigen::Index i = 0; i < tr.size(); ++i) {
            const double c = tr(i).real() / dim();
            if (std::abs(c) > 1e-14) out.push_back({c, PauliString::from_index(n_, static_cast<std::uint64_t>(i))});
        }
        return out;
    }

    double expectation(const Matrix& rho) const { return (matrix() * rho).trace().real(); }

    // <b| U O U^dag |b> with U the Clifford g; dense observables need U's matrix.
    double basis_value(const CliffordElement& g, std::uint64_t b, const Matrix* U = nullptr) const {
        if (g.n() != n_) throw std::invalid_argument("observable dimension mismatch");
        if (dense_) {
            if (!U) throw std::invalid_argument("dense observable needs the unitary");
            const Vector v = U->row(static_cast<Eigen::Index>(b)).adjoint();
            return (v.adjoint() * *dense_ * v)(0, 0).real();
        }
        double s = 0;
        for (const auto& t : terms_) s += t.coeff * pauli_basis_value(g, t.p, b);
        return s;
    }

    // <b| U P U^dag |b> for a Pauli string.
    static double pauli_basis_value(const CliffordElement& g, const PauliString& p, std::uint64_t b) {
        const auto img = g.conjugate(SignedPauli{p, false});
        if (img.p.x != 0) return 0.0;
        return (parity(img.p.z & b) ^ static_cast<int>(img.negative)) ? -1.0 : 1.0;
    }

    std::uint64_t support() const {
        std::uint64_t s = 0;
        for (const auto& t : expansion()) s |= t.p.support();
        return s;
    }

private:
    std::string name_;
    int n_ = 0;
    std::vector<PauliTerm> terms_;
    std::optional<Matrix> dense_;
};

// |GHZ><GHZ| = (1/d) sum over its 2^n stabilizers.
inline Observable ghz_fidelity(int n, std::string name = "ghz-fidelity") {
    if (n < 1 || n > 30) throw std::invalid_argument("ghz fidelity needs 1 <= n <= 30");
    std::vector<PhasedPauli> gens;
    const std::uint64_t full = (1ULL << n) - 1;
    gens.push_back(PhasedPauli{full, 0, 0});
    for (int q = 0; q + 1 < n; ++q) gens.push_back(PhasedPauli{0, (1ULL << q) | (1ULL << (q + 1)), 0});
    std::vector<PauliTerm> terms;
    const double w = std::pow(2.0, -n);
    for (std::uint64_t subset = 0; subset < (1ULL << n); ++subset) {
        PhasedPauli acc{0, 0, 0};
        for (int k = 0; k < n; ++k)
            if ((subset >> k) & 1) acc = raw_multiply(acc, gens[k]);
        const auto s = to_signed(acc, n);
        terms.push_back({s.negative ? -w : w, s.p});
    }
    return Observable::pauli_sum(std::move(name), n, terms);
}

inline Observable parse_pauli_sum(std::string name, int n, const std::vector<std::pair<double, std::string>>& terms) {
    std::vector<PauliTerm> out;
    for (const auto& [c, s] : terms) {
        if (static_cast<int>(s.size()) != n) throw std::invalid_argument("pauli string length differs from n");
        out.push_back({c, PauliString::from_codes(s)});
    }
    return Observable::pauli_sum(std::move(name), n, out);
}

}  // namespace rbshadow
