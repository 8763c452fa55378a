#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "clifford.hpp"
#include "dihedral.hpp"
#include "pauliliouville.hpp"

namespace rbshadow {

enum class GroupKind { Clifford, Dihedral };

using GroupElement = std::variant<CliffordElement, DihedralElement>;

inline int qubits(const GroupElement& g) {
    return std::visit([](const auto& e) { return e.n(); }, g);
}

inline GroupKind kind_of(const GroupElement& g) {
    return std::holds_alternative<CliffordElement>(g) ? GroupKind::Clifford : GroupKind::Dihedral;
}

inline CliffordElement as_clifford(const GroupElement& g) {
    if (const auto* c = std::get_if<CliffordElement>(&g)) return *c;
    return std::get<DihedralElement>(g).promote();
}

// Same kinds compose natively; a mixed pair is composed after promoting the dihedral side.
inline GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
    if (qubits(g1) != qubits(g2)) throw std::invalid_argument("qubit count mismatch");
    if (kind_of(g1) == GroupKind::Dihedral && kind_of(g2) == GroupKind::Dihedral)
        return std::get<DihedralElement>(g1).compose(std::get<DihedralElement>(g2));
    return as_clifford(g1).compose(as_clifford(g2));
}

inline GroupElement inverse(const GroupElement& g) {
    return std::visit([](const auto& e) -> GroupElement { return e.inverse(); }, g);
}

inline Matrix unitary_of(const GroupElement& g) {
    return std::visit([](const auto& e) { return unitary_of(e); }, g);
}

inline Circuit compile(const GroupElement& g) {
    if (const auto* c = std::get_if<CliffordElement>(&g)) return synthesize(*c);
    return std::get<DihedralElement>(g).compile();
}

// Signed permutation read off the tableau: column Q holds sign at row index of U Q U^dag.
inline SuperOp adjoint_superop(const CliffordElement& c) {
    const int n = c.n();
    require_cap(n, limits().dense_superop_qubits, "adjoint_superop");
    const auto D = Eigen::Index{1} << (2 * n);
    RealMatrix R = RealMatrix::Zero(D, D);
    for (Eigen::Index q = 0; q < D; ++q) {
        const auto img = c.conjugate(SignedPauli{PauliString::from_index(n, static_cast<std::uint64_t>(q)), false});
        R(static_cast<Eigen::Index>(img.p.index()), q) = img.negative ? -1.0 : 1.0;
    }
    return SuperOp(n, std::move(R));
}

// Dihedral elements realize their adjoint action from their own monomial unitary.
inline SuperOp adjoint_superop(const DihedralElement& k) {
    require_cap(k.n(), limits().dense_superop_qubits, "adjoint_superop");
    return adjoint_ptm(unitary_of(k));
}

inline SuperOp adjoint_superop(const GroupElement& g) {
    return std::visit([](const auto& e) { return adjoint_superop(e); }, g);
}

// Ordered gates g_1 .. g_m (g_1 applied first).
class GateSequence {
public:
    explicit GateSequence(int n) : n_(n) {}
    GateSequence(int n, std::vector<GroupElement> gates) : n_(n), gates_(std::move(gates)) {
        for (const auto& g : gates_)
            if (qubits(g) != n_) throw std::invalid_argument("qubit count mismatch");
    }

    void push_back(GroupElement g) {
        if (qubits(g) != n_) throw std::invalid_argument("qubit count mismatch");
        gates_.push_back(std::move(g));
    }

    int n() const { return n_; }
    std::size_t size() const { return gates_.size(); }
    bool empty() const { return gates_.empty(); }
    const std::vector<GroupElement>& gates() const { return gates_; }

    // g_m ... g_1; the identity Clifford for an empty sequence.
    GroupElement end_gate() const {
        if (gates_.empty()) return CliffordElement::identity(n_);
        GroupElement acc = gates_.front();
        for (std::size_t i = 1; i < gates_.size(); ++i) acc = compose(gates_[i], acc);
        return acc;
    }

    GroupElement inverse_gate() const { return inverse(end_gate()); }

private:
    int n_;
    std::vector<GroupElement> gates_;
};

}  // namespace rbshadow
