#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "limits.hpp"
#include "pauli.hpp"
#include "rng.hpp"

namespace rbshadow {

// Stabilizer tableau: rows hold U X_q U^dag (q < n) and U Z_q U^dag (q >= n).
class CliffordElement {
public:
    CliffordElement() = default;

    static CliffordElement identity(int n) {
        if (n < 1 || n > kMaxPauliQubits) throw std::invalid_argument("qubit count out of range");
        CliffordElement c;
        c.n_ = n;
        c.rows_.resize(2 * static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q) {
            c.rows_[q] = SignedPauli{PauliString{n, 1ULL << q, 0}, false};
            c.rows_[n + q] = SignedPauli{PauliString{n, 0, 1ULL << q}, false};
        }
        return c;
    }

    static CliffordElement from_images(std::vector<SignedPauli> rows) {
        if (rows.empty() || rows.size() % 2) throw std::invalid_argument("tableau needs 2n rows");
        CliffordElement c;
        c.n_ = static_cast<int>(rows.size() / 2);
        for (const auto& r : rows)
            if (r.p.n != c.n_) throw std::invalid_argument("row qubit count mismatch");
        c.rows_ = std::move(rows);
        if (!c.is_symplectic()) throw std::invalid_argument("rows do not satisfy the commutation relations");
        return c;
    }

    static CliffordElement from_circuit(const Circuit& circ, int n) {
        auto c = identity(n);
        for (const auto& g : circ) c.apply_gate(g);
        return c;
    }

    int n() const { return n_; }
    const SignedPauli& x_image(int q) const { return rows_.at(q); }
    const SignedPauli& z_image(int q) const { return rows_.at(n_ + q); }
    const std::vector<SignedPauli>& rows() const { return rows_; }

    // U P U^dag for P in raw form.
    PhasedPauli conjugate(const PhasedPauli& p) const {
        PhasedPauli acc{0, 0, p.phase};
        for (std::uint64_t m = p.x; m; m &= m - 1) acc = raw_multiply(acc, to_raw(rows_[std::countr_zero(m)]));
        for (std::uint64_t m = p.z; m; m &= m - 1) acc = raw_multiply(acc, to_raw(rows_[n_ + std::countr_zero(m)]));
        return acc;
    }

    SignedPauli conjugate(const SignedPauli& s) const {
        if (s.p.n != n_) throw std::invalid_argument("qubit count mismatch");
        return to_signed(conjugate(to_raw(s)), n_);
    }

    // Left-multiplies by a Clifford gate: U <- G U.
    void apply_gate(const Gate& g) {
        for (auto& row : rows_) conjugate_row(row, g);
    }

    // (this * rhs): rhs acts first.
    CliffordElement compose(const CliffordElement& rhs) const {
        if (rhs.n_ != n_) throw std::invalid_argument("qubit count mismatch");
        CliffordElement c;
        c.n_ = n_;
        c.rows_.reserve(rows_.size());
        for (const auto& r : rhs.rows_) c.rows_.push_back(conjugate(r));
        return c;
    }

    CliffordElement inverse() const {
        CliffordElement inv;
        inv.n_ = n_;
        inv.rows_.resize(rows_.size());
        for (int k = 0; k < 2 * n_; ++k) {
            const PauliString target = k < n_ ? PauliString{n_, 1ULL << k, 0} : PauliString{n_, 0, 1ULL << (k - n_)};
            PauliString pre{n_, 0, 0};
            for (int j = 0; j < n_; ++j) {
                const auto& tx = rows_[j].p;
                const auto& tz = rows_[n_ + j].p;
                if (symplectic(target.x, target.z, tz.x, tz.z)) pre.x |= 1ULL << j;
                if (symplectic(target.x, target.z, tx.x, tx.z)) pre.z |= 1ULL << j;
            }
            SignedPauli cand{pre, false};
            const SignedPauli img = conjugate(cand);
            if (!(img.p == target)) throw std::logic_error("tableau is not invertible");
            cand.negative = img.negative;
            inv.rows_[k] = cand;
        }
        return inv;
    }

    bool is_identity() const { return *this == identity(n_); }

    bool is_symplectic() const {
        for (int a = 0; a < 2 * n_; ++a)
            for (int b = a + 1; b < 2 * n_; ++b) {
                const bool anti = symplectic(rows_[a].p.x, rows_[a].p.z, rows_[b].p.x, rows_[b].p.z);
                if (anti != (b == a + n_)) return false;
            }
        return true;
    }

    friend bool operator==(const CliffordElement&, const CliffordElement&) = default;

private:
    static void conjugate_row(SignedPauli& row, const Gate& g) {
        auto bit = [](std::uint64_t v, int q) { return static_cast<bool>((v >> q) & 1); };
        auto put = [](std::uint64_t& v, int q, bool b) { v = (v & ~(1ULL << q)) | (std::uint64_t{b} << q); };
        auto& x = row.p.x;
        auto& z = row.p.z;
        const int q = g.q0;
        const bool xq = bit(x, q), zq = bit(z, q);
        switch (g.kind) {
        case GateKind::H:
            row.negative ^= xq && zq;
            put(x, q, zq);
            put(z, q, xq);
            break;
        case GateKind::S:
            row.negative ^= xq && zq;
            put(z, q, zq ^ xq);
            break;
        case GateKind::Sdg:
            put(z, q, zq ^ xq);
            row.negative ^= xq && (zq ^ xq);
            break;
        case GateKind::X: row.negative ^= zq; break;
        case GateKind::Z: row.negative ^= xq; break;
        case GateKind::Y: row.negative ^= xq ^ zq; break;
        case GateKind::CX: {
            const int c = g.q0, t = g.q1;
            const bool xc = bit(x, c), zc = bit(z, c), xt = bit(x, t), zt = bit(z, t);
            row.negative ^= xc && zt && !(xt ^ zc);
            put(x, t, xt ^ xc);
            put(z, c, zc ^ zt);
            break;
        }
        default: throw std::invalid_argument("rotation gates are not Clifford");
        }
    }

    int n_ = 0;
    std::vector<SignedPauli> rows_;
};

namespace detail {

struct SymVec {
    std::uint64_t x = 0, z = 0;
    bool zero() const { return (x | z) == 0; }
};

inline int sym(const SymVec& a, const SymVec& b) { return symplectic(a.x, a.z, b.x, b.z); }

inline SymVec random_symvec(int n, Rng& rng) { return SymVec{rng.bits(n), rng.bits(n)}; }

inline SymVec project(SymVec u, const std::vector<std::pair<SymVec, SymVec>>& pairs) {
    const SymVec u0 = u;
    for (const auto& [v, w] : pairs) {
        if (sym(u0, w)) { u.x ^= v.x; u.z ^= v.z; }
        if (sym(u0, v)) { u.x ^= w.x; u.z ^= w.z; }
    }
    return u;
}

}  // namespace detail

// Uniform over the Clifford group modulo phase: symplectic Gram-Schmidt plus random signs.
inline CliffordElement sample_clifford(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    require_cap(n, limits().dense_state_qubits, "sample_clifford");
    using detail::SymVec;
    std::vector<std::pair<SymVec, SymVec>> pairs;
    std::vector<SignedPauli> rows(2 * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        SymVec v, w;
        do v = detail::project(detail::random_symvec(n, rng), pairs); while (v.zero());
        do w = detail::project(detail::random_symvec(n, rng), pairs); while (!detail::sym(v, w));
        pairs.emplace_back(v, w);
        rows[k] = SignedPauli{PauliString{n, v.x, v.z}, false};
        rows[n + k] = SignedPauli{PauliString{n, w.x, w.z}, false};
    }
    for (auto& r : rows) r.negative = rng.coin();
    return CliffordElement::from_images(std::move(rows));
}

// Greedy synthesis into {H, S, Sdg, X, Y, Z, CX}; the returned circuit is in time order.
inline Circuit synthesize(const CliffordElement& target) {
    const int n = target.n();
    CliffordElement t = target;
    Circuit undo;  // gates G with G_K ... G_1 target = identity
    auto push = [&](Gate g) {
        t.apply_gate(g);
        undo.push_back(g);
    };
    for (int i = 0; i < n; ++i) {
        // X_i image -> X_i
        {
            const auto xi = t.x_image(i).p;
            for (int j = i; j < n; ++j) {
                const auto c = xi.code(j);
                if (c == PauliCode::Z) push({GateKind::H, j});
                else if (c == PauliCode::Y) push({GateKind::S, j});
            }
        }
        {
            const std::uint64_t xs = t.x_image(i).p.x;
            if (!((xs >> i) & 1)) {
                const int j = std::countr_zero(xs);
                push({GateKind::CX, j, i});
            }
            const std::uint64_t rest = t.x_image(i).p.x & ~(1ULL << i);
            for (std::uint64_t m = rest; m; m &= m - 1) push({GateKind::CX, i, std::countr_zero(m)});
        }
        // Z_i image -> Z_i
        if (t.z_image(i).p.code(i) == PauliCode::Y) {
            push({GateKind::H, i});
            push({GateKind::S, i});
            push({GateKind::H, i});
        }
        {
            const auto zi = t.z_image(i).p;
            for (int j = i + 1; j < n; ++j) {
                const auto c = zi.code(j);
                if (c == PauliCode::X) push({GateKind::H, j});
                else if (c == PauliCode::Y) {
                    push({GateKind::S, j});
                    push({GateKind::H, j});
                }
            }
            const std::uint64_t others = t.z_image(i).p.z & ~(1ULL << i);
            for (std::uint64_t m = others; m; m &= m - 1) push({GateKind::CX, std::countr_zero(m), i});
        }
        if (t.x_image(i).negative) push({GateKind::Z, i});
        if (t.z_image(i).negative) push({GateKind::X, i});
    }
    if (!t.is_identity()) throw std::logic_error("synthesis did not reach the identity");
    return inverse_circuit(undo);
}

inline Matrix unitary_of(const CliffordElement& c) {
    require_cap(c.n(), limits().dense_state_qubits, "unitary_of");
    return circuit_unitary(synthesize(c), c.n());
}

// The 24 single-qubit Cliffords in a fixed order (index 0 is the identity).
inline const std::array<CliffordElement, 24>& single_qubit_cliffords() {
    static const std::array<CliffordElement, 24> table = [] {
        std::array<CliffordElement, 24> t;
        const PauliCode codes[] = {PauliCode::X, PauliCode::Y, PauliCode::Z};
        int k = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                for (int s = 0; s < 4; ++s) {
                    PauliString px{1, 0, 0}, pz{1, 0, 0};
                    px.set(0, codes[a]);
                    pz.set(0, codes[b]);
                    t[k++] = CliffordElement::from_images({SignedPauli{px, (s & 1) != 0}, SignedPauli{pz, (s & 2) != 0}});
                }
            }
        for (auto& c : t)
            if (c.is_identity()) std::swap(c, t[0]);
        return t;
    }();
    return table;
}

// Tensor product of single-qubit Cliffords, factor q acting on qubit q.
inline CliffordElement tensor_single_qubit(const std::vector<int>& indices) {
    const int n = static_cast<int>(indices.size());
    std::vector<SignedPauli> rows(2 * indices.size());
    for (int q = 0; q < n; ++q) {
        const auto& c = single_qubit_cliffords().at(indices[q]);
        for (int k = 0; k < 2; ++k) {
            const auto& r = c.rows()[k];
            rows[k * n + q] = SignedPauli{PauliString{n, r.p.x << q, r.p.z << q}, r.negative};
        }
    }
    return CliffordElement::from_images(std::move(rows));
}

}  // namespace rbshadow
