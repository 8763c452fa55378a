#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rbshadow {

// Single-qubit codes. Base-4 string index puts qubit 0 in the least significant digit.
enum class PauliCode : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline constexpr int kMaxPauliQubits = 64;

// Hermitian Pauli string i^{|x&z|} X^x Z^z (bit q of a mask is qubit q).
struct PauliString {
    int n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;

    static PauliString identity(int n) { return PauliString{n, 0, 0}; }

    static PauliString from_codes(std::string_view codes) {
        if (codes.size() > kMaxPauliQubits) throw std::invalid_argument("pauli string too long");
        PauliString p{static_cast<int>(codes.size()), 0, 0};
        for (std::size_t q = 0; q < codes.size(); ++q) {
            switch (codes[q]) {
            case 'I': break;
            case 'X': p.x |= 1ULL << q; break;
            case 'Y': p.x |= 1ULL << q; p.z |= 1ULL << q; break;
            case 'Z': p.z |= 1ULL << q; break;
            default: throw std::invalid_argument("pauli code must be one of I,X,Y,Z");
            }
        }
        return p;
    }

    static PauliString from_index(int n, std::uint64_t index) {
        if (n < 0 || n > 31) throw std::invalid_argument("base-4 index needs n <= 31");
        PauliString p{n, 0, 0};
        for (int q = 0; q < n; ++q) {
            p.set(q, static_cast<PauliCode>(index & 3));
            index >>= 2;
        }
        if (index != 0) throw std::invalid_argument("pauli index out of range");
        return p;
    }

    PauliCode code(int q) const {
        const bool xb = (x >> q) & 1, zb = (z >> q) & 1;
        if (!xb) return zb ? PauliCode::Z : PauliCode::I;
        return zb ? PauliCode::Y : PauliCode::X;
    }

    void set(int q, PauliCode c) {
        const std::uint64_t bit = 1ULL << q;
        x &= ~bit;
        z &= ~bit;
        if (c == PauliCode::X || c == PauliCode::Y) x |= bit;
        if (c == PauliCode::Z || c == PauliCode::Y) z |= bit;
    }

    std::uint64_t index() const {
        std::uint64_t idx = 0;
        for (int q = n - 1; q >= 0; --q) idx = (idx << 2) | static_cast<std::uint64_t>(code(q));
        return idx;
    }

    std::uint64_t support() const { return x | z; }
    int weight() const { return std::popcount(support()); }
    bool is_identity() const { return (x | z) == 0; }

    std::string str() const {
        static constexpr char names[] = {'I', 'X', 'Y', 'Z'};
        std::string s(static_cast<std::size_t>(n), 'I');
        for (int q = 0; q < n; ++q) s[q] = names[static_cast<int>(code(q))];
        return s;
    }

    friend bool operator==(const PauliString&, const PauliString&) = default;
};

// Pauli string carrying a sign.
struct SignedPauli {
    PauliString p;
    bool negative = false;
    friend bool operator==(const SignedPauli&, const SignedPauli&) = default;
};

// i^phase X^x Z^z, the raw form used for multiplication.
struct PhasedPauli {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int phase = 0;
};

inline int parity(std::uint64_t v) { return std::popcount(v) & 1; }

inline PhasedPauli to_raw(const SignedPauli& s) {
    return PhasedPauli{s.p.x, s.p.z, (std::popcount(s.p.x & s.p.z) + (s.negative ? 2 : 0)) & 3};
}

inline PhasedPauli raw_multiply(const PhasedPauli& a, const PhasedPauli& b) {
    return PhasedPauli{a.x ^ b.x, a.z ^ b.z, (a.phase + b.phase + 2 * std::popcount(a.z & b.x)) & 3};
}

// Phase of the raw form relative to the Hermitian string with the same masks.
inline int hermitian_phase(const PhasedPauli& r) { return (r.phase - std::popcount(r.x & r.z)) & 3; }

inline SignedPauli to_signed(const PhasedPauli& r, int n) {
    const int e = hermitian_phase(r);
    if (e & 1) throw std::logic_error("product is not Hermitian");
    return SignedPauli{PauliString{n, r.x, r.z}, e == 2};
}

inline bool commutes(const PauliString& a, const PauliString& b) {
    return parity((a.x & b.z) ^ (a.z & b.x)) == 0;
}

// Symplectic form of the bit vectors (x, z).
inline int symplectic(std::uint64_t x1, std::uint64_t z1, std::uint64_t x2, std::uint64_t z2) {
    return parity((x1 & z2) ^ (z1 & x2));
}

}  // namespace rbshadow
