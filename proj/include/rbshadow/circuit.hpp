#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense.hpp"

namespace rbshadow {

enum class GateKind { H, S, Sdg, X, Y, Z, CX, RX, RY, RZ };

struct Gate {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;         // target for CX
    double angle = 0.0;  // rotations only

    bool two_qubit() const { return kind == GateKind::CX; }
    std::vector<int> qubits() const { return two_qubit() ? std::vector<int>{q0, q1} : std::vector<int>{q0}; }
};

using Circuit = std::vector<Gate>;

inline std::string gate_name(GateKind k) {
    static const char* names[] = {"H", "S", "Sdg", "X", "Y", "Z", "CX", "RX", "RY", "RZ"};
    return names[static_cast<int>(k)];
}

// Local matrix; for CX bit 0 is the control, bit 1 the target.
inline Matrix gate_matrix(const Gate& g) {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix m(2, 2);
    switch (g.kind) {
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::S: m << 1, 0, 0, kI; break;
    case GateKind::Sdg: m << 1, 0, 0, -kI; break;
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::Y: m << 0, -kI, kI, 0; break;
    case GateKind::Z: m << 1, 0, 0, -1; break;
    case GateKind::RX: {
        const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
        m << c, -kI * s, -kI * s, c;
        break;
    }
    case GateKind::RY: {
        const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
        m << c, -s, s, c;
        break;
    }
    case GateKind::RZ: m << std::exp(-kI * (g.angle / 2)), 0, 0, std::exp(kI * (g.angle / 2)); break;
    case GateKind::CX: {
        Matrix c = Matrix::Zero(4, 4);
        c(0, 0) = c(2, 2) = 1;  // control 0
        c(3, 1) = c(1, 3) = 1;  // control 1 flips target
        return c;
    }
    }
    return m;
}

inline Gate inverse_gate(const Gate& g) {
    Gate r = g;
    switch (g.kind) {
    case GateKind::S: r.kind = GateKind::Sdg; break;
    case GateKind::Sdg: r.kind = GateKind::S; break;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: r.angle = -g.angle; break;
    default: break;
    }
    return r;
}

inline Circuit inverse_circuit(const Circuit& c) {
    Circuit r;
    r.reserve(c.size());
    for (auto it = c.rbegin(); it != c.rend(); ++it) r.push_back(inverse_gate(*it));
    return r;
}

// Product G_K ... G_1 for a circuit listed in time order.
inline Matrix circuit_unitary(const Circuit& c, int n) {
    const auto d = Eigen::Index{1} << n;
    Matrix u = Matrix::Identity(d, d);
    for (const auto& g : c) apply_left(u, gate_matrix(g), g.qubits());
    return u;
}

// Rewrites 1-qubit Clifford gates as Pauli rotations (equal up to global phase),
// adding theta to every rotation angle. H = RY(pi/2) RZ(pi), RZ applied first.
inline Circuit to_rotations(const Circuit& c, double theta) {
    constexpr double pi = std::numbers::pi;
    Circuit out;
    out.reserve(c.size() * 2);
    auto rot = [&](GateKind k, int q, double a) { out.push_back(Gate{k, q, -1, a + theta}); };
    for (const auto& g : c) {
        switch (g.kind) {
        case GateKind::H: rot(GateKind::RZ, g.q0, pi); rot(GateKind::RY, g.q0, pi / 2); break;
        case GateKind::S: rot(GateKind::RZ, g.q0, pi / 2); break;
        case GateKind::Sdg: rot(GateKind::RZ, g.q0, -pi / 2); break;
        case GateKind::X: rot(GateKind::RX, g.q0, pi); break;
        case GateKind::Y: rot(GateKind::RY, g.q0, pi); break;
        case GateKind::Z: rot(GateKind::RZ, g.q0, pi); break;
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ: rot(g.kind, g.q0, g.angle); break;
        case GateKind::CX: out.push_back(g); break;
        }
    }
    return out;
}

}  // namespace rbshadow
