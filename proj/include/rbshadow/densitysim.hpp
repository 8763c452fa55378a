#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "gategroups.hpp"
#include "noisechan.hpp"
#include "rng.hpp"

namespace rbshadow {

struct DensityMatrix {
    int n = 1;
    Matrix rho;

    void validate(double tol = 1e-10) const {
        const auto d = Eigen::Index{1} << n;
        if (rho.rows() != d || rho.cols() != d) throw std::invalid_argument("density matrix has wrong size");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("density matrix is not Hermitian");
        if (std::abs(rho.trace() - cd(1)) > tol) throw std::invalid_argument("density matrix trace is not 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("density matrix is not positive semidefinite");
    }
};

inline Vector ghz_vector(int n) {
    const auto d = Eigen::Index{1} << n;
    Vector v = Vector::Zero(d);
    v(0) = v(d - 1) = 1.0 / std::sqrt(2.0);
    return v;
}

inline DensityMatrix prepare(const std::string& name, int n, const std::optional<Matrix>& custom = std::nullopt) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    require_cap(n, limits().dense_state_qubits, "prepare");
    const auto d = Eigen::Index{1} << n;
    DensityMatrix s{n, Matrix::Zero(d, d)};
    if (name == "zeros") {
        s.rho(0, 0) = 1;
    } else if (name == "ghz") {
        const Vector v = ghz_vector(n);
        s.rho = v * v.adjoint();
    } else if (name == "plus") {
        s.rho.setConstant(1.0 / static_cast<double>(d));
    } else if (name == "custom") {
        if (!custom) throw std::invalid_argument("custom state needs a matrix");
        s.rho = *custom;
        s.validate();
    } else {
        throw std::invalid_argument("unknown state: " + name);
    }
    return s;
}

namespace detail {

inline void symmetrize(Matrix& rho) {
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

inline void apply_gate(Matrix& rho, const Gate& g) { conjugate_local(rho, gate_matrix(g), g.qubits()); }

inline void apply_monomial(Matrix& rho, const DihedralElement& k) {
    const auto d = rho.rows();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
    std::vector<cd> ph(static_cast<std::size_t>(d));
    for (Eigen::Index x = 0; x < d; ++x) {
        perm[x] = static_cast<Eigen::Index>(k.map(static_cast<std::uint64_t>(x)));
        ph[x] = i_pow(k.phase(static_cast<std::uint64_t>(x)));
    }
    Matrix out(d, d);
    for (Eigen::Index y = 0; y < d; ++y)
        for (Eigen::Index x = 0; x < d; ++x) out(perm[x], perm[y]) = ph[x] * std::conj(ph[y]) * rho(x, y);
    rho.swap(out);
}

}  // namespace detail

inline void apply_ideal(Matrix& rho, const GroupElement& g) {
    if (const auto* k = std::get_if<DihedralElement>(&g)) {
        detail::apply_monomial(rho, *k);
        return;
    }
    for (const auto& gate : synthesize(std::get<CliffordElement>(g))) detail::apply_gate(rho, gate);
}

// One gate followed by its noise.
inline void apply_noisy(Matrix& rho, const GroupElement& g, const NoiseModel& noise) {
    if (!noise.gate_dependent()) {
        apply_ideal(rho, g);
        noise.channel.apply(rho);
        detail::symmetrize(rho);
        return;
    }
    Circuit circ = compile(g);
    if (noise.overrotation) circ = to_rotations(circ, *noise.overrotation);
    for (const auto& gate : circ) {
        detail::apply_gate(rho, gate);
        if (gate.two_qubit() && noise.cnot_noise) noise.cnot_noise->apply_on(rho, {gate.q0, gate.q1});
        if (!gate.two_qubit() && noise.single_noise) noise.single_noise->apply_on(rho, {gate.q0});
    }
    detail::symmetrize(rho);
}

inline DensityMatrix run_sequence(const DensityMatrix& state, const GateSequence& seq, const NoiseModel& noise) {
    if (seq.n() != state.n || noise.n != state.n) throw std::invalid_argument("qubit count mismatch");
    DensityMatrix out = state;
    for (const auto& g : seq.gates()) apply_noisy(out.rho, g, noise);
    return out;
}

inline std::uint64_t sample_bitstring(const Matrix& rho, Rng& rng) {
    const auto d = rho.rows();
    double total = 0;
    for (Eigen::Index b = 0; b < d; ++b) total += std::max(0.0, rho(b, b).real());
    if (std::abs(total - 1.0) >= 1e-8) throw std::invalid_argument("outcome probabilities do not sum to 1");
    const double u = rng.uniform() * total;
    double acc = 0;
    for (Eigen::Index b = 0; b < d; ++b) {
        acc += std::max(0.0, rho(b, b).real());
        if (u < acc) return static_cast<std::uint64_t>(b);
    }
    for (Eigen::Index b = d - 1; b >= 0; --b)
        if (rho(b, b).real() > 0) return static_cast<std::uint64_t>(b);
    return 0;
}

inline std::uint64_t sample_bitstring(const DensityMatrix& state, Rng& rng) { return sample_bitstring(state.rho, rng); }

}  // namespace rbshadow
