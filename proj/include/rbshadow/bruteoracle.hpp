#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "densitysim.hpp"
#include "gategroups.hpp"
#include "noisechan.hpp"
#include "observable.hpp"
#include "pauliliouville.hpp"
#include "plan.hpp"

namespace rbshadow {

enum class GroupFamily { Clifford, Dihedral, LocalClifford };

inline std::string to_string(GroupFamily f) {
    switch (f) {
    case GroupFamily::Clifford: return "clifford";
    case GroupFamily::Dihedral: return "dihedral";
    case GroupFamily::LocalClifford: return "local-clifford";
    }
    return "unknown";
}

inline GroupElement dihedral_cx(int n, int c, int t) {
    auto A = gf2::identity(n);
    A[t] ^= A[c];
    return DihedralElement(n, std::move(A), 0, std::vector<std::uint8_t>(n, 0), std::vector<std::uint64_t>(n, 0));
}

// H_q, S_q, CX on neighbouring pairs (both directions); dihedral uses S_q, X_q, CX.
inline std::vector<GroupElement> standard_generators(GroupFamily family, int n) {
    std::vector<GroupElement> gens;
    if (family == GroupFamily::Dihedral) {
        for (int q = 0; q < n; ++q) {
            std::vector<std::uint8_t> a(n, 0);
            a[q] = 1;
            gens.emplace_back(DihedralElement(n, gf2::identity(n), 0, a, std::vector<std::uint64_t>(n, 0)));
            gens.emplace_back(DihedralElement(n, gf2::identity(n), 1ULL << q, std::vector<std::uint8_t>(n, 0), std::vector<std::uint64_t>(n, 0)));
        }
        for (int q = 0; q + 1 < n; ++q) {
            gens.push_back(dihedral_cx(n, q, q + 1));
            gens.push_back(dihedral_cx(n, q + 1, q));
        }
        return gens;
    }
    for (int q = 0; q < n; ++q) {
        gens.emplace_back(CliffordElement::from_circuit({Gate{GateKind::H, q}}, n));
        gens.emplace_back(CliffordElement::from_circuit({Gate{GateKind::S, q}}, n));
    }
    if (family == GroupFamily::Clifford)
        for (int q = 0; q + 1 < n; ++q) {
            gens.emplace_back(CliffordElement::from_circuit({Gate{GateKind::CX, q, q + 1}}, n));
            gens.emplace_back(CliffordElement::from_circuit({Gate{GateKind::CX, q + 1, q}}, n));
        }
    return gens;
}

namespace detail {

// Key modulo global phase: signed tableau rows, or the canonical dihedral tuple.
inline std::vector<std::uint64_t> element_key(const GroupElement& g) {
    std::vector<std::uint64_t> key;
    if (const auto* c = std::get_if<CliffordElement>(&g)) {
        key.push_back(0);
        for (const auto& r : c->rows()) {
            key.push_back(r.p.x);
            key.push_back(r.p.z);
            key.push_back(r.negative);
        }
        return key;
    }
    const auto& k = std::get<DihedralElement>(g);
    key.push_back(1);
    key.insert(key.end(), k.A().begin(), k.A().end());
    key.push_back(k.c());
    for (auto v : k.a()) key.push_back(v);
    key.insert(key.end(), k.Q().begin(), k.Q().end());
    return key;
}

}  // namespace detail

// BFS closure under left multiplication by the generators.
inline std::vector<GroupElement> enumerate_group(const std::vector<GroupElement>& generators, int n, int cap = 0) {
    if (cap <= 0) cap = limits().enumeration_elements;
    for (const auto& g : generators)
        if (qubits(g) != n) throw std::invalid_argument("generator has the wrong qubit count");
    GroupElement id = generators.empty() || kind_of(generators.front()) == GroupKind::Clifford
                          ? GroupElement(CliffordElement::identity(n))
                          : GroupElement(DihedralElement::identity(n));
    std::map<std::vector<std::uint64_t>, std::size_t> seen;
    std::vector<GroupElement> out{id};
    seen.emplace(detail::element_key(id), 0);
    for (std::size_t head = 0; head < out.size(); ++head) {
        for (const auto& g : generators) {
            GroupElement next = compose(g, out[head]);
            auto key = detail::element_key(next);
            if (seen.count(key)) continue;
            if (static_cast<int>(out.size()) >= cap)
                throw CapError("group enumeration exceeds cap " + std::to_string(cap));
            seen.emplace(std::move(key), out.size());
            out.push_back(std::move(next));
        }
    }
    return out;
}

inline std::vector<GroupElement> enumerate_group(GroupFamily family, int n, int cap = 0) {
    return enumerate_group(standard_generators(family, n), n, cap);
}

// Mean of Ad^dag(g) X Ad(g) over the listed elements.
inline SuperOp twirl_enumerated(const std::vector<GroupElement>& group, const SuperOp& X) {
    if (group.empty()) throw std::invalid_argument("empty group");
    RealMatrix acc = RealMatrix::Zero(X.dim(), X.dim());
    for (const auto& g : group) {
        const auto R = adjoint_superop(g);
        acc.noalias() += R.matrix().transpose() * X.matrix() * R.matrix();
    }
    return SuperOp(X.n(), acc / static_cast<double>(group.size()));
}

inline std::vector<DiagonalProjector> sector_projectors(GroupFamily family, int n) {
    switch (family) {
    case GroupFamily::Clifford: return {build_projector(ProjectorLabel::Triv, n), build_projector(ProjectorLabel::Adj, n)};
    case GroupFamily::Dihedral:
        return {build_projector(ProjectorLabel::Triv, n), build_projector(ProjectorLabel::Z, n), build_projector(ProjectorLabel::Ort, n)};
    case GroupFamily::LocalClifford: {
        std::vector<DiagonalProjector> out;
        for (std::uint64_t w = 0; w < (1ULL << n); ++w) out.push_back(build_projector(ProjectorLabel::Pattern, n, w));
        return out;
    }
    }
    throw std::invalid_argument("unknown group family");
}

// sum_a Tr[P_a X]/Tr[P_a] P_a
inline SuperOp twirl_schur(GroupFamily family, const SuperOp& X) {
    RealMatrix out = RealMatrix::Zero(X.dim(), X.dim());
    for (const auto& P : sector_projectors(family, X.n())) {
        const double c = projected_trace(P, X) / static_cast<double>(P.trace());
        for (Eigen::Index i = 0; i < X.dim(); ++i)
            if (P.mask[static_cast<std::size_t>(i)]) out(i, i) = c;
    }
    return SuperOp(X.n(), std::move(out));
}

// Average of Ad^dag(g) B Lambda Ad(g).
inline SuperOp exact_frame_operator(GroupFamily family, const SuperOp& channel, bool enumerate) {
    const auto BL = apply_diagonal(build_projector(ProjectorLabel::B, channel.n()), channel);
    if (!enumerate) return twirl_schur(family, BL);
    return twirl_enumerated(enumerate_group(family, channel.n()), BL);
}

// Traces of a channel read off d x d evaluations; no 4^n matrix is formed.
struct ChannelSpectrum {
    int n = 0;
    double r00 = 1;     // Tr[Lambda(I)]/d
    double sum_zz = 0;  // sum over {I,Z} strings of R_zz
    double trace = 0;   // Tr of the transfer matrix

    double d() const { return std::pow(2.0, n); }
    double lambda_Z() const { return (sum_zz - r00) / (d() - 1); }
    double lambda_adj() const { return (trace - r00) / (d() * d() - 1); }
    double lambda_ort() const { return (trace - sum_zz) / (d() * d() - d()); }
};

inline ChannelSpectrum channel_spectrum(const Channel& ch) {
    const int n = ch.n();
    require_cap(n, limits().exact_qubits, "exact channel spectrum");
    const auto d = Eigen::Index{1} << n;
    ChannelSpectrum s;
    s.n = n;
    s.r00 = ch(Matrix::Identity(d, d)).trace().real() / static_cast<double>(d);
    Matrix e = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            e(i, j) = 1;
            const double v = ch(e)(i, j).real();
            e(i, j) = 0;
            s.trace += v;
            if (i == j) s.sum_zz += v;
        }
    return s;
}

// R_PP = Tr[P Lambda(P)]/d
inline double pauli_diagonal(const Channel& ch, const PauliString& p) {
    require_cap(ch.n(), limits().dense_state_qubits, "pauli diagonal");
    const Matrix P = pauli_matrix(p);
    return (P * ch(P)).trace().real() / static_cast<double>(P.rows());
}

// Spectral coefficients (triv, adj) of a global frame operator.
struct GlobalCoefficients {
    double triv = 1;
    double adj = 0;
};

// Physical frame of the shadow records with L noisy gates.
inline GlobalCoefficients physical_frame(Protocol protocol, const ChannelSpectrum& s, int L) {
    if (L < 1) throw std::invalid_argument("a shadow record holds at least one gate");
    const double d = s.d();
    GlobalCoefficients c;
    c.triv = std::pow(s.r00, L);
    if (protocol == Protocol::SelfcalShadow) c.adj = std::pow(s.lambda_Z(), L) / (d + 1);
    else if (protocol == Protocol::CliffordShadow || protocol == Protocol::CliffordRb)
        c.adj = s.lambda_Z() * std::pow(s.lambda_adj(), L - 1) / (d + 1);
    else
        throw std::invalid_argument("no global frame for " + to_string(protocol));
    return c;
}

struct ExactSignal {
    Protocol protocol = Protocol::DihedralRb;
    int n = 0;
    std::vector<int> lengths;
    std::vector<double> values;
    std::vector<std::pair<std::uint64_t, std::vector<double>>> patterns;  // local-gateset
    ChannelSpectrum spectrum;
};

inline Observable all_zeros_povm(int n) {
    std::vector<PauliTerm> terms;
    const double w = std::pow(2.0, -n);
    for (std::uint64_t z = 0; z < (1ULL << n); ++z) terms.push_back({w, PauliString{n, 0, z}});
    return Observable::pauli_sum("all-zeros", n, terms);
}

// Per-qubit Pauli coefficients Tr[P rho_q] of a product probe.
inline std::array<double, 4> probe_bloch(const std::string& probe) {
    if (probe == "zeros") return {1, 0, 0, 1};
    if (probe == "plus") return {1, 1, 0, 0};
    throw std::invalid_argument("probe must be a product state (zeros or plus): " + probe);
}

// <<theta|Pi_w|theta>> in the normalized Pauli basis.
inline double probe_weight(const std::string& probe, int n, std::uint64_t w) {
    const auto r = probe_bloch(probe);
    const double r2 = r[1] * r[1] + r[2] * r[2] + r[3] * r[3];
    double v = 1;
    for (int q = 0; q < n; ++q) v *= ((w >> q) & 1) ? r2 / 2 : 0.5;
    return v;
}

// Exact per-length means of the protocol signal under gate-independent noise.
// Local-gateset means are normalized correlators, c_w^m.
inline ExactSignal exact_signal(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.noise.gate_dependent()) throw std::invalid_argument("exact signals need gate-independent noise");
    require_cap(plan.n, limits().exact_qubits, "exact signal");
    const int n = plan.n;
    const auto noise = realize(plan.noise, n);
    const auto& ch = noise.channel;
    ExactSignal out;
    out.protocol = plan.protocol;
    out.n = n;
    out.lengths = plan.lengths;
    out.spectrum = channel_spectrum(ch);
    const auto& s = out.spectrum;
    const double d = s.d();

    if (plan.protocol == Protocol::LocalGateset) {
        for (auto w : plan.patterns) {
            PauliString zw{n, 0, w};
            const double c = pauli_diagonal(ch, zw) / std::pow(3.0, std::popcount(w));
            std::vector<double> v;
            for (int m : plan.lengths) v.push_back(std::pow(c, m));
            out.patterns.emplace_back(w, std::move(v));
        }
        return out;
    }

    const Matrix rho = plan.input_state().rho;
    if (is_shadow_protocol(plan.protocol)) {
        const double e_adj = plan.filter->expectation(rho) - plan.filter->trace() / d * rho.trace().real();
        for (int m : plan.lengths)
            out.values.push_back((d + 1) * physical_frame(plan.protocol, s, plan.record_length(m)).adj * e_adj);
        return out;
    }

    // Survival with a noisy inverse: <E|Lambda sum_a lambda_a^m Pi_a|rho>.
    const auto E = all_zeros_povm(n);
    const Eigen::Index dd = rho.rows();
    const Matrix triv = Matrix::Identity(dd, dd) * (rho.trace() / static_cast<double>(dd));
    Matrix diag = Matrix::Zero(dd, dd);
    diag.diagonal() = rho.diagonal();
    const Matrix zpart = diag - triv;
    const Matrix ort = rho - diag;
    const double e_triv = E.expectation(ch(triv)), e_z = E.expectation(ch(zpart)), e_ort = E.expectation(ch(ort));
    const double e_adj = E.expectation(ch(rho - triv));
    for (int m : plan.lengths) {
        if (plan.protocol == Protocol::DihedralRb)
            out.values.push_back(std::pow(s.r00, m) * e_triv + std::pow(s.lambda_Z(), m) * e_z + std::pow(s.lambda_ort(), m) * e_ort);
        else
            out.values.push_back(std::pow(s.r00, m) * e_triv + std::pow(s.lambda_adj(), m) * e_adj);
    }
    return out;
}

}  // namespace rbshadow
