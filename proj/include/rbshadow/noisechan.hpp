#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "circuit.hpp"
#include "dense.hpp"
#include "pauliliouville.hpp"

namespace rbshadow {

enum class NoiseKind {
    GlobalDepolarizing,
    LocalDepolarizing,
    BitFlip,
    AmplitudeDamping,
    Dephasing,
    GateDependentCnotDepol,
    CoherentOverrotation,
};

inline const std::vector<std::pair<NoiseKind, std::string>>& noise_kind_names() {
    static const std::vector<std::pair<NoiseKind, std::string>> names = {
        {NoiseKind::GlobalDepolarizing, "global-depolarizing"},
        {NoiseKind::LocalDepolarizing, "local-depolarizing"},
        {NoiseKind::BitFlip, "bit-flip"},
        {NoiseKind::AmplitudeDamping, "amplitude-damping"},
        {NoiseKind::Dephasing, "dephasing"},
        {NoiseKind::GateDependentCnotDepol, "gate-dependent-cnot-depol"},
        {NoiseKind::CoherentOverrotation, "coherent-overrotation"},
    };
    return names;
}

inline std::string to_string(NoiseKind k) {
    for (const auto& [kind, name] : noise_kind_names())
        if (kind == k) return name;
    return "unknown";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
    for (const auto& [kind, name] : noise_kind_names())
        if (name == s) return kind;
    throw std::invalid_argument("unknown noise kind: " + s);
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::GlobalDepolarizing;
    double p = 0.0;
    double gamma = 0.0;        // amplitude damping only
    double local_ratio = 0.0;  // gate-dependent only
    double theta = 0.0;        // over-rotation only

    bool gate_dependent() const {
        return kind == NoiseKind::GateDependentCnotDepol || kind == NoiseKind::CoherentOverrotation;
    }

    // The parameter reported in the noise_param column.
    double primary() const {
        if (kind == NoiseKind::AmplitudeDamping) return gamma;
        if (kind == NoiseKind::CoherentOverrotation) return theta;
        return p;
    }

    void validate() const {
        auto unit = [](double v, const char* what) {
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
        };
        unit(p, "p");
        unit(gamma, "gamma");
        unit(local_ratio * p, "local_ratio * p");
        if (local_ratio < 0) throw std::invalid_argument("local_ratio must be non-negative");
        if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
    }
};

// Channel on a few qubits stored as its action on vec of a local block.
struct LocalSuperop {
    std::vector<int> qubits;
    std::vector<Matrix> kraus;
    Matrix s;  // (K*K) x (K*K): entry ((i,j),(a,b)) = sum_k K_ia conj(K_jb)

    LocalSuperop(std::vector<int> qs, std::vector<Matrix> ks) : qubits(std::move(qs)), kraus(std::move(ks)) {
        check_kraus(kraus);
        const auto K = kraus.front().rows();
        if (K != (Eigen::Index{1} << qubits.size())) throw std::invalid_argument("Kraus size does not match qubit list");
        s = Matrix::Zero(K * K, K * K);
        for (const auto& k : kraus)
            for (Eigen::Index i = 0; i < K; ++i)
                for (Eigen::Index j = 0; j < K; ++j)
                    for (Eigen::Index a = 0; a < K; ++a)
                        for (Eigen::Index b = 0; b < K; ++b) s(i * K + j, a * K + b) += k(i, a) * std::conj(k(j, b));
    }

    void apply(Matrix& rho) const { apply_on(rho, qubits); }

    // Same channel placed on other qubits.
    void apply_on(Matrix& rho, const std::vector<int>& where) const {
        const std::int64_t d = rho.rows();
        const auto l = detail::layout(where, d);
        if (where.size() != qubits.size()) throw std::invalid_argument("placement has the wrong arity");
        const auto K = static_cast<Eigen::Index>(l.offsets.size());
        Vector in(K * K), out(K * K);
        for (std::int64_t rb = 0; rb < d; ++rb) {
            if (rb & l.mask) continue;
            for (std::int64_t cb = 0; cb < d; ++cb) {
                if (cb & l.mask) continue;
                for (Eigen::Index i = 0; i < K; ++i)
                    for (Eigen::Index j = 0; j < K; ++j) in(i * K + j) = rho(rb + l.offsets[i], cb + l.offsets[j]);
                out.noalias() = s * in;
                for (Eigen::Index i = 0; i < K; ++i)
                    for (Eigen::Index j = 0; j < K; ++j) rho(rb + l.offsets[i], cb + l.offsets[j]) = out(i * K + j);
            }
        }
    }
};

struct GlobalDepolarizingOp {
    double p;
};

using ChannelOp = std::variant<LocalSuperop, GlobalDepolarizingOp>;

// Composition of ops applied in list order.
class Channel {
public:
    explicit Channel(int n = 1) : n_(n) {}
    Channel(int n, std::vector<ChannelOp> ops) : n_(n), ops_(std::move(ops)) {
        for (const auto& op : ops_)
            if (const auto* l = std::get_if<LocalSuperop>(&op))
                for (int q : l->qubits)
                    if (q < 0 || q >= n_) throw std::invalid_argument("channel qubit out of range");
    }

    int n() const { return n_; }
    const std::vector<ChannelOp>& ops() const { return ops_; }
    bool is_identity() const { return ops_.empty(); }

    void apply(Matrix& rho) const {
        for (const auto& op : ops_) {
            if (const auto* l = std::get_if<LocalSuperop>(&op)) {
                l->apply(rho);
            } else {
                const double p = std::get<GlobalDepolarizingOp>(op).p;
                const cd tr = rho.trace();
                rho *= (1 - p);
                rho.diagonal().array() += p * tr / static_cast<double>(rho.rows());
            }
        }
    }

    Matrix operator()(const Matrix& rho) const {
        Matrix out = rho;
        apply(out);
        return out;
    }

    // Every op acts on disjoint qubits (or is a global depolarizer alone).
    bool is_product() const {
        std::uint64_t used = 0;
        for (const auto& op : ops_) {
            const auto* l = std::get_if<LocalSuperop>(&op);
            if (!l) return ops_.size() == 1;
            for (int q : l->qubits) {
                if (used & (1ULL << q)) return false;
                used |= 1ULL << q;
            }
        }
        return true;
    }

private:
    int n_;
    std::vector<ChannelOp> ops_;
};

inline SuperOp superop(const Channel& ch) {
    return ptm_from_map(ch.n(), [&](const Matrix& X) { return ch(X); });
}

namespace kraus {

inline Matrix pauli1(PauliCode c) {
    PauliString p{1, 0, 0};
    p.set(0, c);
    return pauli_matrix(p);
}

inline std::vector<Matrix> depolarizing1(double p) {
    return {std::sqrt(1 - 3 * p / 4) * pauli1(PauliCode::I), std::sqrt(p / 4) * pauli1(PauliCode::X),
            std::sqrt(p / 4) * pauli1(PauliCode::Y), std::sqrt(p / 4) * pauli1(PauliCode::Z)};
}

inline std::vector<Matrix> depolarizing2(double p) {
    std::vector<Matrix> k;
    for (std::uint64_t i = 0; i < 16; ++i) {
        const double w = i == 0 ? std::sqrt(1 - 15 * p / 16) : std::sqrt(p / 16);
        k.push_back(w * pauli_matrix(PauliString::from_index(2, i)));
    }
    return k;
}

inline std::vector<Matrix> bit_flip(double p) {
    return {std::sqrt(1 - p) * pauli1(PauliCode::I), std::sqrt(p) * pauli1(PauliCode::X)};
}

inline std::vector<Matrix> dephasing(double p) {
    return {std::sqrt(1 - p / 2) * pauli1(PauliCode::I), std::sqrt(p / 2) * pauli1(PauliCode::Z)};
}

// Errorless with probability p, otherwise damped with strength gamma.
inline std::vector<Matrix> amplitude_damping(double p, double gamma) {
    Matrix e1 = Matrix::Zero(2, 2), e2 = Matrix::Zero(2, 2);
    e1(0, 0) = 1;
    e1(1, 1) = std::sqrt(1 - gamma);
    e2(0, 1) = std::sqrt(gamma);
    return {std::sqrt(p) * pauli1(PauliCode::I), std::sqrt(1 - p) * e1, std::sqrt(1 - p) * e2};
}

}  // namespace kraus

inline Channel local_channel(int n, const std::vector<Matrix>& k1) {
    std::vector<ChannelOp> ops;
    for (int q = 0; q < n; ++q) ops.emplace_back(LocalSuperop({q}, k1));
    return Channel(n, std::move(ops));
}

// Gate-independent: one channel after every gate. Gate-dependent: channels per gate class.
struct NoiseModel {
    NoiseSpec spec;
    int n = 1;
    Channel channel{1};
    std::optional<LocalSuperop> cnot_noise;    // 2-qubit channel after each CX
    std::optional<LocalSuperop> single_noise;  // 1-qubit channel after each 1-qubit gate
    std::optional<double> overrotation;               // added to every rotation angle

    bool gate_dependent() const { return spec.gate_dependent(); }
};

inline NoiseModel realize(const NoiseSpec& spec, int n) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("n must be positive");
    NoiseModel m;
    m.spec = spec;
    m.n = n;
    m.channel = Channel(n);
    switch (spec.kind) {
    case NoiseKind::GlobalDepolarizing:
        if (spec.p > 0) m.channel = Channel(n, {GlobalDepolarizingOp{spec.p}});
        break;
    case NoiseKind::LocalDepolarizing: m.channel = local_channel(n, kraus::depolarizing1(spec.p)); break;
    case NoiseKind::BitFlip: m.channel = local_channel(n, kraus::bit_flip(spec.p)); break;
    case NoiseKind::Dephasing: m.channel = local_channel(n, kraus::dephasing(spec.p)); break;
    case NoiseKind::AmplitudeDamping: m.channel = local_channel(n, kraus::amplitude_damping(spec.p, spec.gamma)); break;
    case NoiseKind::GateDependentCnotDepol:
        m.cnot_noise = LocalSuperop({0, 1}, kraus::depolarizing2(spec.p));
        if (spec.local_ratio > 0) m.single_noise = LocalSuperop({0}, kraus::depolarizing1(spec.local_ratio * spec.p));
        break;
    case NoiseKind::CoherentOverrotation: m.overrotation = spec.theta; break;
    }
    return m;
}

// Closed forms from the appendix lemmas; dephasing is derived the same way.
inline std::pair<double, double> closed_form_lambdas(const NoiseSpec& spec, int n) {
    spec.validate();
    const double d = std::pow(2.0, n), p = spec.p, g = spec.gamma;
    switch (spec.kind) {
    case NoiseKind::GlobalDepolarizing: return {1 - p, 1 - p};
    case NoiseKind::LocalDepolarizing:
        return {(std::pow(2 - p, n) - 1) / (d - 1), (std::pow(4 - 3 * p, n) - 1) / (d * d - 1)};
    case NoiseKind::BitFlip:
        return {(d * std::pow(1 - p, n) - 1) / (d - 1), (d * d * std::pow(1 - p, n) - 1) / (d * d - 1)};
    case NoiseKind::AmplitudeDamping: {
        const double sg = std::sqrt(1 - g);
        return {(d + std::pow(2 - p + (p - 1) * g, n) - std::pow(2 - p, n) - 1) / (d - 1),
                (std::pow(2 - g + 2 * sg + p * (2 + g - 2 * sg), n) - 1) / (d * d - 1)};
    }
    case NoiseKind::Dephasing: return {1.0, (std::pow(4 - 2 * p, n) - 1) / (d * d - 1)};
    default: throw std::invalid_argument("no closed form for gate-dependent noise");
    }
}

// lambda_Z of the per-qubit mixture p*id + (1-p)*AD(gamma) counted directly:
// each qubit contributes sum_b <b|L(|b><b|)|b> = 2 - (1-p)*gamma.
// The lemma expression above agrees with it only for n = 1 or p in {0, 1}.
inline double amplitude_damping_lambda_Z(double p, double gamma, int n) {
    const double d = std::pow(2.0, n);
    return (std::pow(2 - (1 - p) * gamma, n) - 1) / (d - 1);
}

inline double bias_ratio(const NoiseSpec& spec, int n) {
    const auto [lz, ladj] = closed_form_lambdas(spec, n);
    if (ladj == 0) throw std::domain_error("lambda_adj is zero");
    return lz / ladj - 1;
}

}  // namespace rbshadow
