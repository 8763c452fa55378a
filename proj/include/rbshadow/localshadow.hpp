#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bruteoracle.hpp"
#include "densitysim.hpp"
#include "fit.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "rbengine.hpp"
#include "shadowest.hpp"

namespace rbshadow {

struct SupportPattern {
    int n = 1;
    std::uint64_t w = 0;

    int weight() const { return std::popcount(w); }

    // Character q is qubit q, e.g. "110" has support {0, 1}.
    static SupportPattern parse(const std::string& s) {
        if (s.empty() || s.size() > 63) throw std::invalid_argument("bad support pattern: " + s);
        SupportPattern p{static_cast<int>(s.size()), 0};
        for (std::size_t q = 0; q < s.size(); ++q) {
            if (s[q] == '1') p.w |= 1ULL << q;
            else if (s[q] != '0') throw std::invalid_argument("support pattern must be a 0/1 string: " + s);
        }
        return p;
    }

    std::string str() const {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int q = 0; q < n; ++q)
            if ((w >> q) & 1) s[q] = '1';
        return s;
    }
};

inline double pow3(int k) { return std::pow(3.0, k); }

// Tr[Pi_w B Lambda]/3^|w| = Lambda_{Z_w Z_w}/3^|w|
inline double c_w_oracle(const SuperOp& channel, std::uint64_t w) {
    const PauliString zw{channel.n(), 0, w};
    const auto i = static_cast<Eigen::Index>(zw.index());
    return channel(i, i) / pow3(std::popcount(w));
}

inline double c_w_oracle(const Channel& channel, std::uint64_t w, int cap = 0) {
    if (cap > 0 && std::popcount(w) > cap) throw CapError("pattern weight exceeds cap");
    return pauli_diagonal(channel, PauliString{channel.n(), 0, w}) / pow3(std::popcount(w));
}

// 1/(2^n 3^|w|) sum_{x,y} (-1)^{w.(x^y)} <y|Lambda(|x><x|)|y>
inline double c_w_double_sum(const Channel& channel, std::uint64_t w) {
    const int n = channel.n();
    require_cap(n, limits().dense_state_qubits, "c_w double sum");
    const auto d = Eigen::Index{1} << n;
    double s = 0;
    Matrix e = Matrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
        e(x, x) = 1;
        const Matrix out = channel(e);
        e(x, x) = 0;
        for (Eigen::Index y = 0; y < d; ++y)
            s += (parity(w & static_cast<std::uint64_t>(x ^ y)) ? -1.0 : 1.0) * out(y, y).real();
    }
    return s / (static_cast<double>(d) * pow3(std::popcount(w)));
}

namespace detail {

// Signed Pauli permutation of a single-qubit Clifford: U P U^dag = sign[P] * code[P].
struct OneQubitAction {
    std::array<int, 4> code{};
    std::array<double, 4> sign{};
};

inline const std::array<OneQubitAction, 24>& one_qubit_actions() {
    static const std::array<OneQubitAction, 24> table = [] {
        std::array<OneQubitAction, 24> t{};
        for (int k = 0; k < 24; ++k) {
            const auto& c = single_qubit_cliffords()[k];
            for (int p = 0; p < 4; ++p) {
                const auto img = c.conjugate(SignedPauli{PauliString::from_index(1, static_cast<std::uint64_t>(p)), false});
                t[k].code[p] = static_cast<int>(img.p.index());
                t[k].sign[p] = img.negative ? -1.0 : 1.0;
            }
        }
        return t;
    }();
    return table;
}

// Coefficients Tr[P X] of Ad^dag(h)(X) from those of X.
inline std::array<double, 4> adjoint_dagger(int k, const std::array<double, 4>& v) {
    const auto& a = one_qubit_actions()[k];
    std::array<double, 4> out{};
    for (int p = 0; p < 4; ++p) out[p] = a.sign[p] * v[a.code[p]];
    return out;
}

}  // namespace detail

// <<theta| Ad^dag(h_1) B_w Ad^dag(h_2) ... B_w Ad^dag(h_m) |b>>, evaluated qubit by qubit.
// gates[j][q] indexes the single-qubit Clifford of layer j on qubit q.
inline double local_correlator(const std::vector<std::vector<int>>& gates, std::uint64_t b, std::uint64_t w,
                               const std::array<double, 4>& theta) {
    const int n = static_cast<int>(gates.front().size());
    double v = 1;
    for (int q = 0; q < n; ++q) {
        const bool in_w = (w >> q) & 1;
        std::array<double, 4> x{1, 0, 0, ((b >> q) & 1) ? -1.0 : 1.0};
        for (std::size_t j = gates.size(); j-- > 0;) {
            x = detail::adjoint_dagger(gates[j][q], x);
            if (j > 0) {
                if (in_w) x = {0, 0, 0, x[3]};
                else x = {x[0], 0, 0, 0};
            }
        }
        const double f = (theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2] + theta[3] * x[3]) / 2;
        if (f == 0) return 0;
        v *= f;
    }
    return v;
}

struct LocalRun {
    std::vector<std::pair<std::uint64_t, std::vector<DecaySample>>> patterns;
    std::vector<double> normalization;  // <<theta|Pi_w|theta>> per pattern
};

// Sequences of m layers of independent single-qubit Cliffords; per-pattern correlators
// divided by <<theta|Pi_w|theta>> so their means decay as p_{w,B}^m.
inline LocalRun run_local_gateset(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.protocol != Protocol::LocalGateset) throw std::invalid_argument("plan protocol is not local-gateset");
    const int n = plan.n;
    const auto noise = realize(plan.noise, n);
    const auto theta = probe_bloch(plan.probe);
    const DensityMatrix input = prepare(plan.probe, n);
    const std::size_t S = plan.shots_per_length, L = plan.lengths.size(), P = plan.patterns.size();
    LocalRun run;
    for (auto w : plan.patterns) run.normalization.push_back(probe_weight(plan.probe, n, w));
    std::vector<double> values(S * L * P);
    parallel_for(S * L, plan.workers, [&](std::size_t i) {
        const std::size_t li = i / S, s = i % S;
        Rng rng = shot_rng(plan, li, s);
        const int m = plan.lengths[li];
        std::vector<std::vector<int>> gates(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(n)));
        GateSequence seq(n);
        for (auto& layer : gates) {
            for (auto& k : layer) k = static_cast<int>(rng.below(24));
            seq.push_back(tensor_single_qubit(layer));
        }
        const auto b = sample_bitstring(run_sequence(input, seq, noise), rng);
        for (std::size_t k = 0; k < P; ++k)
            values[i * P + k] = local_correlator(gates, b, plan.patterns[k], theta) / run.normalization[k];
    });
    for (std::size_t k = 0; k < P; ++k) {
        std::vector<DecaySample> samples(S * L);
        for (std::size_t i = 0; i < S * L; ++i) samples[i] = DecaySample{plan.lengths[i / S], values[i * P + k], i % S};
        run.patterns.emplace_back(plan.patterns[k], std::move(samples));
    }
    return run;
}

// Single-layer local Clifford shadows of the plan's state; length tag past the grid.
inline std::vector<ShadowRecord> run_local_shadows(const ExperimentPlan& plan, std::size_t shots) {
    const int n = plan.n;
    const auto noise = realize(plan.noise, n);
    const DensityMatrix input = plan.input_state();
    std::vector<ShadowRecord> records(shots);
    parallel_for(shots, plan.workers, [&](std::size_t s) {
        Rng rng = shot_rng(plan, plan.lengths.size(), s);
        std::vector<int> layer(static_cast<std::size_t>(n));
        for (auto& k : layer) k = static_cast<int>(rng.below(24));
        const auto h = tensor_single_qubit(layer);
        const auto b = sample_bitstring(run_sequence(input, GateSequence(n, {h}), noise), rng);
        records[s] = ShadowRecord{h, b, 1};
    });
    return records;
}

inline std::vector<std::uint64_t> submasks(std::uint64_t u) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = u;; s = (s - 1) & u) {
        out.push_back(s);
        if (s == 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Local frame restricted to patterns inside the union of the observables' supports.
// The empty pattern defaults to 1 (trace preservation) when absent.
inline FrameOperator build_local_frame(const std::map<std::uint64_t, double>& coeffs, const std::vector<Observable>& observables, int n) {
    std::uint64_t U = 0;
    for (const auto& o : observables) {
        if (o.n() != n) throw std::invalid_argument("observable dimension mismatch");
        U |= o.support();
    }
    FrameOperator f;
    f.kind = FrameKind::Local;
    f.n = n;
    f.provenance = "local-gateset";
    for (auto w : submasks(U)) {
        auto it = coeffs.find(w);
        double c;
        if (it != coeffs.end()) c = it->second;
        else if (w == 0) c = 1;
        else throw std::invalid_argument("missing local frame coefficient for pattern " + SupportPattern{n, w}.str());
        if (!(c > 0)) throw std::domain_error("local frame coefficient must be positive");
        f.c_w[w] = c;
    }
    return f;
}

inline std::map<std::uint64_t, double> ideal_local_coefficients(int n) {
    std::map<std::uint64_t, double> c;
    for (std::uint64_t w = 0; w < (1ULL << n); ++w) c[w] = 1 / pow3(std::popcount(w));
    return c;
}

}  // namespace rbshadow
