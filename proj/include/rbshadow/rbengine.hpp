#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "densitysim.hpp"
#include "fit.hpp"
#include "gategroups.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "rng.hpp"

namespace rbshadow {

// One shot of a shadow protocol; m counts the noisy gates in the record.
struct ShadowRecord {
    CliffordElement g_end;
    std::uint64_t b = 0;
    int m = 0;
};

struct ProtocolRun {
    std::vector<DecaySample> samples;  // length-major, shot order
    std::vector<ShadowRecord> records;  // shadow protocols only, same order
};

inline Rng shot_rng(const ExperimentPlan& plan, std::size_t length_index, std::size_t shot) {
    return Rng(StreamKey{plan.seed, protocol_id(plan.protocol), plan.point, static_cast<std::uint32_t>(length_index + plan.stream_offset),
                         static_cast<std::uint32_t>(shot)});
}

namespace detail {

template <class ShotFn>
ProtocolRun run_shots(const ExperimentPlan& plan, bool keep_records, ShotFn&& shot_fn) {
    const std::size_t S = plan.shots_per_length, L = plan.lengths.size();
    std::vector<DecaySample> samples(S * L);
    std::vector<ShadowRecord> records(keep_records ? S * L : 0);
    parallel_for(S * L, plan.workers, [&](std::size_t i) {
        const std::size_t li = i / S, s = i % S;
        Rng rng = shot_rng(plan, li, s);
        const int m = plan.lengths[li];
        ShadowRecord rec;
        samples[i] = DecaySample{m, shot_fn(m, rng, rec), s};
        if (keep_records) records[i] = std::move(rec);
    });
    return ProtocolRun{std::move(samples), std::move(records)};
}

inline void require(const ExperimentPlan& plan, std::initializer_list<Protocol> allowed) {
    plan.validate();
    for (auto p : allowed)
        if (plan.protocol == p) return;
    throw std::invalid_argument("plan protocol " + to_string(plan.protocol) + " does not match this runner");
}

}  // namespace detail

// Survival of |0..0> after m random gates and the physical (noisy) inverse.
inline ProtocolRun run_rb(const ExperimentPlan& plan) {
    detail::require(plan, {Protocol::DihedralRb, Protocol::CliffordRb});
    const auto noise = realize(plan.noise, plan.n);
    const auto input = plan.input_state();
    const bool dihedral = plan.protocol == Protocol::DihedralRb;
    return detail::run_shots(plan, false, [&](int m, Rng& rng, ShadowRecord&) {
        GateSequence seq(plan.n);
        for (int i = 0; i < m; ++i) {
            if (dihedral) seq.push_back(sample_dihedral(plan.n, rng));
            else seq.push_back(sample_clifford(plan.n, rng));
        }
        seq.push_back(seq.inverse_gate());
        const auto out = run_sequence(input, seq, noise);
        return sample_bitstring(out, rng) == 0 ? 1.0 : 0.0;
    });
}

inline ProtocolRun run_dihedral_rb(const ExperimentPlan& plan) {
    detail::require(plan, {Protocol::DihedralRb});
    return run_rb(plan);
}

// (d+1)(<b|U E U^dag|b> - Tr[E]/d)
inline double adj_filter(const Observable& E, const CliffordElement& g_end, std::uint64_t b) {
    const double d = E.dim();
    std::optional<Matrix> U;
    if (!E.is_pauli()) U = unitary_of(g_end);
    return (d + 1) * (E.basis_value(g_end, b, U ? &*U : nullptr) - E.trace() / d);
}

namespace detail {

inline ProtocolRun run_shadow(const ExperimentPlan& plan) {
    const auto noise = realize(plan.noise, plan.n);
    const auto input = plan.input_state();
    const bool selfcal = plan.protocol == Protocol::SelfcalShadow;
    const Observable& E = *plan.filter;
    return run_shots(plan, true, [&](int m, Rng& rng, ShadowRecord& rec) {
        GateSequence seq(plan.n);
        seq.push_back(sample_clifford(plan.n, rng));
        const int rest = selfcal ? m : m - 1;
        for (int i = 0; i < rest; ++i) {
            if (selfcal) seq.push_back(sample_dihedral(plan.n, rng));
            else seq.push_back(sample_clifford(plan.n, rng));
        }
        const auto out = run_sequence(input, seq, noise);
        rec.b = sample_bitstring(out, rng);
        rec.g_end = as_clifford(seq.end_gate());
        rec.m = static_cast<int>(seq.size());
        return adj_filter(E, rec.g_end, rec.b);
    });
}

}  // namespace detail

// One Clifford then m dihedral gates, no inverse; records hold m + 1 gates.
inline ProtocolRun run_selfcal_shadow(const ExperimentPlan& plan) {
    detail::require(plan, {Protocol::SelfcalShadow});
    return detail::run_shadow(plan);
}

// clifford-rb: survival with inverse. clifford-shadow: m Cliffords, filtered like the self-calibrating scheme.
inline ProtocolRun run_clifford_protocol(const ExperimentPlan& plan) {
    detail::require(plan, {Protocol::CliffordRb, Protocol::CliffordShadow});
    if (plan.protocol == Protocol::CliffordRb) return run_rb(plan);
    return detail::run_shadow(plan);
}

}  // namespace rbshadow
