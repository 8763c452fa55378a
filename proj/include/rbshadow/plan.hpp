#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "densitysim.hpp"
#include "noisechan.hpp"
#include "observable.hpp"

namespace rbshadow {

enum class Protocol { DihedralRb, CliffordRb, SelfcalShadow, CliffordShadow, LocalGateset };

inline const std::vector<std::pair<Protocol, std::string>>& protocol_names() {
    static const std::vector<std::pair<Protocol, std::string>> names = {
        {Protocol::DihedralRb, "dihedral-rb"},
        {Protocol::CliffordRb, "clifford-rb"},
        {Protocol::SelfcalShadow, "selfcal-dihedral-shadow"},
        {Protocol::CliffordShadow, "clifford-shadow"},
        {Protocol::LocalGateset, "local-gateset"},
    };
    return names;
}

inline std::string to_string(Protocol p) {
    for (const auto& [k, name] : protocol_names())
        if (k == p) return name;
    return "unknown";
}

inline Protocol parse_protocol(const std::string& s) {
    for (const auto& [k, name] : protocol_names())
        if (name == s) return k;
    throw std::invalid_argument("unknown protocol: " + s);
}

// Substream tag; stable across releases since it enters every random stream.
inline std::uint32_t protocol_id(Protocol p) { return static_cast<std::uint32_t>(p) + 1; }

inline bool is_shadow_protocol(Protocol p) { return p == Protocol::SelfcalShadow || p == Protocol::CliffordShadow; }

// Default cap ceil(log2 n) + 2 on local pattern weight.
inline int default_pattern_cap(int n) {
    int lg = 0;
    while ((1 << lg) < n) ++lg;
    return lg + 2;
}

struct ExperimentPlan {
    Protocol protocol = Protocol::DihedralRb;
    int n = 1;
    std::vector<int> lengths{1, 2, 4, 8, 16, 32};
    std::size_t shots_per_length = 1000;
    NoiseSpec noise;
    std::string state;                  // empty: zeros for RB and local-gateset, ghz for shadows
    std::optional<Observable> filter;   // E for the shadow filters
    std::vector<std::uint64_t> patterns;  // local-gateset support patterns
    std::string probe = "zeros";
    int pattern_cap = 0;                // 0: default_pattern_cap(n)
    std::uint64_t seed = 0;
    std::uint32_t point = 0;
    std::uint32_t stream_offset = 0;    // added to the length index of every shot stream
    int workers = 1;

    std::string resolved_state() const {
        if (!state.empty()) return state;
        return is_shadow_protocol(protocol) ? "ghz" : "zeros";
    }

    int cap() const { return pattern_cap > 0 ? pattern_cap : default_pattern_cap(n); }

    // Noisy gates in a record of grid length m.
    int record_length(int m) const { return protocol == Protocol::SelfcalShadow ? m + 1 : m; }

    void validate() const {
        if (n < 1) throw std::invalid_argument("n must be positive");
        require_cap(n, limits().dense_state_qubits, "simulation");
        if (lengths.empty()) throw std::invalid_argument("lengths must not be empty");
        const int min_len = protocol == Protocol::SelfcalShadow ? 0 : protocol == Protocol::LocalGateset ? 2 : 1;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            if (lengths[i] < min_len)
                throw std::invalid_argument(to_string(protocol) + " lengths must be >= " + std::to_string(min_len));
            if (i > 0 && lengths[i] <= lengths[i - 1]) throw std::invalid_argument("lengths must be strictly increasing");
            if (lengths[i] >= (1 << 20)) throw std::invalid_argument("sequence length too large");
        }
        if (lengths.size() >= (1u << 24)) throw std::invalid_argument("too many lengths");
        if (shots_per_length < 1) throw std::invalid_argument("shots_per_length must be >= 1");
        if (shots_per_length > 0xffffffffULL) throw std::invalid_argument("shots_per_length too large");
        noise.validate();
        if (is_shadow_protocol(protocol)) {
            if (!filter) throw std::invalid_argument("shadow protocols need a filter observable E");
            if (filter->n() != n) throw std::invalid_argument("filter observable has the wrong qubit count");
        }
        if (protocol == Protocol::LocalGateset) {
            if (patterns.empty()) throw std::invalid_argument("local-gateset needs at least one support pattern");
            const std::uint64_t full = (1ULL << n) - 1;
            for (auto w : patterns) {
                if (w & ~full) throw std::invalid_argument("pattern has bits beyond n");
                if (std::popcount(w) > cap())
                    throw CapError("pattern weight " + std::to_string(std::popcount(w)) + " exceeds cap " + std::to_string(cap()));
            }
            if (noise.gate_dependent()) throw std::invalid_argument("local-gateset assumes gate-independent noise");
        }
    }

    DensityMatrix input_state() const { return prepare(resolved_state(), n); }
};

}  // namespace rbshadow
