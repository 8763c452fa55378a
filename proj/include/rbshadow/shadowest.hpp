#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bruteoracle.hpp"
#include "observable.hpp"
#include "parallel.hpp"
#include "rbengine.hpp"
#include "rng.hpp"

namespace rbshadow {

enum class FrameKind { Global, GlobalPowered, Local };

inline std::string to_string(FrameKind k) {
    switch (k) {
    case FrameKind::Global: return "global";
    case FrameKind::GlobalPowered: return "global-powered";
    case FrameKind::Local: return "local";
    }
    return "unknown";
}

// Spectral frame operator. Coefficients always describe M itself; `inverted`
// marks the record as M^-1, so inversion is a flag flip and round-trips exactly.
struct FrameOperator {
    FrameKind kind = FrameKind::Global;
    int n = 1;
    double c_triv = 1;
    double c_adj = 0;                  // Global
    double lambda = 1;                 // GlobalPowered: c_adj(L) = lambda^L/(d+1)
    std::optional<int> exponent;       // GlobalPowered with a fixed exponent
    std::map<std::uint64_t, double> c_w;  // Local
    bool inverted = false;
    std::string provenance = "ideal";

    double d() const { return std::pow(2.0, n); }

    // Coefficient of M on the adj sector for a record with L noisy gates.
    double frame_adj(int L) const {
        if (kind == FrameKind::Global) return c_adj;
        if (kind == FrameKind::GlobalPowered) return std::pow(lambda, exponent.value_or(L)) / (d() + 1);
        throw std::logic_error("local frames have no adj coefficient");
    }

    double frame_w(std::uint64_t w) const {
        auto it = c_w.find(w);
        if (it == c_w.end()) throw std::out_of_range("frame has no coefficient for pattern " + std::to_string(w));
        return it->second;
    }

    // Coefficients of the operator this record stands for.
    double triv() const { return inverted ? 1 / c_triv : c_triv; }
    double adj(int L = 1) const { return inverted ? 1 / frame_adj(L) : frame_adj(L); }
    double w(std::uint64_t pattern) const { return inverted ? 1 / frame_w(pattern) : frame_w(pattern); }

    // Coefficients of M^-1.
    double inv_triv() const { return 1 / c_triv; }
    double inv_adj(int L = 1) const { return 1 / frame_adj(L); }
    double inv_w(std::uint64_t pattern) const { return 1 / frame_w(pattern); }
};

inline FrameOperator ideal_frame(int n) {
    FrameOperator f;
    f.n = n;
    f.c_adj = 1 / (std::pow(2.0, n) + 1);
    return f;
}

// Global frame from an RB decay. Powered frames use lambda^(m+1) for the dihedral
// scheme and lambda^m for the Clifford scheme; without m the record's own gate count is used.
inline FrameOperator build_frame(FrameKind kind, double lambda, int n, std::optional<int> m = std::nullopt,
                                 Protocol scheme = Protocol::SelfcalShadow) {
    if (!(lambda > 0) || lambda > 1.1 || !std::isfinite(lambda))
        throw std::domain_error("calibrated lambda must lie in (0, 1.1]; frame not invertible");
    if (n < 1) throw std::invalid_argument("n must be positive");
    FrameOperator f;
    f.kind = kind;
    f.n = n;
    f.lambda = lambda;
    if (kind == FrameKind::Global) {
        f.c_adj = lambda / (f.d() + 1);
        f.provenance = lambda == 1 ? "ideal" : "rb-calibrated";
    } else if (kind == FrameKind::GlobalPowered) {
        if (m) {
            if (*m < 0) throw std::invalid_argument("frame exponent must be >= 0");
            f.exponent = scheme == Protocol::SelfcalShadow ? *m + 1 : *m;
        }
        f.provenance = "rb-calibrated-powered";
    } else {
        throw std::invalid_argument("local frames are built from pattern coefficients");
    }
    return f;
}

inline FrameOperator invert_frame(const FrameOperator& f) {
    if (f.kind == FrameKind::Local) {
        for (const auto& [w, c] : f.c_w)
            if (!(c > 0)) throw std::domain_error("zero frame coefficient for pattern " + std::to_string(w));
    } else if (!(f.c_triv > 0) || (f.kind == FrameKind::Global && !(f.c_adj > 0)) || (f.kind == FrameKind::GlobalPowered && !(f.lambda > 0))) {
        throw std::domain_error("frame has a zero coefficient");
    }
    FrameOperator g = f;
    g.inverted = !f.inverted;
    return g;
}

namespace detail {

inline void check_estimable(const FrameOperator& frame, const Observable& O) {
    if (O.n() != frame.n) throw std::invalid_argument("observable dimension mismatch");
}

}  // namespace detail

// <<O| M^-1 Ad^dag(g) |b>> per record. Accepts M or its inverse record.
inline std::vector<double> estimate_observable(const std::vector<ShadowRecord>& records, const FrameOperator& frame,
                                               const Observable& O, int workers = 1) {
    detail::check_estimable(frame, O);
    const FrameOperator M = frame.inverted ? invert_frame(frame) : frame;
    std::vector<double> out(records.size());
    if (M.kind == FrameKind::Local) {
        std::vector<std::pair<double, PauliString>> terms;
        for (const auto& t : O.expansion()) terms.emplace_back(t.coeff * M.inv_w(t.p.support()), t.p);
        parallel_for(records.size(), workers, [&](std::size_t i) {
            const auto& r = records[i];
            if (r.g_end.n() != O.n()) throw std::invalid_argument("record dimension mismatch");
            double v = 0;
            for (const auto& [c, p] : terms) v += c * Observable::pauli_basis_value(r.g_end, p, r.b);
            out[i] = v;
        });
        return out;
    }
    const double t = O.trace() / O.dim();
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const auto& r = records[i];
        if (r.g_end.n() != O.n()) throw std::invalid_argument("record dimension mismatch");
        std::optional<Matrix> U;
        if (!O.is_pauli()) U = unitary_of(r.g_end);
        const double bv = O.basis_value(r.g_end, r.b, U ? &*U : nullptr);
        out[i] = t * M.inv_triv() + M.inv_adj(r.m) * (bv - t);
    });
    return out;
}

inline double plain_mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) s += v[i];
    return s / static_cast<double>(end - begin);
}

// Contiguous groups of floor(N/K) values; the remainder is dropped.
inline double median_of_means(const std::vector<double>& values, int K) {
    if (values.empty()) throw std::invalid_argument("median of means of no values");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    const std::size_t N = values.size() / static_cast<std::size_t>(K);
    if (N == 0) throw std::invalid_argument("fewer values than groups");
    std::vector<double> means(static_cast<std::size_t>(K));
    for (std::size_t k = 0; k < means.size(); ++k) means[k] = plain_mean(values, k * N, (k + 1) * N);
    std::sort(means.begin(), means.end());
    const std::size_t h = means.size() / 2;
    return means.size() % 2 ? means[h] : 0.5 * (means[h - 1] + means[h]);
}

inline constexpr int kDefaultResamples = 200;

// Sample standard deviation of the median-of-means statistic over bootstrap resamples.
inline double bootstrap_sigma(const std::vector<double>& values, int K, int resamples, Rng& rng) {
    if (values.empty()) throw std::invalid_argument("bootstrap of no values");
    if (resamples < 2) throw std::invalid_argument("need at least 2 resamples");
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    std::vector<double> draw(values.size());
    for (auto& s : stats) {
        for (auto& x : draw) x = values[rng.below(values.size())];
        s = median_of_means(draw, K);
    }
    const double mu = plain_mean(stats, 0, stats.size());
    double ss = 0;
    for (double s : stats) ss += (s - mu) * (s - mu);
    return std::sqrt(ss / (stats.size() - 1));
}

struct EstimateReport {
    std::string observable;
    double estimate = 0;
    double sigma = 0;
    int K = 10;
    std::size_t N = 0;  // values per group
    int resamples = kDefaultResamples;
    std::string provenance;
    double lambda = 1;
    double sigma_lambda = 0;  // reported, not propagated
};

inline EstimateReport report_estimate(const std::string& name, const std::vector<double>& values, int K, int resamples, Rng& rng,
                                      const FrameOperator& frame) {
    EstimateReport r;
    r.observable = name;
    r.K = K;
    r.N = values.size() / static_cast<std::size_t>(std::max(K, 1));
    r.resamples = resamples;
    r.estimate = median_of_means(values, K);
    r.sigma = bootstrap_sigma(values, K, resamples, rng);
    r.provenance = frame.provenance;
    r.lambda = frame.lambda;
    return r;
}

// (lambda_Z - 1)(Tr[O rho] - Tr[O]/d)
inline double predict_uncalibrated_bias(double lambda_Z, const Observable& O, const Matrix& rho) {
    return (lambda_Z - 1) * (O.expectation(rho) - O.trace() / O.dim());
}

// Exact mean of estimate_observable for a global frame when the physical frame is known.
inline double exact_estimate(const FrameOperator& estimate_frame, const GlobalCoefficients& physical, int L, const Observable& O,
                             const Matrix& rho) {
    const FrameOperator M = estimate_frame.inverted ? invert_frame(estimate_frame) : estimate_frame;
    const double t = O.trace() / O.dim();
    return physical.triv * M.inv_triv() * t * rho.trace().real() + physical.adj * M.inv_adj(L) * (O.expectation(rho) - t * rho.trace().real());
}

inline constexpr double kDihedralVarianceConstant = 25.0;

struct VarianceBounds {
    double dihedral = 0;
    std::optional<double> clifford;  // not applicable at n = 1
};

// Clifford: (d+1) 2^(2n-1) / (lambda^2 (d-1)(d^2-4)) (Tr^2 O + Tr O^2).
// Dihedral: c Tr[O_0^2] / lambda^(2L) with O_0 the traceless part.
inline VarianceBounds variance_bounds(const Observable& O, double lambda, int n, int L = 1,
                                      double c = kDihedralVarianceConstant) {
    if (!(lambda > 0)) throw std::domain_error("lambda must be positive");
    if (O.n() != n) throw std::invalid_argument("observable dimension mismatch");
    const double d = std::pow(2.0, n), tr = O.trace(), tr2 = O.trace_sq();
    VarianceBounds v;
    v.dihedral = c * (tr2 - tr * tr / d) / std::pow(lambda, 2 * L);
    if (n >= 2) v.clifford = (d + 1) * std::pow(2.0, 2 * n - 1) / (lambda * lambda * (d - 1) * (d * d - 4)) * (tr * tr + tr2);
    return v;
}

}  // namespace rbshadow
