#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bruteoracle.hpp"
#include "fit.hpp"
#include "localshadow.hpp"
#include "plan.hpp"
#include "rbengine.hpp"
#include "shadowest.hpp"

namespace rbshadow {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

// Malformed or inconsistent configuration. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct SweepSpec {
    std::string parameter;  // p, gamma, theta or local_ratio
    std::vector<double> values;
};

struct Config {
    ExperimentPlan plan;
    std::vector<Observable> observables;
    int K = 10;
    std::size_t N = 10000;
    int resamples = kDefaultResamples;
    bool exact = false;
    std::optional<SweepSpec> sweep;
    json resolved;  // explicit form of every field, without workers
};

namespace detail {

inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown field '" + k + "' in " + where);
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline double& noise_field(NoiseSpec& s, const std::string& name) {
    if (name == "p") return s.p;
    if (name == "gamma") return s.gamma;
    if (name == "theta") return s.theta;
    if (name == "local_ratio") return s.local_ratio;
    throw ConfigError("unknown noise parameter: " + name);
}

inline std::string primary_field(NoiseKind k) {
    if (k == NoiseKind::AmplitudeDamping) return "gamma";
    if (k == NoiseKind::CoherentOverrotation) return "theta";
    return "p";
}

inline Matrix read_dense_file(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dense observable file: " + path.string());
    const auto d = Eigen::Index{1} << n;
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) {
            double re;
            if (!(in >> re)) throw ConfigError("dense observable file needs " + std::to_string(d * d) + " real entries");
            m(i, k) = re;
        }
    std::string extra;
    if (in >> extra) throw ConfigError("dense observable file has trailing entries");
    return m;
}

inline Observable parse_observable(const json& j, int n, const std::filesystem::path& base) {
    require_keys(j, {"name", "kind", "terms", "path"}, "observable");
    const auto kind = get_as<std::string>(j, "kind", "observable");
    const std::string name = j.contains("name") ? get_as<std::string>(j, "name", "observable") : kind;
    if (kind == "ghz-fidelity") return ghz_fidelity(n, name);
    if (kind == "pauli-sum") {
        std::vector<std::pair<double, std::string>> terms;
        const auto& t = j.at("terms");
        if (!t.is_array() || t.empty()) throw ConfigError("pauli-sum terms must be a non-empty array");
        for (const auto& term : t) {
            if (!term.is_array() || term.size() != 2 || !term[0].is_number() || !term[1].is_string())
                throw ConfigError("pauli-sum term must be [coefficient, \"string\"]");
            terms.emplace_back(term[0].get<double>(), term[1].get<std::string>());
        }
        try {
            return parse_pauli_sum(name, n, terms);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("pauli-sum: ") + e.what());
        }
    }
    if (kind == "dense-file") {
        auto p = std::filesystem::path(get_as<std::string>(j, "path", "observable"));
        if (p.is_relative()) p = base / p;
        return Observable::dense(name, read_dense_file(p, n));
    }
    throw ConfigError("unknown observable kind: " + kind);
}

inline std::vector<int> default_lengths(Protocol p) {
    if (p == Protocol::SelfcalShadow) return {0, 1, 2, 4, 8, 16};
    if (p == Protocol::LocalGateset) return {2, 3, 4, 6, 8};
    return {1, 2, 4, 8, 16, 32};
}

}  // namespace detail

// Every field is checked; unknown fields are errors. Relative dense-file paths resolve against base.
inline Config parse_config(const json& j, const std::filesystem::path& base = ".") {
    using namespace detail;
    require_keys(j, {"protocol", "n", "noise", "lengths", "shots_per_length", "observables", "mom", "bootstrap", "seed",
                     "exact", "pattern_cap", "patterns", "probe", "state", "sweep", "workers"},
                 "config");
    for (const char* k : {"protocol", "n", "noise", "seed"})
        if (!j.contains(k)) throw ConfigError(std::string("missing required field '") + k + "'");
    Config c;
    auto& plan = c.plan;
    try {
        plan.protocol = parse_protocol(get_as<std::string>(j, "protocol", "config"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    plan.n = get_as<int>(j, "n", "config");
    if (plan.n < 1) throw ConfigError("n must be positive");
    plan.seed = get_as<std::uint64_t>(j, "seed", "config");

    const auto& nj = j.at("noise");
    require_keys(nj, {"kind", "params"}, "noise");
    try {
        plan.noise.kind = parse_noise_kind(get_as<std::string>(nj, "kind", "noise"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (nj.contains("params")) {
        require_keys(nj.at("params"), {"p", "gamma", "theta", "local_ratio"}, "noise.params");
        for (const auto& [k, v] : nj.at("params").items()) {
            if (!v.is_number()) throw ConfigError("noise.params." + k + " must be a number");
            noise_field(plan.noise, k) = v.get<double>();
        }
    }

    if (j.contains("mom")) {
        require_keys(j.at("mom"), {"K", "N"}, "mom");
        if (j.at("mom").contains("K")) c.K = get_as<int>(j.at("mom"), "K", "mom");
        if (j.at("mom").contains("N")) c.N = get_as<std::size_t>(j.at("mom"), "N", "mom");
    }
    if (c.K < 1 || c.N < 1) throw ConfigError("mom.K and mom.N must be >= 1");
    if (j.contains("bootstrap")) {
        require_keys(j.at("bootstrap"), {"resamples"}, "bootstrap");
        c.resamples = get_as<int>(j.at("bootstrap"), "resamples", "bootstrap");
    }
    if (c.resamples < 2) throw ConfigError("bootstrap.resamples must be >= 2");

    plan.lengths = j.contains("lengths") ? get_as<std::vector<int>>(j, "lengths", "config") : default_lengths(plan.protocol);
    if (plan.lengths.empty()) throw ConfigError("lengths must not be empty");
    const std::size_t total = c.K * c.N;
    plan.shots_per_length = j.contains("shots_per_length") ? get_as<std::size_t>(j, "shots_per_length", "config")
                                                           : (total + plan.lengths.size() - 1) / plan.lengths.size();
    if (j.contains("exact")) c.exact = get_as<bool>(j, "exact", "config");
    if (j.contains("pattern_cap")) plan.pattern_cap = get_as<int>(j, "pattern_cap", "config");
    if (plan.pattern_cap < 0) throw ConfigError("pattern_cap must be >= 0");
    if (j.contains("probe")) plan.probe = get_as<std::string>(j, "probe", "config");
    if (j.contains("state")) plan.state = get_as<std::string>(j, "state", "config");
    if (j.contains("workers")) plan.workers = get_as<int>(j, "workers", "config");
    if (plan.workers < 1) throw ConfigError("workers must be >= 1");

    require_cap(plan.n, limits().dense_state_qubits, "simulation");
    if (j.contains("observables")) {
        if (!j.at("observables").is_array()) throw ConfigError("observables must be an array");
        std::set<std::string> names;
        for (const auto& o : j.at("observables")) {
            c.observables.push_back(parse_observable(o, plan.n, base));
            if (!names.insert(c.observables.back().name()).second)
                throw ConfigError("duplicate observable name: " + c.observables.back().name());
        }
    }
    if (is_shadow_protocol(plan.protocol)) {
        if (c.observables.empty()) throw ConfigError("shadow protocols need at least one observable (the first is the filter E)");
        plan.filter = c.observables.front();
    }

    if (j.contains("patterns")) {
        if (plan.protocol != Protocol::LocalGateset) throw ConfigError("patterns apply to local-gateset only");
        for (const auto& s : get_as<std::vector<std::string>>(j, "patterns", "config")) {
            SupportPattern sp;
            try {
                sp = SupportPattern::parse(s);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            if (sp.n != plan.n) throw ConfigError("pattern " + s + " has the wrong length");
            if (sp.w == 0) throw ConfigError("the empty pattern is fixed to 1 and is not measured");
            plan.patterns.push_back(sp.w);
        }
    } else if (plan.protocol == Protocol::LocalGateset) {
        std::uint64_t U = 0;
        for (const auto& o : c.observables) U |= o.support();
        if (U == 0) throw ConfigError("local-gateset needs patterns or observables with non-trivial support");
        for (auto w : submasks(U))
            if (w != 0) plan.patterns.push_back(w);
    }

    if (j.contains("sweep")) {
        const auto& sj = j.at("sweep");
        require_keys(sj, {"parameter", "values"}, "sweep");
        SweepSpec s;
        s.parameter = sj.contains("parameter") ? get_as<std::string>(sj, "parameter", "sweep") : primary_field(plan.noise.kind);
        noise_field(plan.noise, s.parameter);
        s.values = get_as<std::vector<double>>(sj, "values", "sweep");
        if (s.values.empty()) throw ConfigError("sweep.values must not be empty");
        c.sweep = s;
    }

    try {
        plan.validate();
        if (c.sweep)
            for (double v : c.sweep->values) {
                NoiseSpec s = plan.noise;
                noise_field(s, c.sweep->parameter) = v;
                s.validate();
            }
        if (plan.protocol == Protocol::LocalGateset) probe_bloch(plan.probe);
        else plan.input_state();
    } catch (const CapError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    json r;
    r["protocol"] = to_string(plan.protocol);
    r["n"] = plan.n;
    json params;
    params["p"] = plan.noise.p;
    params["gamma"] = plan.noise.gamma;
    params["theta"] = plan.noise.theta;
    params["local_ratio"] = plan.noise.local_ratio;
    r["noise"] = {{"kind", to_string(plan.noise.kind)}, {"params", params}};
    r["lengths"] = plan.lengths;
    r["shots_per_length"] = plan.shots_per_length;
    r["observables"] = j.contains("observables") ? j.at("observables") : json::array();
    r["mom"] = {{"K", c.K}, {"N", c.N}};
    r["bootstrap"] = {{"resamples", c.resamples}};
    r["seed"] = plan.seed;
    r["exact"] = c.exact;
    r["pattern_cap"] = plan.cap();
    r["state"] = plan.resolved_state();
    if (plan.protocol == Protocol::LocalGateset) {
        r["probe"] = plan.probe;
        json pats = json::array();
        for (auto w : plan.patterns) pats.push_back(SupportPattern{plan.n, w}.str());
        r["patterns"] = pats;
    }
    if (c.sweep) r["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    c.resolved = r;
    return c;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, path.parent_path());
}

struct SignalRow {
    std::string pattern;  // local-gateset only
    int m = 0;
    double mean = 0, stderr_ = 0;
    std::size_t shots = 0;
};

struct FitEntry {
    std::string name;  // "lambda" or a support pattern
    DecayFit fit;
};

struct EstimateEntry {
    std::string frame;  // calibrated | uncalibrated
    EstimateReport report;
    std::optional<double> predicted;  // exact expectation of this estimator when available
    std::optional<double> target;     // Tr[O rho]
};

struct PointResult {
    NoiseSpec noise;
    std::vector<SignalRow> rows;
    std::vector<FitEntry> fits;
    std::vector<EstimateEntry> estimates;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<SignalRow> rows_of(const std::vector<LengthSummary>& ls, const std::string& pattern = "") {
    std::vector<SignalRow> out;
    for (const auto& l : ls) out.push_back({pattern, l.m, l.mean, l.stderr_, l.shots});
    return out;
}

inline std::vector<LengthSummary> exact_summary(const std::vector<int>& lengths, const std::vector<double>& values, std::size_t shots) {
    std::vector<LengthSummary> out;
    for (std::size_t i = 0; i < lengths.size(); ++i) out.push_back({lengths[i], values[i], 0.0, shots});
    return out;
}

inline void check_fit(const FitEntry& f, std::vector<std::string>& warnings) {
    if (!f.fit.converged) warnings.push_back("fit " + f.name + " did not converge");
    if (!f.fit.lambda_in_range) warnings.push_back("fit " + f.name + " lambda outside [0, 1]");
}

inline double pauli_expectation(const PauliString& p, const Matrix& rho) { return (pauli_matrix(p) * rho).trace().real(); }

inline std::optional<ChannelSpectrum> exact_spectrum(const ExperimentPlan& plan) {
    if (plan.noise.gate_dependent() || plan.n > limits().exact_qubits) return std::nullopt;
    return channel_spectrum(realize(plan.noise, plan.n).channel);
}

// Shadow estimation records: K*N shots at the shortest grid length, on streams past the grid.
inline ExperimentPlan estimation_plan(const ExperimentPlan& plan, std::size_t shots) {
    ExperimentPlan e = plan;
    e.lengths = {plan.lengths.front()};
    e.shots_per_length = shots;
    e.stream_offset = static_cast<std::uint32_t>(plan.lengths.size() + 2);
    return e;
}

// Exact mean of the estimator over estimation records.
inline double exact_global_estimate(const ExperimentPlan& plan, const ChannelSpectrum& s, const FrameOperator& frame, const Observable& O,
                                    const Matrix& rho) {
    const int L = plan.record_length(plan.lengths.front());
    return exact_estimate(frame, physical_frame(plan.protocol, s, L), L, O, rho);
}

inline double exact_local_estimate(const Channel& ch, const FrameOperator& frame, const Observable& O, const Matrix& rho) {
    double v = 0;
    for (const auto& t : O.expansion()) {
        const auto w = t.p.support();
        v += t.coeff * pauli_expectation(t.p, rho) * c_w_oracle(ch, w) / frame.w(w);
    }
    return v;
}

}  // namespace detail

inline PointResult run_point(const Config& cfg, const ExperimentPlan& plan) {
    using namespace detail;
    PointResult res;
    res.noise = plan.noise;
    const std::size_t L = plan.lengths.size(), S = plan.shots_per_length;
    const std::size_t want = static_cast<std::size_t>(cfg.K) * cfg.N;
    auto boot_rng = [&](std::size_t obs, bool calibrated) {
        return Rng(StreamKey{plan.seed, protocol_id(plan.protocol), plan.point, static_cast<std::uint32_t>(L + 1),
                             static_cast<std::uint32_t>(2 * obs + (calibrated ? 0 : 1))});
    };
    auto report = [&](const Observable& O, std::size_t k, bool calibrated, std::vector<double> values, const FrameOperator& frame,
                      const DecayFit* fit) {
        if (values.size() > want) values.resize(want);
        auto rng = boot_rng(k, calibrated);
        EstimateEntry e;
        e.frame = calibrated ? "calibrated" : "uncalibrated";
        e.report = report_estimate(O.name(), values, cfg.K, cfg.resamples, rng, frame);
        if (fit) e.report.sigma_lambda = fit->sigma_lambda;
        return e;
    };
    auto exact_report = [&](const Observable& O, bool calibrated, double v, const FrameOperator& frame, const DecayFit* fit) {
        EstimateEntry e;
        e.frame = calibrated ? "calibrated" : "uncalibrated";
        e.report.observable = O.name();
        e.report.estimate = v;
        e.report.sigma = 0;
        e.report.K = cfg.K;
        e.report.N = cfg.N;
        e.report.resamples = 0;
        e.report.provenance = frame.provenance;
        e.report.lambda = frame.lambda;
        if (fit) e.report.sigma_lambda = fit->sigma_lambda;
        e.predicted = v;
        return e;
    };
    std::optional<Matrix> rho;
    if (plan.n <= limits().dense_state_qubits) rho = plan.input_state().rho;
    const auto spectrum = exact_spectrum(plan);

    switch (plan.protocol) {
    case Protocol::DihedralRb:
    case Protocol::CliffordRb: {
        std::vector<LengthSummary> ls;
        if (cfg.exact) {
            ls = exact_summary(plan.lengths, exact_signal(plan).values, S);
        } else {
            const auto run = plan.protocol == Protocol::DihedralRb ? run_dihedral_rb(plan) : run_clifford_protocol(plan);
            ls = summarize(run.samples);
        }
        res.rows = rows_of(ls);
        if (L >= 3) res.fits.push_back({"lambda", fit_decay(ls, DecayModel::ExponentialOffset)});
        break;
    }
    case Protocol::SelfcalShadow:
    case Protocol::CliffordShadow: {
        auto run_shadow = [&](const ExperimentPlan& p) {
            return p.protocol == Protocol::SelfcalShadow ? run_selfcal_shadow(p) : run_clifford_protocol(p);
        };
        std::vector<LengthSummary> ls;
        if (cfg.exact) ls = exact_summary(plan.lengths, exact_signal(plan).values, S);
        else ls = summarize(run_shadow(plan).samples);
        res.rows = rows_of(ls);
        std::optional<FrameOperator> cal;
        const DecayFit* fit = nullptr;
        if (L >= 3) {
            res.fits.push_back({"lambda", fit_decay(ls, DecayModel::Exponential)});
            fit = &res.fits.back().fit;
            try {
                cal = build_frame(FrameKind::GlobalPowered, fit->lambda, plan.n, std::nullopt, plan.protocol);
            } catch (const std::domain_error& e) {
                res.warnings.push_back(std::string("calibrated frame unavailable: ") + e.what());
            }
        } else {
            res.warnings.push_back("fewer than 3 lengths: no calibration fit");
        }
        const auto ideal = ideal_frame(plan.n);
        std::vector<ShadowRecord> records;
        if (!cfg.exact) records = run_shadow(estimation_plan(plan, want)).records;
        for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
            const auto& O = cfg.observables[k];
            for (bool calibrated : {true, false}) {
                if (calibrated && !cal) continue;
                const auto& frame = calibrated ? *cal : ideal;
                EstimateEntry e;
                if (cfg.exact) {
                    e = exact_report(O, calibrated, exact_global_estimate(plan, *spectrum, frame, O, *rho), frame, calibrated ? fit : nullptr);
                } else {
                    e = report(O, k, calibrated, estimate_observable(records, frame, O, plan.workers), frame, calibrated ? fit : nullptr);
                    if (spectrum && rho) e.predicted = exact_global_estimate(plan, *spectrum, frame, O, *rho);
                }
                if (rho) e.target = O.expectation(*rho);
                res.estimates.push_back(e);
            }
        }
        break;
    }
    case Protocol::LocalGateset: {
        std::map<std::uint64_t, double> coeffs;
        std::vector<std::vector<LengthSummary>> per;
        if (cfg.exact) {
            for (const auto& [w, vals] : exact_signal(plan).patterns) per.push_back(exact_summary(plan.lengths, vals, S));
        } else {
            for (const auto& [w, samples] : run_local_gateset(plan).patterns) per.push_back(summarize(samples));
        }
        for (std::size_t k = 0; k < plan.patterns.size(); ++k) {
            const auto name = SupportPattern{plan.n, plan.patterns[k]}.str();
            for (auto& r : rows_of(per[k], name)) res.rows.push_back(r);
            if (L >= 3) {
                res.fits.push_back({name, fit_decay(per[k], DecayModel::Exponential)});
                coeffs[plan.patterns[k]] = res.fits.back().fit.lambda;
            }
        }
        if (cfg.observables.empty()) break;
        std::optional<FrameOperator> cal;
        try {
            cal = build_local_frame(coeffs, cfg.observables, plan.n);
            cal->provenance = "local-gateset";
        } catch (const std::exception& e) {
            res.warnings.push_back(std::string("calibrated local frame unavailable: ") + e.what());
        }
        auto ideal = build_local_frame(ideal_local_coefficients(plan.n), cfg.observables, plan.n);
        ideal.provenance = "ideal";
        const auto channel = realize(plan.noise, plan.n).channel;
        std::vector<ShadowRecord> records;
        if (!cfg.exact) records = run_local_shadows(plan, want);
        for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
            const auto& O = cfg.observables[k];
            for (bool calibrated : {true, false}) {
                if (calibrated && !cal) continue;
                const auto& frame = calibrated ? *cal : ideal;
                EstimateEntry e;
                if (cfg.exact) {
                    e = exact_report(O, calibrated, exact_local_estimate(channel, frame, O, *rho), frame, nullptr);
                } else {
                    e = report(O, k, calibrated, estimate_observable(records, frame, O, plan.workers), frame, nullptr);
                    if (rho) e.predicted = exact_local_estimate(channel, frame, O, *rho);
                }
                e.report.lambda = 0;
                if (rho) e.target = O.expectation(*rho);
                res.estimates.push_back(e);
            }
        }
        break;
    }
    }
    for (const auto& f : res.fits) check_fit(f, res.warnings);
    return res;
}

struct RunResult {
    json manifest;
    std::string digest;
    std::vector<PointResult> points;
};

inline std::vector<NoiseSpec> sweep_points(const Config& cfg) {
    if (!cfg.sweep) return {cfg.plan.noise};
    std::vector<NoiseSpec> out;
    for (double v : cfg.sweep->values) {
        NoiseSpec s = cfg.plan.noise;
        detail::noise_field(s, cfg.sweep->parameter) = v;
        out.push_back(s);
    }
    return out;
}

inline json make_manifest(const Config& cfg) {
    json m;
    m["version"] = kVersion;
    m["config"] = cfg.resolved;
    m["rng"] = {{"generator", "philox4x32-10"},
                {"seed", cfg.plan.seed},
                {"protocol_id", protocol_id(cfg.plan.protocol)},
                {"substream", "(seed, protocol-id, point, length-index, shot)"}};
    json pts = json::array();
    const auto noises = sweep_points(cfg);
    for (std::size_t i = 0; i < noises.size(); ++i)
        pts.push_back({{"point", i}, {"noise_kind", to_string(noises[i].kind)}, {"noise_param", noises[i].primary()}});
    m["points"] = pts;
    if (cfg.plan.protocol == Protocol::LocalGateset)
        m["local_normalization"] = "correlator divided by <<theta|Pi_w|theta>>; fitted decay equals p_{w,B}";
    return m;
}

inline RunResult run_experiment(const Config& cfg) {
    RunResult r;
    r.manifest = make_manifest(cfg);
    r.digest = hex64(fnv1a64(r.manifest.dump()));
    const auto noises = sweep_points(cfg);
    for (std::size_t i = 0; i < noises.size(); ++i) {
        ExperimentPlan plan = cfg.plan;
        plan.noise = noises[i];
        plan.point = static_cast<std::uint32_t>(i);
        r.points.push_back(run_point(cfg, plan));
    }
    return r;
}

inline json fit_json(const FitEntry& f) {
    return {{"name", f.name},
            {"model", f.fit.model == DecayModel::Exponential ? "a*lambda^m" : "a*lambda^m+b"},
            {"a", f.fit.a},
            {"b", f.fit.b},
            {"lambda", f.fit.lambda},
            {"sigma_lambda", f.fit.sigma_lambda},
            {"r2", f.fit.r2},
            {"converged", f.fit.converged}};
}

inline json estimate_json(const EstimateEntry& e) {
    json j = {{"observable", e.report.observable},
              {"frame", e.frame},
              {"estimate", e.report.estimate},
              {"sigma", e.report.sigma},
              {"K", e.report.K},
              {"N", e.report.N},
              {"resamples", e.report.resamples},
              {"provenance", e.report.provenance},
              {"lambda", e.report.lambda},
              {"sigma_lambda", e.report.sigma_lambda}};
    if (e.predicted) j["predicted"] = *e.predicted;
    if (e.target) j["target"] = *e.target;
    return j;
}

inline json summary_json(const Config& cfg, const RunResult& r) {
    json s;
    s["version"] = kVersion;
    s["manifest_digest"] = r.digest;
    s["protocol"] = to_string(cfg.plan.protocol);
    s["n"] = cfg.plan.n;
    s["exact"] = cfg.exact;
    json pts = json::array();
    bool warn = false;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points[i];
        json pj;
        pj["point"] = i;
        pj["noise_kind"] = to_string(p.noise.kind);
        pj["noise_param"] = p.noise.primary();
        pj["fits"] = json::array();
        for (const auto& f : p.fits) pj["fits"].push_back(fit_json(f));
        pj["estimates"] = json::array();
        for (const auto& e : p.estimates) pj["estimates"].push_back(estimate_json(e));
        pj["warnings"] = p.warnings;
        warn = warn || !p.warnings.empty();
        pts.push_back(pj);
    }
    s["points"] = pts;
    s["warning"] = warn;
    return s;
}

inline std::string signal_csv(const Config& cfg, const RunResult& r, const std::string& pattern = "") {
    std::ostringstream os;
    os << "protocol,n,noise_kind,noise_param,m,mean,stderr,shots\n";
    for (const auto& p : r.points)
        for (const auto& row : p.rows) {
            if (row.pattern != pattern) continue;
            os << to_string(cfg.plan.protocol) << ',' << cfg.plan.n << ',' << to_string(p.noise.kind) << ',' << fmt_double(p.noise.primary())
               << ',' << row.m << ',' << fmt_double(row.mean) << ',' << fmt_double(row.stderr_) << ',' << row.shots << '\n';
        }
    return os.str();
}

// One row per (grid point, observable); fit columns refer to the global decay.
inline std::string sweep_csv(const Config& cfg, const RunResult& r) {
    std::ostringstream os;
    os << "protocol,n,noise_kind,noise_param,lambda,sigma_lambda,observable,uncalibrated,sigma_uncalibrated,calibrated,sigma_calibrated\n";
    for (const auto& p : r.points) {
        std::string lam = ",";
        for (const auto& f : p.fits)
            if (f.name == "lambda") lam = fmt_double(f.fit.lambda) + ',' + fmt_double(f.fit.sigma_lambda);
        const std::string head = to_string(cfg.plan.protocol) + ',' + std::to_string(cfg.plan.n) + ',' + to_string(p.noise.kind) + ',' +
                                 fmt_double(p.noise.primary()) + ',' + lam + ',';
        if (cfg.observables.empty()) os << head << ",,,,\n";
        for (const auto& O : cfg.observables) {
            std::string unc = ",", cal = ",";
            for (const auto& e : p.estimates) {
                if (e.report.observable != O.name()) continue;
                (e.frame == "calibrated" ? cal : unc) = fmt_double(e.report.estimate) + ',' + fmt_double(e.report.sigma);
            }
            os << head << O.name() << ',' << unc << ',' << cal << '\n';
        }
    }
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

// manifest.json, summary.json, sweep.csv, and signal.csv (one signal_<pattern>.csv per pattern for local-gateset).
inline std::vector<std::filesystem::path> write_outputs(const Config& cfg, const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    auto put = [&](const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        files.push_back(dir / name);
    };
    put("manifest.json", r.manifest.dump(2) + "\n");
    put("summary.json", summary_json(cfg, r).dump(2) + "\n");
    put("sweep.csv", sweep_csv(cfg, r));
    if (cfg.plan.protocol == Protocol::LocalGateset) {
        for (auto w : cfg.plan.patterns) {
            const auto name = SupportPattern{cfg.plan.n, w}.str();
            put("signal_" + name + ".csv", signal_csv(cfg, r, name));
        }
    } else {
        put("signal.csv", signal_csv(cfg, r));
    }
    return files;
}

struct CompareRow {
    std::size_t point = 0;
    double noise_param = 0;
    std::string observable;
    std::optional<double> target;
    double unc_a = 0, cal_a = 0, unc_b = 0, cal_b = 0;
    double sig_unc = 0, sig_cal = 0;  // combined sigma of the differences
    std::optional<double> predicted_bias;  // uncalibrated, from run A
    bool pass = true;
};

// Differences B - A per point and observable; pass when both differences lie within
// tolerance combined sigmas (exact runs: within 1e-12).
inline std::vector<CompareRow> compare_summaries(const json& a, const json& b, double tolerance = 3.0) {
    const auto& pa = a.at("points");
    const auto& pb = b.at("points");
    if (pa.size() != pb.size()) throw ConfigError("runs have different numbers of grid points");
    std::vector<CompareRow> out;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        auto collect = [](const json& p) {
            std::map<std::string, std::map<std::string, json>> m;
            for (const auto& e : p.at("estimates")) m[e.at("observable").get<std::string>()][e.at("frame").get<std::string>()] = e;
            return m;
        };
        const auto ea = collect(pa[i]), eb = collect(pb[i]);
        std::set<std::string> na, nb;
        for (const auto& [k, v] : ea) na.insert(k);
        for (const auto& [k, v] : eb) nb.insert(k);
        if (na != nb) throw ConfigError("runs have mismatched observables");
        for (const auto& name : na) {
            const auto& A = ea.at(name);
            const auto& B = eb.at(name);
            if (!A.count("uncalibrated") || !B.count("uncalibrated")) throw ConfigError("missing uncalibrated estimate for " + name);
            CompareRow r;
            r.point = i;
            r.noise_param = pa[i].at("noise_param").get<double>();
            r.observable = name;
            auto val = [](const std::map<std::string, json>& m, const char* f, const char* key) {
                auto it = m.find(f);
                return it == m.end() ? std::nan("") : it->second.at(key).get<double>();
            };
            r.unc_a = val(A, "uncalibrated", "estimate");
            r.unc_b = val(B, "uncalibrated", "estimate");
            r.cal_a = val(A, "calibrated", "estimate");
            r.cal_b = val(B, "calibrated", "estimate");
            r.sig_unc = std::hypot(val(A, "uncalibrated", "sigma"), val(B, "uncalibrated", "sigma"));
            r.sig_cal = std::hypot(val(A, "calibrated", "sigma"), val(B, "calibrated", "sigma"));
            const auto& ua = A.at("uncalibrated");
            if (ua.contains("target")) r.target = ua.at("target").get<double>();
            if (ua.contains("predicted") && r.target) r.predicted_bias = ua.at("predicted").get<double>() - *r.target;
            auto ok = [&](double x, double y, double s) {
                if (std::isnan(x) && std::isnan(y)) return true;
                return std::abs(y - x) <= std::max(tolerance * s, 1e-12);
            };
            r.pass = ok(r.unc_a, r.unc_b, r.sig_unc) && ok(r.cal_a, r.cal_b, r.sig_cal);
            out.push_back(r);
        }
    }
    return out;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
    os << "point,noise_param,observable,target,uncalibrated_a,calibrated_a,uncalibrated_b,calibrated_b,predicted_bias_uncalibrated,"
          "diff_uncalibrated,diff_calibrated,pass\n";
    for (const auto& r : rows)
        os << r.point << ',' << fmt_double(r.noise_param) << ',' << r.observable << ',' << opt(r.target) << ',' << fmt_double(r.unc_a) << ','
           << fmt_double(r.cal_a) << ',' << fmt_double(r.unc_b) << ',' << fmt_double(r.cal_b) << ',' << opt(r.predicted_bias) << ','
           << fmt_double(r.unc_b - r.unc_a) << ',' << fmt_double(r.cal_b - r.cal_a) << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
    return os.str();
}

}  // namespace rbshadow
