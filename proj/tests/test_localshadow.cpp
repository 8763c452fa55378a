#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbshadow/localshadow.hpp"
#include "test_util.hpp"

using namespace rbshadow;

namespace {

NoiseSpec spec_of(NoiseKind k, double p, double gamma = 0.0) {
    NoiseSpec s;
    s.kind = k;
    s.p = p;
    s.gamma = gamma;
    return s;
}

Observable one_z(int n, int q) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(q)] = 'Z';
    return parse_pauli_sum(s, n, {{1.0, s}});
}

// Same correlator with dense operators: X <- h^dag X h, then projection onto Z_w.
double dense_correlator(const std::vector<std::vector<int>>& gates, std::uint64_t b, std::uint64_t w, const Matrix& theta) {
    const int n = static_cast<int>(gates.front().size());
    const auto d = Eigen::Index{1} << n;
    Matrix X = Matrix::Zero(d, d);
    X(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = 1;
    const Matrix Zw = pauli_matrix(PauliString{n, 0, w});
    for (std::size_t j = gates.size(); j-- > 0;) {
        const Matrix U = unitary_of(tensor_single_qubit(gates[j]));
        X = U.adjoint() * X * U;
        if (j > 0) X = (Zw * X).trace() / static_cast<double>(d) * Zw;
    }
    return (theta * X).trace().real();
}

struct Weighted {
    std::vector<ShadowRecord> records;
    std::vector<double> weights;
};

Weighted all_local_records(int n, const NoiseSpec& spec, const DensityMatrix& rho) {
    const auto noise = realize(spec, n);
    const auto group = enumerate_group(GroupFamily::LocalClifford, n);
    Weighted w;
    for (const auto& g : group) {
        const auto out = run_sequence(rho, GateSequence(n, {g}), noise);
        for (std::uint64_t b = 0; b < (1ULL << n); ++b) {
            w.records.push_back({as_clifford(g), b, 1});
            w.weights.push_back(out.rho(b, b).real() / static_cast<double>(group.size()));
        }
    }
    return w;
}

double weighted_mean(const std::vector<double>& v, const std::vector<double>& w) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * w[i];
    return s;
}

}  // namespace

TEST(SupportPattern, ParseAndPrint) {
    const auto p = SupportPattern::parse("110");
    EXPECT_EQ(p.w, 3u);
    EXPECT_EQ(p.weight(), 2);
    EXPECT_EQ(p.str(), "110");
    EXPECT_EQ(SupportPattern::parse("001").w, 4u);
    EXPECT_THROW(SupportPattern::parse("1a0"), std::invalid_argument);
    EXPECT_THROW(SupportPattern::parse(""), std::invalid_argument);
    EXPECT_EQ(submasks(5).size(), 4u);
    EXPECT_EQ(submasks(0), std::vector<std::uint64_t>{0});
}

TEST(CwOracle, Examples) {
    const double p = 0.1;
    const auto ch = realize(spec_of(NoiseKind::LocalDepolarizing, p), 2).channel;
    EXPECT_NEAR(c_w_oracle(ch, 1), (1 - p) / 3, 1e-14);
    EXPECT_NEAR(c_w_oracle(ch, 3), (1 - p) * (1 - p) / 9, 1e-14);
    EXPECT_NEAR(c_w_oracle(ch, 0), 1.0, 1e-14);
    const auto id = realize(spec_of(NoiseKind::GlobalDepolarizing, 0.0), 3).channel;
    for (std::uint64_t w = 0; w < 8; ++w) EXPECT_NEAR(c_w_oracle(id, w), 1 / pow3(std::popcount(w)), 1e-14);
    EXPECT_THROW(c_w_oracle(ch, 3, 1), CapError);
}

TEST(CwOracle, DoubleSumAndDenseAgree) {
    std::mt19937_64 gen(17);
    for (int n = 1; n <= 3; ++n) {
        std::vector<int> qs(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q) qs[q] = q;
        const auto k = testutil::random_kraus(n, 3, gen);
        const Channel ch(n, {LocalSuperop(qs, k)});
        const auto R = ptm_from_kraus(k);
        for (std::uint64_t w = 0; w < (1ULL << n); ++w) {
            EXPECT_NEAR(c_w_oracle(ch, w), c_w_double_sum(ch, w), 1e-12);
            EXPECT_NEAR(c_w_oracle(ch, w), c_w_oracle(R, w), 1e-12);
        }
    }
    const auto ad = realize(spec_of(NoiseKind::AmplitudeDamping, 0.0, 0.3), 2).channel;
    for (std::uint64_t w = 0; w < 4; ++w) EXPECT_NEAR(c_w_oracle(ad, w), c_w_double_sum(ad, w), 1e-12);
}

TEST(Correlator, MatchesDenseEvaluation) {
    std::mt19937_64 gen(23);
    std::uniform_int_distribution<int> pick(0, 23);
    for (const std::string probe : {"zeros", "plus"}) {
        const auto theta = probe_bloch(probe);
        for (int n = 1; n <= 3; ++n) {
            const Matrix th = prepare(probe, n).rho;
            for (int t = 0; t < 12; ++t) {
                const int m = 1 + t % 4;
                std::vector<std::vector<int>> gates(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(n)));
                for (auto& l : gates)
                    for (auto& k : l) k = pick(gen);
                const std::uint64_t b = gen() % (1ULL << n), w = gen() % (1ULL << n);
                EXPECT_NEAR(local_correlator(gates, b, w, theta), dense_correlator(gates, b, w, th), 1e-12)
                    << probe << " n=" << n << " m=" << m;
            }
        }
    }
}

TEST(LocalFrame, BuildRules) {
    const auto ideal = build_local_frame(ideal_local_coefficients(3), {ghz_fidelity(3)}, 3);
    EXPECT_EQ(ideal.c_w.size(), 8u);
    EXPECT_NEAR(invert_frame(ideal).w(7), 27.0, 1e-12);
    const auto z = build_local_frame({{1, 0.3}}, {one_z(3, 0)}, 3);
    ASSERT_EQ(z.c_w.size(), 2u);
    EXPECT_EQ(z.w(0), 1.0);
    EXPECT_EQ(z.w(1), 0.3);
    EXPECT_THROW(build_local_frame({{1, 0.3}}, {one_z(3, 1)}, 3), std::invalid_argument);
    EXPECT_THROW(build_local_frame({{1, 0.0}}, {one_z(3, 0)}, 3), std::domain_error);
    EXPECT_THROW(build_local_frame({{1, -0.1}}, {one_z(3, 0)}, 3), std::domain_error);
    EXPECT_THROW(build_local_frame({{1, 0.3}}, {one_z(2, 0)}, 3), std::invalid_argument);
}

// Exact average over all 576 local Cliffords at n = 2.
TEST(LocalFrame, OracleFrameUnbiasedInExpectation) {
    const int n = 2;
    const auto ghz = prepare("ghz", n);
    std::vector<Observable> obs{ghz_fidelity(n), one_z(n, 1), parse_pauli_sum("XY", n, {{0.7, "XY"}, {-0.2, "IX"}, {0.1, "II"}})};
    for (auto spec : {spec_of(NoiseKind::GlobalDepolarizing, 0.0), spec_of(NoiseKind::LocalDepolarizing, 0.1),
                      spec_of(NoiseKind::AmplitudeDamping, 0.0, 0.25), spec_of(NoiseKind::BitFlip, 0.07)}) {
        const auto ch = realize(spec, n).channel;
        std::map<std::uint64_t, double> coeffs;
        for (std::uint64_t w = 0; w < 4; ++w) coeffs[w] = c_w_oracle(ch, w);
        const auto frame = build_local_frame(coeffs, obs, n);
        const auto all = all_local_records(n, spec, ghz);
        for (const auto& O : obs)
            EXPECT_NEAR(weighted_mean(estimate_observable(all.records, frame, O), all.weights), O.expectation(ghz.rho), 1e-9)
                << to_string(spec.kind) << " " << O.name();
    }
}

TEST(LocalGateset, ExactSignalIsCwPower) {
    ExperimentPlan plan;
    plan.protocol = Protocol::LocalGateset;
    plan.n = 3;
    plan.lengths = {2, 3, 5};
    plan.noise = spec_of(NoiseKind::LocalDepolarizing, 0.1);
    plan.patterns = {1, 3, 6};
    const auto ex = exact_signal(plan);
    const auto ch = realize(plan.noise, 3).channel;
    for (const auto& [w, vals] : ex.patterns)
        for (std::size_t i = 0; i < vals.size(); ++i) EXPECT_NEAR(vals[i], std::pow(c_w_oracle(ch, w), plan.lengths[i]), 1e-12);
}

TEST(LocalGateset, SampledMeansMatchExact) {
    ExperimentPlan plan;
    plan.protocol = Protocol::LocalGateset;
    plan.n = 2;
    plan.lengths = {2, 3};
    plan.shots_per_length = 20000;
    plan.noise = spec_of(NoiseKind::LocalDepolarizing, 0.1);
    plan.patterns = {1, 2, 3};
    plan.seed = 5;
    for (const std::string probe : {"zeros", "plus"}) {
        plan.probe = probe;
        const auto run = run_local_gateset(plan);
        const auto ex = exact_signal(plan);
        ASSERT_EQ(run.patterns.size(), 3u);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto l = summarize(run.patterns[k].second);
            for (std::size_t i = 0; i < l.size(); ++i)
                EXPECT_NEAR(l[i].mean, ex.patterns[k].second[i], 5 * l[i].stderr_) << probe << " w=" << plan.patterns[k];
        }
    }
}

TEST(LocalGateset, Rejections) {
    ExperimentPlan plan;
    plan.protocol = Protocol::LocalGateset;
    plan.n = 2;
    plan.lengths = {2, 3};
    plan.patterns = {1};
    plan.probe = "ghz";
    EXPECT_THROW(run_local_gateset(plan), std::invalid_argument);
    plan.probe = "zeros";
    plan.noise = spec_of(NoiseKind::GateDependentCnotDepol, 0.1);
    EXPECT_THROW(run_local_gateset(plan), std::invalid_argument);
}
