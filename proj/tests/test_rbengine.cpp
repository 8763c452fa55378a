#include <gtest/gtest.h>

#include <cmath>

#include "rbshadow/bruteoracle.hpp"
#include "rbshadow/rbengine.hpp"

using namespace rbshadow;

namespace {

ExperimentPlan plan_of(Protocol p, int n, NoiseKind k, double param, std::vector<int> lengths, std::size_t shots) {
    ExperimentPlan plan;
    plan.protocol = p;
    plan.n = n;
    plan.noise.kind = k;
    if (k == NoiseKind::AmplitudeDamping) plan.noise.gamma = param;
    else plan.noise.p = param;
    plan.lengths = std::move(lengths);
    plan.shots_per_length = shots;
    plan.seed = 77;
    if (is_shadow_protocol(p)) plan.filter = ghz_fidelity(n);
    return plan;
}

// Sampled per-length means within 5 standard errors of the exact signal.
void expect_matches_exact(const ExperimentPlan& plan, const ProtocolRun& run) {
    const auto exact = exact_signal(plan);
    const auto l = summarize(run.samples);
    ASSERT_EQ(l.size(), exact.values.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        const double tol = 5 * std::max(l[i].stderr_, 1e-3 / std::sqrt(static_cast<double>(l[i].shots)));
        EXPECT_NEAR(l[i].mean, exact.values[i], tol) << to_string(plan.protocol) << " m=" << l[i].m;
    }
}

}  // namespace

TEST(PlanValidation, Rejects) {
    auto p = plan_of(Protocol::DihedralRb, 2, NoiseKind::GlobalDepolarizing, 0.0, {1, 2, 2}, 10);
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.lengths = {0, 1, 2};
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.protocol = Protocol::SelfcalShadow;
    EXPECT_THROW(p.validate(), std::invalid_argument);  // no filter
    p.filter = ghz_fidelity(2);
    EXPECT_NO_THROW(p.validate());
    p.shots_per_length = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = plan_of(Protocol::LocalGateset, 3, NoiseKind::LocalDepolarizing, 0.1, {1, 2, 3}, 10);
    p.patterns = {1};
    EXPECT_THROW(p.validate(), std::invalid_argument);  // m = 1
    p.lengths = {2, 3, 4};
    p.pattern_cap = 1;
    p.patterns = {3};
    EXPECT_THROW(p.validate(), CapError);
    EXPECT_EQ(default_pattern_cap(8), 5);
    EXPECT_EQ(default_pattern_cap(1), 2);
    p = plan_of(Protocol::DihedralRb, 9, NoiseKind::GlobalDepolarizing, 0.0, {1, 2, 3}, 10);
    EXPECT_THROW(p.validate(), CapError);
    EXPECT_EQ(parse_protocol("selfcal-dihedral-shadow"), Protocol::SelfcalShadow);
    EXPECT_THROW(parse_protocol("rb"), std::invalid_argument);
}

TEST(DihedralRb, NoiselessSurvivesAlways) {
    const auto plan = plan_of(Protocol::DihedralRb, 3, NoiseKind::GlobalDepolarizing, 0.0, {1, 2, 4, 8}, 50);
    const auto run = run_dihedral_rb(plan);
    ASSERT_EQ(run.samples.size(), 200u);
    for (const auto& s : run.samples) EXPECT_EQ(s.value, 1.0);
    const auto f = fit_decay(run.samples, DecayModel::ExponentialOffset);
    EXPECT_NEAR(f.lambda, 1.0, 1e-12);
}

TEST(DihedralRb, BitFlipMatchesClosedForm) {
    const auto plan = plan_of(Protocol::DihedralRb, 2, NoiseKind::BitFlip, 0.05, {1, 2, 4, 8, 16}, 4000);
    const auto run = run_dihedral_rb(plan);
    expect_matches_exact(plan, run);
    const auto f = fit_decay(run.samples, DecayModel::ExponentialOffset);
    const double lz = (4 * 0.95 * 0.95 - 1) / 3;
    EXPECT_NEAR(f.lambda, lz, 3 * f.sigma_lambda);
}

TEST(CliffordRb, NoiselessAndDepolarizing) {
    auto plan = plan_of(Protocol::CliffordRb, 2, NoiseKind::GlobalDepolarizing, 0.0, {1, 2, 4}, 30);
    for (const auto& s : run_clifford_protocol(plan).samples) EXPECT_EQ(s.value, 1.0);
    plan = plan_of(Protocol::CliffordRb, 2, NoiseKind::GlobalDepolarizing, 0.04, {1, 2, 4, 8, 16}, 4000);
    const auto run = run_clifford_protocol(plan);
    expect_matches_exact(plan, run);
    const auto f = fit_decay(run.samples, DecayModel::ExponentialOffset);
    EXPECT_NEAR(f.lambda, 0.96, 3 * f.sigma_lambda);
}

TEST(CliffordRb, AmplitudeDampingLambdaAdj) {
    const auto plan = plan_of(Protocol::CliffordRb, 2, NoiseKind::AmplitudeDamping, 0.1, {1, 2, 4, 8, 16}, 4000);
    const auto run = run_clifford_protocol(plan);
    expect_matches_exact(plan, run);
    const auto f = fit_decay(run.samples, DecayModel::ExponentialOffset);
    EXPECT_NEAR(f.lambda, closed_form_lambdas(plan.noise, 2).second, 3 * f.sigma_lambda);
}

TEST(SelfcalShadow, NoiselessFilterIsFlat) {
    const auto plan = plan_of(Protocol::SelfcalShadow, 2, NoiseKind::GlobalDepolarizing, 0.0, {0, 1, 2, 4}, 3000);
    const auto run = run_selfcal_shadow(plan);
    ASSERT_EQ(run.records.size(), run.samples.size());
    for (const auto& l : summarize(run.samples)) EXPECT_NEAR(l.mean, 0.75, 5 * l.stderr_);
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        EXPECT_EQ(run.records[i].m, run.samples[i].m + 1);
        EXPECT_TRUE(run.records[i].g_end.is_symplectic());
    }
}

TEST(SelfcalShadow, SampledMatchesExact) {
    const auto plan = plan_of(Protocol::SelfcalShadow, 3, NoiseKind::LocalDepolarizing, 0.05, {0, 1, 2, 4}, 4000);
    expect_matches_exact(plan, run_selfcal_shadow(plan));
}

TEST(CliffordShadow, SampledMatchesExact) {
    const auto plan = plan_of(Protocol::CliffordShadow, 2, NoiseKind::AmplitudeDamping, 0.2, {1, 2, 4}, 4000);
    const auto run = run_clifford_protocol(plan);
    expect_matches_exact(plan, run);
    for (std::size_t i = 0; i < run.records.size(); ++i) EXPECT_EQ(run.records[i].m, run.samples[i].m);
}

TEST(Engine, WorkerCountDoesNotChangeResults) {
    auto plan = plan_of(Protocol::SelfcalShadow, 3, NoiseKind::AmplitudeDamping, 0.1, {0, 1, 3}, 200);
    plan.workers = 1;
    const auto a = run_selfcal_shadow(plan);
    plan.workers = 3;
    const auto b = run_selfcal_shadow(plan);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].value, b.samples[i].value);
        EXPECT_EQ(a.records[i].b, b.records[i].b);
        EXPECT_EQ(a.records[i].g_end, b.records[i].g_end);
    }
    plan.seed += 1;
    const auto c = run_selfcal_shadow(plan);
    int same = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) same += a.records[i].g_end == c.records[i].g_end;
    EXPECT_LT(same, 5);
}

TEST(Engine, WrongRunnerRejected) {
    const auto plan = plan_of(Protocol::CliffordRb, 2, NoiseKind::GlobalDepolarizing, 0.0, {1, 2, 3}, 10);
    EXPECT_THROW(run_dihedral_rb(plan), std::invalid_argument);
    EXPECT_THROW(run_selfcal_shadow(plan), std::invalid_argument);
}
