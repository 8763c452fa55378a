#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbshadow/gategroups.hpp"
#include "rbshadow/noisechan.hpp"
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

const NoiseKind kClosed[] = {NoiseKind::GlobalDepolarizing, NoiseKind::LocalDepolarizing, NoiseKind::BitFlip,
                             NoiseKind::AmplitudeDamping, NoiseKind::Dephasing};

}  // namespace

TEST(NoiseSpec, Names) {
    for (const auto& [k, name] : noise_kind_names()) EXPECT_EQ(parse_noise_kind(name), k);
    EXPECT_THROW(parse_noise_kind("depolarising"), std::invalid_argument);
    NoiseSpec s = spec_of(NoiseKind::BitFlip, 1.2);
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = spec_of(NoiseKind::AmplitudeDamping, 0.0, -0.1);
    EXPECT_THROW(realize(s, 2), std::invalid_argument);
    s = spec_of(NoiseKind::GateDependentCnotDepol, 0.5);
    s.local_ratio = 3;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Realize, GlobalDepolarizingZeroIsIdentity) {
    const auto m = realize(spec_of(NoiseKind::GlobalDepolarizing, 0.0), 2);
    EXPECT_TRUE(m.channel.is_identity());
    EXPECT_LT((superop(m.channel).matrix() - SuperOp::identity(2).matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Realize, LocalDepolarizingIsTensorPower) {
    const double p = 0.13;
    for (int n = 1; n <= 3; ++n) {
        const auto R = superop(realize(spec_of(NoiseKind::LocalDepolarizing, p), n).channel);
        for (Eigen::Index i = 0; i < R.dim(); ++i)
            for (Eigen::Index j = 0; j < R.dim(); ++j) {
                const auto w = PauliString::from_index(n, static_cast<std::uint64_t>(i)).weight();
                EXPECT_NEAR(R(i, j), i == j ? std::pow(1 - p, w) : 0.0, 1e-12);
            }
    }
}

TEST(Realize, GateDependentClasses) {
    NoiseSpec s = spec_of(NoiseKind::GateDependentCnotDepol, 0.2);
    s.local_ratio = 0.1;
    const auto m = realize(s, 3);
    ASSERT_TRUE(m.cnot_noise && m.single_noise);
    EXPECT_TRUE(m.channel.is_identity());
    const auto two = ptm_from_kraus(m.cnot_noise->kraus);
    for (Eigen::Index i = 1; i < 16; ++i) EXPECT_NEAR(two(i, i), 0.8, 1e-12);
    const auto one = ptm_from_kraus(m.single_noise->kraus);
    for (Eigen::Index i = 1; i < 4; ++i) EXPECT_NEAR(one(i, i), 1 - 0.02, 1e-12);

    NoiseSpec r;
    r.kind = NoiseKind::CoherentOverrotation;
    r.theta = 0.05;
    const auto o = realize(r, 2);
    ASSERT_TRUE(o.overrotation);
    EXPECT_DOUBLE_EQ(*o.overrotation, 0.05);
}

TEST(Realize, AllChannelsCptp) {
    for (NoiseKind k : kClosed)
        for (int n = 1; n <= 2; ++n) {
            const auto ch = realize(spec_of(k, 0.3, 0.4), n).channel;
            const auto R = superop(ch);
            EXPECT_TRUE(R.is_trace_preserving()) << to_string(k);
            for (const auto& op : ch.ops())
                if (const auto* l = std::get_if<LocalSuperop>(&op)) {
                    EXPECT_NO_THROW(check_kraus(l->kraus));
                }
            // Choi positivity of the whole channel
            const auto d = Eigen::Index{1} << n;
            Matrix choi = Matrix::Zero(d * d, d * d);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) {
                    Matrix e = Matrix::Zero(d, d);
                    e(i, j) = 1;
                    choi.block(i * d, j * d, d, d) = ch(e);
                }
            Eigen::SelfAdjointEigenSolver<Matrix> es(choi);
            EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10) << to_string(k);
        }
}

TEST(Realize, AmplitudeDampingIsNotUnital) {
    const auto R = superop(realize(spec_of(NoiseKind::AmplitudeDamping, 0.0, 0.3), 2).channel);
    EXPECT_TRUE(R.is_trace_preserving());
    EXPECT_FALSE(R.is_unital());
    const auto D = superop(realize(spec_of(NoiseKind::Dephasing, 0.3), 2).channel);
    EXPECT_TRUE(D.is_unital());
}

TEST(ClosedForm, SpecExamples) {
    auto [lz, la] = closed_form_lambdas(spec_of(NoiseKind::BitFlip, 0.1), 2);
    EXPECT_NEAR(lz, (4 * 0.81 - 1) / 3, 1e-14);
    EXPECT_NEAR(la, (16 * 0.81 - 1) / 15, 1e-14);
    std::tie(lz, la) = closed_form_lambdas(spec_of(NoiseKind::LocalDepolarizing, 0.1), 2);
    EXPECT_NEAR(lz, 0.87, 1e-14);
    EXPECT_NEAR(la, 0.846, 1e-14);
    for (NoiseKind k : kClosed) {
        std::tie(lz, la) = closed_form_lambdas(spec_of(k, 0.0, 0.0), 3);
        // amplitude damping with p = 0 and gamma = 0 is the identity
        EXPECT_NEAR(lz, 1.0, 1e-14);
        EXPECT_NEAR(la, 1.0, 1e-14);
    }
    NoiseSpec g;
    g.kind = NoiseKind::CoherentOverrotation;
    EXPECT_THROW(closed_form_lambdas(g, 2), std::invalid_argument);
}

TEST(ClosedForm, AgreesWithRealizedChannels) {
    const double grid[] = {0.0, 0.05, 0.1, 0.3, 0.5};
    for (NoiseKind k : kClosed)
        for (int n = 1; n <= 3; ++n)
            for (double p : grid) {
                const double gamma = k == NoiseKind::AmplitudeDamping ? 0.7 * p + 0.1 : 0.0;
                const double pp = k == NoiseKind::AmplitudeDamping ? 1 - p : p;
                const auto s = spec_of(k, pp, gamma);
                const auto R = superop(realize(s, n).channel);
                auto [lz, la] = closed_form_lambdas(s, n);
                if (k == NoiseKind::AmplitudeDamping) lz = amplitude_damping_lambda_Z(pp, gamma, n);
                EXPECT_NEAR(lambda_Z_of(R), lz, 1e-9) << to_string(k) << " n=" << n << " p=" << p;
                EXPECT_NEAR(lambda_adj_of(R), la, 1e-9) << to_string(k) << " n=" << n << " p=" << p;
            }
}

// The lemma's lambda_Z for amplitude damping drops a 2^(n-k) factor for the
// undamped qubits; it is exact only at n = 1 or at the endpoints p = 0, 1.
TEST(ClosedForm, AmplitudeDampingLemmaZ) {
    for (int n = 1; n <= 3; ++n)
        for (double p : {0.0, 0.4, 1.0}) {
            const auto s = spec_of(NoiseKind::AmplitudeDamping, p, 0.3);
            const double realized = lambda_Z_of(superop(realize(s, n).channel));
            const double lemma = closed_form_lambdas(s, n).first;
            EXPECT_NEAR(realized, amplitude_damping_lambda_Z(p, 0.3, n), 1e-12);
            if (n == 1 || p == 0.0 || p == 1.0) {
                EXPECT_NEAR(realized, lemma, 1e-12);
            } else {
                EXPECT_GT(std::abs(realized - lemma), 1e-3);
            }
        }
    // n = 2 by hand: (4 + (2-p+(p-1)g)^2 - (2-p)^2 - 1)/3 vs ((2-(1-p)g)^2 - 1)/3
    const double p = 0.5, g = 0.2;
    const double lemma = (4 + std::pow(2 - p + (p - 1) * g, 2) - std::pow(2 - p, 2) - 1) / 3;
    EXPECT_NEAR(closed_form_lambdas(spec_of(NoiseKind::AmplitudeDamping, p, g), 2).first, lemma, 1e-15);
    EXPECT_NEAR(amplitude_damping_lambda_Z(p, g, 2), (std::pow(1.9, 2) - 1) / 3, 1e-15);
}

TEST(ClosedForm, BiasRatio) {
    EXPECT_NEAR(bias_ratio(spec_of(NoiseKind::GlobalDepolarizing, 0.37), 3), 0.0, 1e-15);
    EXPECT_NEAR(bias_ratio(spec_of(NoiseKind::LocalDepolarizing, 0.1), 2), 0.87 / 0.846 - 1, 1e-14);
    EXPECT_GT(bias_ratio(spec_of(NoiseKind::LocalDepolarizing, 0.1), 2), 0.028);
    EXPECT_NEAR(bias_ratio(spec_of(NoiseKind::BitFlip, 0.1), 2), (3.24 - 1) / 3 / ((12.96 - 1) / 15) - 1, 1e-14);
    EXPECT_LT(bias_ratio(spec_of(NoiseKind::BitFlip, 0.1), 2), -0.063);
    EXPECT_THROW(bias_ratio(spec_of(NoiseKind::GlobalDepolarizing, 1.0), 2), std::domain_error);
}

TEST(LocalSuperop, MatchesKrausOnRandomPlacement) {
    std::mt19937_64 gen(11);
    const int n = 3;
    const auto kr = testutil::random_kraus(2, 3, gen);
    const LocalSuperop op({0, 1}, kr);
    Matrix rho = testutil::random_unitary(n, gen);
    rho = rho * rho.adjoint();
    for (const std::vector<int>& where : {std::vector<int>{0, 1}, {2, 0}, {1, 2}}) {
        Matrix got = rho;
        op.apply_on(got, where);
        Matrix expect = Matrix::Zero(8, 8);
        for (const auto& k : kr) {
            const Matrix K = embed(k, where, n);
            expect += K * rho * K.adjoint();
        }
        EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(op.apply_on(rho, {0}), std::invalid_argument);
}
