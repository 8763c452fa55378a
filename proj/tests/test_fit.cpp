#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbshadow/fit.hpp"
#include "rbshadow/rng.hpp"

using namespace rbshadow;

namespace {

std::vector<LengthSummary> exact_data(double a, double lam, double b, const std::vector<int>& ms) {
    std::vector<LengthSummary> out;
    for (int m : ms) out.push_back({m, a * std::pow(lam, m) + b, 0.0, 1});
    return out;
}

}  // namespace

TEST(Philox, KnownAnswer) {
    const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r[0], 0x6627e8d5u);
    EXPECT_EQ(r[1], 0xe169c58du);
    EXPECT_EQ(r[2], 0xbc57ac4cu);
    EXPECT_EQ(r[3], 0x9b00dbd8u);
    const auto s = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(s[0], 0x408f276du);
    EXPECT_EQ(s[1], 0x41c83b0eu);
    EXPECT_EQ(s[2], 0xa20bc7c6u);
    EXPECT_EQ(s[3], 0x6d5451fdu);
}

TEST(Philox, StreamsAreIndependentOfOrder) {
    Rng a(StreamKey{9, 1, 2, 3, 4}), b(StreamKey{9, 1, 2, 3, 5});
    std::vector<std::uint32_t> first;
    for (int i = 0; i < 10; ++i) first.push_back(a());
    for (int i = 0; i < 10; ++i) b();
    Rng a2(StreamKey{9, 1, 2, 3, 4});
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a2(), first[i]);
    Rng c(StreamKey{9, 1, 2, 3, 4});
    EXPECT_NE(Rng(StreamKey{9, 1, 2, 4, 4})(), c());
    EXPECT_THROW(Rng(StreamKey{0, 256, 0, 0, 0}), std::invalid_argument);
    Rng u(StreamKey{1, 0, 0, 0, 0});
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
        EXPECT_LT(u.below(7), 7u);
    }
}

TEST(Summarize, MeansAndErrors) {
    const std::vector<DecaySample> s{{2, 1.0, 0}, {1, 0.0, 1}, {2, 3.0, 2}, {1, 1.0, 3}, {1, 2.0, 4}};
    const auto l = summarize(s);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0].m, 1);
    EXPECT_DOUBLE_EQ(l[0].mean, 1.0);
    EXPECT_NEAR(l[0].stderr_, std::sqrt(1.0 / 3), 1e-15);
    EXPECT_EQ(l[1].shots, 2u);
    EXPECT_DOUBLE_EQ(l[1].mean, 2.0);
}

TEST(FitDecay, ExactRecoveryWithOffset) {
    const auto f = fit_decay(exact_data(0.5, 0.9, 0.1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), DecayModel::ExponentialOffset);
    EXPECT_NEAR(f.a, 0.5, 1e-8);
    EXPECT_NEAR(f.lambda, 0.9, 1e-8);
    EXPECT_NEAR(f.b, 0.1, 1e-8);
    EXPECT_GE(f.r2, 1 - 1e-10);
    EXPECT_TRUE(f.converged);
    EXPECT_TRUE(f.lambda_in_range);
}

TEST(FitDecay, ExactRecoveryNoOffset) {
    for (double lam : {0.3, 0.75, 0.99, 1.0}) {
        const auto f = fit_decay(exact_data(-0.8, lam, 0.0, {1, 2, 4, 8, 16, 32}), DecayModel::Exponential);
        EXPECT_NEAR(f.lambda, lam, 1e-8);
        EXPECT_NEAR(f.a, -0.8, 1e-8);
        EXPECT_EQ(f.b, 0.0);
    }
}

TEST(FitDecay, ConstantDataPrefersNoOffset) {
    const auto f = fit_decay(exact_data(0.0, 0.5, 1.0, {1, 2, 4, 8}), DecayModel::ExponentialOffset);
    EXPECT_NEAR(f.lambda, 1.0, 1e-10);
    EXPECT_NEAR(f.a, 1.0, 1e-10);
    EXPECT_NEAR(f.b, 0.0, 1e-10);
    EXPECT_NEAR(f.a + f.b, 1.0, 1e-12);
}

TEST(FitDecay, Errors) {
    EXPECT_THROW(fit_decay(exact_data(1, 0.9, 0, {1, 2}), DecayModel::Exponential), std::invalid_argument);
    EXPECT_THROW(fit_decay(exact_data(0, 0.9, 0, {1, 2, 3}), DecayModel::Exponential), std::invalid_argument);
    EXPECT_THROW(fit_decay(exact_data(1, 0.9, 0, {3, 2, 1}), DecayModel::Exponential), std::invalid_argument);
}

TEST(FitDecay, OutOfRangeIsFlagged) {
    const auto f = fit_decay(exact_data(0.5, 1.05, 0.0, {1, 2, 3, 4}), DecayModel::Exponential);
    EXPECT_NEAR(f.lambda, 1.05, 1e-8);
    EXPECT_FALSE(f.lambda_in_range);
}

TEST(FitDecay, ShotOrderInvariant) {
    std::mt19937_64 gen(4);
    std::vector<DecaySample> s;
    for (int m : {1, 2, 4, 8})
        for (int i = 0; i < 200; ++i) s.push_back({m, std::pow(0.9, m) * 0.5 + 0.5 > std::uniform_real_distribution<>()(gen) ? 1.0 : 0.0, 0});
    const auto f1 = fit_decay(s, DecayModel::ExponentialOffset);
    std::reverse(s.begin(), s.end());
    const auto f2 = fit_decay(s, DecayModel::ExponentialOffset);
    EXPECT_NEAR(f1.lambda, f2.lambda, 1e-12);
}

// Binomial survival data: 3 reported sigma should cover the truth >= 95% of the time.
TEST(FitDecay, SigmaCoverage) {
    const double a = 0.5, lam = 0.9, b = 0.5;
    const std::vector<int> ms{1, 2, 4, 8, 16, 32};
    const int shots = 10000, trials = 200;
    int covered = 0;
    std::mt19937_64 gen(2024);
    for (int t = 0; t < trials; ++t) {
        std::vector<LengthSummary> l;
        for (int m : ms) {
            const double q = a * std::pow(lam, m) + b;
            std::binomial_distribution<int> bin(shots, q);
            const double mean = bin(gen) / double(shots);
            l.push_back({m, mean, std::sqrt(mean * (1 - mean) / (shots - 1)), static_cast<std::size_t>(shots)});
        }
        const auto f = fit_decay(l, DecayModel::ExponentialOffset);
        covered += std::abs(f.lambda - lam) <= 3 * f.sigma_lambda;
    }
    EXPECT_GE(covered, 190);
}
