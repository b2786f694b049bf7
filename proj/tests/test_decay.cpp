#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace oonaudit;

TEST(Decay, OracleAgreesWithBisection) {
    for (int L : {5, 10, 50, 100, 200, 500, 700, 1000, 5000}) {
        for (double f : {0.1, 0.2, 0.3}) {
            if (std::floor(f * L) < 1) continue;
            const auto m = calibrate(L, f, 0.7);
            EXPECT_NEAR(m.rate, testkit::newton_rate(L, f, 0.7), 1e-9 * m.rate) << L << " " << f;
        }
    }
}

TEST(Decay, FrozenRates) {
    const auto m500 = calibrate(500, 0.2, 0.7);
    EXPECT_NEAR(m500.rate, 0.0120, 5e-5);
    EXPECT_NEAR(m500.rate, 0.01198152341458495, 1e-12);
    EXPECT_LT(std::abs(calibration_residual(m500)), 1e-10);
    EXPECT_NEAR(calibrate(100, 0.2, 0.7).rate, 0.05990761707292477, 1e-12);
    // at a timeline length of 700 the unit-at-rank-1 amplitude lands on 1.009 to three decimals
    EXPECT_NEAR(calibrate(700, 0.2, 0.7).amplitude, 1.009, 5e-4);
}

TEST(Decay, UnitAtRankOneAndExplicitAmplitude) {
    const auto m = calibrate(500, 0.2, 0.7);
    EXPECT_DOUBLE_EQ(visibility(m, 1), 1.0);
    EXPECT_NEAR(m.amplitude, std::exp(m.rate), 1e-15);
    const auto e = calibrate(500, 0.2, 0.7, 0.5);
    EXPECT_EQ(e.amplitude, 0.5);
    EXPECT_EQ(e.rate, m.rate);
    EXPECT_THROW(calibrate(500, 0.2, 0.7, 1.5), ConfigError);
}

TEST(Decay, ReferenceVisibility) {
    const auto m = fixed_decay(1.009, 0.0120, 500);
    EXPECT_NEAR(visibility(m, 100), 1.009 * std::exp(-1.2), 1e-15);
    EXPECT_NEAR(visibility(m, 100), 0.303905, 1e-6);
}

TEST(Decay, DegenerateConstraint) {
    EXPECT_THROW(calibrate(500, 0.2, 0.2 + 5e-7), DegenerateConstraintError);
    EXPECT_THROW(calibrate(500, 0.2, 0.2), DegenerateConstraintError);
    EXPECT_THROW(calibrate(500, 0.3, 0.2), DegenerateConstraintError);
    EXPECT_NO_THROW(calibrate(500, 0.2, 0.2 + 1e-3));
    EXPECT_LT(calibrate(500, 0.2, 0.2 + 1e-3).rate, 1e-4);
    EXPECT_THROW(calibrate(4, 0.2, 0.7), ConfigError);
    EXPECT_THROW(calibrate(500, 0.0, 0.7), ConfigError);
    EXPECT_THROW(calibrate(500, 0.2, 1.0), ConfigError);
}

TEST(DecayProperty, ResidualAndBounds) {
    testkit::Gen gen(21);
    for (int i = 0; i < 300; ++i) {
        const int L = gen.integer(5, 3000);
        const double f = gen.uniform(1.0 / L, 0.6);
        const double a = gen.uniform(f + 0.05, 0.99);
        DecayModel m;
        try {
            m = calibrate(L, f, a);
        } catch (const ConfigError&) {
            EXPECT_LT(std::floor(f * L), 1.0);
            continue;
        }
        EXPECT_LT(std::abs(calibration_residual(m)), 1e-10);
        EXPECT_GT(m.rate, 0.0);
        EXPECT_GT(m.amplitude, 0.0);
        for (int r = 1; r <= L; r += std::max(1, L / 50)) {
            const double v = visibility(m, r);
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0);
            EXPECT_GT(v, visibility(m, r + 1));
        }
    }
}

TEST(DecayProperty, ScaleCovariance) {
    for (int L : {100, 250, 500, 700}) {
        const double base = calibrate(L, 0.2, 0.7).rate * L;
        for (int k : {2, 4}) {
            const double scaled = calibrate(k * L, 0.2, 0.7).rate * k * L;
            EXPECT_NEAR(scaled / base, 1.0, 0.01) << L << "x" << k;
        }
    }
}
