#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "layerlab/bounds.hpp"

using namespace layerlab;

namespace {
const ProblemConfig ref_cfg{pi, 1.0, 0.1};
const ExponentParams ref_exps{};
}  // namespace

TEST(GreenEnvelopeConstants, ReferenceValues) {
    // Values from a 25-digit evaluation of the constant formulas; k = 20 is
    // integral, so the split offset is 1 and the tail offset 0.
    const auto g = green_envelope_constants(ref_cfg, ref_exps);
    EXPECT_TRUE(g.offsets.integral_k);
    EXPECT_NEAR(g.n_eps, 2.699597572257544, 1e-13);
    EXPECT_NEAR(g.n1_eps, 2.015022551899775, 1e-13);
    EXPECT_NEAR(g.c1_eps, 0.1788617886178862, 1e-14);
    EXPECT_NEAR(g.m_eps, 63.72060800608138, 1e-11);
    EXPECT_NEAR(zeta2, 1.6449340668482264, 1e-15);
}

TEST(GreenEnvelopeConstants, NonIntegralThresholdUsesBeta) {
    const ProblemConfig cfg{pi, 1.0, 0.13};  // k = 15.38...
    ExponentParams e;
    e.beta = 0.3;
    const auto g = green_envelope_constants(cfg, e);
    EXPECT_FALSE(g.offsets.integral_k);
    const long double l = pi, c = 1, eps = 0.13L, q = 0.5L, z = pi * pi / 6.0L, b = 0.3L;
    const long double n1 = 2 * z * (2 * c * l - pi * eps * b) / (q * l * std::sqrt(pi * b) * std::sqrt(4 * c * l - b * pi * eps));
    const long double c1 = 2 * z * (c * l + pi * eps * (1 - b)) / (q * l * pi * (1 - b) * (4 * c * l + pi * eps * (1 - b)));
    EXPECT_NEAR(g.n1_eps, static_cast<double>(n1), 1e-13);
    EXPECT_NEAR(g.c1_eps, static_cast<double>(c1), 1e-13);
}

TEST(GreenEnvelopeConstants, RejectsEpsTooLargeForTheAnalysis) {
    try {
        green_envelope_constants({pi, 1.0, 1.0}, ref_exps);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("eps^{2(1-alpha)}"), std::string::npos);
    }
}

TEST(GreenEnvelopeConstants, ConvergeAsEpsVanishes) {
    // N_eps -> 2 zeta(2)/(q l); N1 and C1 approach finite limits (differences shrink).
    const double limit = 2.0 * zeta2 / (0.5 * pi);
    double prev_gap = INFINITY, prev_n1 = NAN, prev_c1 = NAN, prev_dn1 = INFINITY, prev_dc1 = INFINITY;
    for (double eps = 0.1; eps > 1e-6; eps /= 4.0) {
        const auto g = green_envelope_constants({pi, 1.0, eps}, ref_exps);
        const double gap = std::abs(g.n_eps - limit);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
        if (!std::isnan(prev_n1)) {
            const double dn1 = std::abs(g.n1_eps - prev_n1), dc1 = std::abs(g.c1_eps - prev_c1);
            EXPECT_LE(dn1, prev_dn1);
            EXPECT_LE(dc1, prev_dc1);
            prev_dn1 = dn1;
            prev_dc1 = dc1;
        }
        prev_n1 = g.n1_eps;
        prev_c1 = g.c1_eps;
    }
    EXPECT_LT(prev_gap, 1e-2);
}

TEST(GreenEnvelope, CertifiesReferenceConfiguration) {
    std::vector<double> times;
    for (int j = 1; j <= 200; ++j) times.push_back(50.0 * j / 200);
    const auto rep = certify_green(ref_cfg, ref_exps, 101, times);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.samples.size(), 200u);
    for (const auto& s : rep.samples) {
        EXPECT_GT(s.sampled_max, 0.0);
        EXPECT_LE(s.margin_ratio, 1.0);
    }
}

TEST(ErrorEnvelopeConstants, ReferenceValues) {
    const auto k = error_envelope_constants(ref_cfg, ref_exps, 1.0);
    EXPECT_NEAR(k.Z, 1.349798786128772, 1e-13);
    EXPECT_NEAR(k.Y, 5.399195144515089, 1e-13);
    EXPECT_NEAR(k.W, 0.7451318646416034, 1e-13);
    EXPECT_NEAR(k.V, 0.1466367176702589, 1e-13);
    EXPECT_NEAR(k.U, 0.4433551953027088, 1e-13);
    EXPECT_NEAR(k.S, 0.2644934066848226, 1e-13);
    EXPECT_NEAR(k.eta, 0.04, 1e-15);
}

TEST(ErrorEnvelope, ZeroForZeroSupBound) {
    const auto k = error_envelope_constants(ref_cfg, ref_exps, 0.0);
    for (double t : {0.0, 0.1, 0.5, 1.0}) EXPECT_EQ(error_envelope(t, k, ref_cfg, ref_exps), 0.0);
}

TEST(ErrorEnvelope, QuadraticTermAtHorizonEdge) {
    const auto k = error_envelope_constants(ref_cfg, ref_exps, 1.0);
    const double t = q_epsilon_horizon(ref_cfg, ref_exps);
    EXPECT_NEAR(std::pow(ref_cfg.eps, k.eta) * t * t, 1.0, 1e-14);
    const double env = error_envelope(t, k, ref_cfg, ref_exps);
    EXPECT_TRUE(std::isfinite(env));
    const double rest = env - k.A * ref_cfg.l * k.Z;
    EXPECT_GT(rest, 0.0);
    EXPECT_LT(rest, env);
}

TEST(ErrorEnvelope, RejectsInvalidSupBound) {
    EXPECT_THROW(error_envelope_constants(ref_cfg, ref_exps, -1.0), DomainError);
    EXPECT_THROW(error_envelope_constants(ref_cfg, ref_exps, NAN), DomainError);
}

TEST(ErrorEnvelope, SupOverQEpsStaysBoundedAsEpsVanishes) {
    std::vector<double> sups;
    for (double eps : {0.1, 0.05, 0.025, 0.0125, 0.001, 1e-4}) {
        const ProblemConfig cfg{pi, 1.0, eps};
        const auto k = error_envelope_constants(cfg, ref_exps, 1.0);
        const double T = q_epsilon_horizon(cfg, ref_exps);
        double sup = 0.0;
        for (int j = 1; j <= 2000; ++j) sup = std::max(sup, error_envelope(T * j / 2000.0, k, cfg, ref_exps));
        sups.push_back(sup);
    }
    for (double s : sups) EXPECT_LE(s, 1.05 * sups.front());
}

TEST(ExpPowerBound, EqualityAtTouchingPoint) {
    const auto s = exp_power_bound(1.0, 1.0);
    EXPECT_NEAR(s.lhs, std::exp(-1.0), 1e-15);
    EXPECT_NEAR(s.rhs, std::exp(-1.0), 1e-15);
    for (double a : {0.3, 2.0, 17.0}) {
        const auto e = exp_power_bound(a, a);
        EXPECT_NEAR(e.lhs, e.rhs, 1e-12 * e.rhs);
    }
}

TEST(ExpPowerBound, StrictAwayFromTouchingPoint) {
    const auto s = exp_power_bound(2.0, 5.0);
    EXPECT_LT(s.lhs, s.rhs);
    EXPECT_THROW(exp_power_bound(0.0, 1.0), DomainError);
    EXPECT_THROW(exp_power_bound(1.0, 0.0), DomainError);
}

TEST(ExpPowerBound, RandomisedPropertySweep) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        double a = u(rng), x = u(rng);
        if (a == 0.0 || x == 0.0) continue;
        const auto s = exp_power_bound(a, x);
        if (!(s.lhs <= s.rhs * (1.0 + 1e-14))) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(Horizon, ArithmeticExamples) {
    EXPECT_NEAR(q_epsilon_horizon(ref_cfg, ref_exps), std::pow(0.1, -0.02), 1e-15);
    EXPECT_NEAR(q_epsilon_horizon(ref_cfg, ref_exps), 1.047, 1e-3);
    EXPECT_NEAR(q_epsilon_horizon(0.01, 0.5), std::sqrt(10.0), 1e-14);
    double prev = 0.0;
    for (double eps = 0.2; eps > 1e-4; eps /= 2) {
        const double h = q_epsilon_horizon({pi, 1.0, eps}, ref_exps);
        EXPECT_GT(h, prev);
        prev = h;
    }
}

TEST(ModeInequalities, HoldOnEveryIntegerOfTheirRanges) {
    for (double eps : {0.1, 0.05, 0.01, 0.2, 0.003}) {
        for (const ProblemConfig& cfg : {ProblemConfig{pi, 1.0, eps}, ProblemConfig{2.0, 0.7, eps}}) {
            const auto low = check_low_mode_bounds(cfg, ref_exps);
            const auto layer = check_layer_mode_decay(cfg, ref_exps);
            EXPECT_GT(low.checked, 0);
            EXPECT_GT(layer.checked, 0);
            EXPECT_EQ(low.violations, 0) << "eps=" << eps;
            EXPECT_EQ(layer.violations, 0) << "eps=" << eps;
            EXPECT_GE(low.min_ratio, 1.0);
            EXPECT_GE(layer.min_ratio, 1.0);
        }
    }
}

TEST(EnvelopeReport, CsvLayout) {
    EnvelopeReport r;
    r.add(0.5, 1.0, 4.0);
    r.add(1.0, 3.0, 2.0);
    EXPECT_FALSE(r.passed);
    EXPECT_DOUBLE_EQ(r.max_margin(), 1.5);
    std::ostringstream os;
    write_csv(os, r);
    EXPECT_EQ(os.str(), "t,sampled_max,envelope,margin_ratio\n0.5,1,4,0.25\n1,3,2,1.5\n");
}
