/*
 * Copyright 2026 The vawtopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vawt/scaling.hpp"

using namespace vawt;

namespace {

std::vector<ScalePoint> law_grid(double c, double a, double b) {
    std::vector<ScalePoint> pts;
    for (double l : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (double v : {0.75, 1.0, 1.5, 2.0, 3.0}) pts.push_back({l, v, c * std::pow(l, a) * std::pow(v, b)});
    return pts;
}

/// Independent piecewise-linear interpolation.
double interp(const TorqueCurve& c, double w) {
    auto it = std::upper_bound(c.omega.begin(), c.omega.end(), w);
    std::size_t i = it == c.omega.begin() ? 0 : static_cast<std::size_t>(it - c.omega.begin()) - 1;
    if (i + 1 >= c.omega.size()) i = c.omega.size() - 2;
    double t = (w - c.omega[i]) / (c.omega[i + 1] - c.omega[i]);
    return c.torque[i] * (1 - t) + c.torque[i + 1] * t;
}

}  // namespace

TEST(Efficiency, ReferenceExample) {
    OperatingPoint op;
    op.torque = 10.1;
    op.angular_velocity = 1.0;
    op.wind_speed = 3.0;
    op.air_density = 1.225;
    op.swept_area = 1.5 * 2.0;
    auto e = scaling::efficiency(op);
    EXPECT_NEAR(e.eta, 10.1 / 49.6125, 1e-15);
    EXPECT_NEAR(e.eta, 0.2036, 1e-4);
    EXPECT_FALSE(e.betz_warning);
    op.torque = 0.0;
    EXPECT_EQ(scaling::efficiency(op).eta, 0.0);
    op.torque = 30.0;
    EXPECT_TRUE(scaling::efficiency(op).betz_warning);
    op.wind_speed = 0.0;
    EXPECT_THROW(scaling::efficiency(op), ZeroWind);
}

TEST(ScaleTorquePower, DirectEvaluation) {
    auto id = scaling::scale_torque_power(1.7, 2.3, {1, 1, 1});
    EXPECT_EQ(id.torque, 1.7);
    EXPECT_DOUBLE_EQ(id.power, 1.7 * 2.3);
    EXPECT_EQ(id.angular_velocity, 2.3);
    auto l2 = scaling::scale_torque_power(1, 1, {2, 1, 1});
    EXPECT_DOUBLE_EQ(l2.torque, 32);
    EXPECT_DOUBLE_EQ(l2.power, 32);
    auto t2 = scaling::scale_torque_power(1, 1, {1, 2, 1});
    EXPECT_DOUBLE_EQ(t2.torque, 0.25);
    EXPECT_DOUBLE_EQ(t2.power, 0.125);
    EXPECT_THROW(scaling::scale_torque_power(1, 1, {0, 1, 1}), InvalidArgument);
}

TEST(Similarity, FromSpeed) {
    auto s = scaling::similarity_from_speed(10, 2);
    EXPECT_DOUBLE_EQ(s.params.lambda_t, 5);
    EXPECT_EQ(s.params.lambda_rho, 1);
    EXPECT_DOUBLE_EQ(s.viscosity_mismatch, 20);
    auto one = scaling::similarity_from_speed(1, 1);
    EXPECT_EQ(one.params.lambda_t, 1);
    EXPECT_EQ(one.viscosity_mismatch, 1);
    EXPECT_THROW(scaling::similarity_from_speed(-1, 1), InvalidArgument);
}

TEST(Similarity, PowerAndTorqueExponents) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        double ll = std::exp(u(rng)), lv = std::exp(u(rng));
        auto sp = scaling::similarity_from_speed(ll, lv).params;
        auto r = scaling::scale_torque_power(1.3, 0.7, sp);
        EXPECT_NEAR(r.power / (1.3 * 0.7), ll * ll * lv * lv * lv, 1e-12 * ll * ll * lv * lv * lv);
        EXPECT_NEAR(r.torque / 1.3, ll * ll * ll * lv * lv, 1e-12 * ll * ll * ll * lv * lv);
    }
}

TEST(Similarity, EfficiencyInvariant) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    OperatingPoint op{4.2, 3.1, 3.0, 1.225, 3.0};
    double eta = scaling::efficiency(op).eta;
    for (int i = 0; i < 100; ++i) {
        auto sp = scaling::similarity_from_speed(std::exp(u(rng)), std::exp(u(rng))).params;
        EXPECT_NEAR(scaling::efficiency(scaling::scale_operating_point(op, sp)).eta, eta, 1e-12);
    }
}

TEST(Similarity, CompositionIsComponentwiseProduct) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        ScalingParams a{std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))};
        ScalingParams b{std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))};
        auto s2 = scaling::scale_torque_power(2.0, 1.5, b);
        auto s12 = scaling::scale_torque_power(s2.torque, s2.angular_velocity, a);
        auto direct = scaling::scale_torque_power(2.0, 1.5, a.compose(b));
        EXPECT_NEAR(s12.torque, direct.torque, 1e-12 * std::abs(direct.torque));
        EXPECT_NEAR(s12.power, direct.power, 1e-12 * std::abs(direct.power));
        EXPECT_NEAR(s12.angular_velocity, direct.angular_velocity, 1e-12 * direct.angular_velocity);
    }
}

TEST(RatedPower, LinearCurveQuarterProduct) {
    const double m0 = 2.7, w0 = 11.0;
    TorqueCurve c{{0.01 * w0, w0}, {m0 * (1 - 0.01), 0.0}};
    auto r = scaling::rated_power(c);
    EXPECT_NEAR(r.power, m0 * w0 / 4, 1e-12);
    EXPECT_NEAR(r.angular_velocity, w0 / 2, 1e-12);
    EXPECT_NEAR(r.torque, m0 / 2, 1e-12);
}

TEST(RatedPower, IncreasingTorquePeaksAtRightEnd) {
    TorqueCurve c{{1, 2, 3, 4}, {0.5, 0.7, 0.8, 0.85}};
    auto r = scaling::rated_power(c);
    EXPECT_EQ(r.angular_velocity, 4);
    EXPECT_DOUBLE_EQ(r.power, 3.4);
}

TEST(RatedPower, RandomConcaveCurvesMatchBruteForce) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        TorqueCurve c;
        double w = 0.2 + u(rng), m = 1 + u(rng), slope = 0.1 * u(rng);
        for (int i = 0; i < 10; ++i) {
            c.omega.push_back(w);
            c.torque.push_back(m);
            double dw = 0.2 + u(rng);
            w += dw;
            m += slope * dw;
            slope -= 0.3 + u(rng);  // decreasing slopes: concave
        }
        auto r = scaling::rated_power(c);
        double best = -1e300;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            double x = c.omega.front() + (c.omega.back() - c.omega.front()) * i / (n - 1.0);
            best = std::max(best, x * interp(c, x));
        }
        EXPECT_NEAR(r.power, best, 1e-6 * std::abs(best));
        EXPECT_GE(r.power, best - 1e-12);
        EXPECT_NEAR(r.torque, interp(c, r.angular_velocity), 1e-12);
    }
}

TEST(RatedPower, SubdivisionInvariant) {
    TorqueCurve c{{1, 2, 3, 5, 6}, {3.0, 2.8, 2.2, 1.0, 0.2}};
    auto r = scaling::rated_power(c);
    TorqueCurve fine;
    for (std::size_t i = 0; i + 1 < c.omega.size(); ++i)
        for (int k = 0; k < 4; ++k) {
            double t = k / 4.0;
            fine.omega.push_back(c.omega[i] * (1 - t) + c.omega[i + 1] * t);
            fine.torque.push_back(c.torque[i] * (1 - t) + c.torque[i + 1] * t);
        }
    fine.omega.push_back(c.omega.back());
    fine.torque.push_back(c.torque.back());
    auto rf = scaling::rated_power(fine);
    EXPECT_NEAR(rf.power, r.power, 1e-12);
    EXPECT_NEAR(rf.angular_velocity, r.angular_velocity, 1e-12);
}

TEST(RatedPower, Preconditions) {
    EXPECT_THROW(scaling::rated_power({{1}, {1}}), TooFewSamples);
    EXPECT_THROW(scaling::rated_power({{2, 1}, {1, 1}}), InvalidArgument);
    EXPECT_THROW(scaling::rated_power({{0, 1}, {1, 1}}), InvalidArgument);
    EXPECT_THROW(scaling::rated_power({{1, 2}, {1}}), ShapeMismatch);
}

TEST(PowerLaw, RecoversFittedRotorLaw) {
    auto f = scaling::fit_power_law(law_grid(0.34, 1.95, 3.05));
    EXPECT_NEAR(f.prefactor, 0.34, 1e-6);
    EXPECT_NEAR(f.exponent_l, 1.95, 1e-6);
    EXPECT_NEAR(f.exponent_v, 3.05, 1e-6);
    EXPECT_LT(f.residual, 1e-10);
    EXPECT_FALSE(f.dropped_l || f.dropped_v);
}

TEST(PowerLaw, RecoversIdealSimilarity) {
    auto f = scaling::fit_power_law(law_grid(1.7, 2.0, 3.0));
    EXPECT_NEAR(f.exponent_l, 2.0, 1e-6);
    EXPECT_NEAR(f.exponent_v, 3.0, 1e-6);
}

TEST(PowerLaw, SingleSpeedDropsExponent) {
    std::vector<ScalePoint> pts;
    for (double l : {0.5, 1.0, 2.0, 3.0}) pts.push_back({l, 1.5, 0.34 * std::pow(l, 1.95) * std::pow(1.5, 3.05)});
    auto f = scaling::fit_power_law(pts);
    EXPECT_TRUE(f.dropped_v);
    EXPECT_EQ(f.exponent_v, 0.0);
    EXPECT_NEAR(f.exponent_l, 1.95, 1e-9);
}

TEST(PowerLaw, CollinearDesignRankDeficient) {
    std::vector<ScalePoint> pts;
    for (double l : {0.5, 1.0, 2.0, 3.0}) pts.push_back({l, l, std::pow(l, 5)});
    EXPECT_THROW(scaling::fit_power_law(pts), RankDeficient);
    EXPECT_THROW(scaling::fit_power_law({{1, 1, 1}, {2, 2, 2}}), TooFewSamples);
    EXPECT_THROW(scaling::fit_power_law({{1, 1, 1}, {2, 2, -2}, {3, 1, 1}}), InvalidArgument);
}

TEST(PowerLaw, UnbiasedUnderLogNoise) {
    const int seeds = 200;
    const double sd = 0.05;
    double sum_a = 0, sum_b = 0, sum_a2 = 0, sum_b2 = 0;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::normal_distribution<double> z(0, sd);
        auto pts = law_grid(0.34, 1.95, 3.05);
        for (auto& p : pts) p.value *= std::exp(z(rng));
        auto f = scaling::fit_power_law(pts);
        sum_a += f.exponent_l;
        sum_b += f.exponent_v;
        sum_a2 += f.exponent_l * f.exponent_l;
        sum_b2 += f.exponent_v * f.exponent_v;
    }
    double ma = sum_a / seeds, mb = sum_b / seeds;
    double se_a = std::sqrt((sum_a2 / seeds - ma * ma) / seeds), se_b = std::sqrt((sum_b2 / seeds - mb * mb) / seeds);
    EXPECT_LT(std::abs(ma - 1.95), 3 * se_a);
    EXPECT_LT(std::abs(mb - 3.05), 3 * se_b);
}

TEST(TorqueLaw, RecoversExponentsAndRecordsSigns) {
    auto f = scaling::rated_torque_law(law_grid(0.2, 2.92, 2.09));
    EXPECT_NEAR(f.exponent_l, 2.92, 1e-6);
    EXPECT_NEAR(f.exponent_v, 2.09, 1e-6);
    auto g = scaling::rated_torque_law(law_grid(0.2, 3.0, 2.0));
    EXPECT_NEAR(g.exponent_l, 3.0, 1e-6);
    EXPECT_NEAR(g.exponent_v, 2.0, 1e-6);
    auto pts = law_grid(0.2, 3.0, 2.0);
    pts[4].value = -pts[4].value;
    auto h = scaling::rated_torque_law(pts);
    ASSERT_EQ(h.negative_indices, (std::vector<std::size_t>{4}));
    EXPECT_NEAR(h.exponent_l, 3.0, 1e-6);
}

TEST(TorqueCoefficient, InverseConversions) {
    double m = scaling::torque_from_ct(0.336, 1.225, 0.22, 3.0, 3.0);
    EXPECT_NEAR(m, 0.336 * 0.5 * 1.225 * 0.22 * 3.0 * 9.0, 1e-15);
    EXPECT_NEAR(scaling::ct_from_torque(m, 1.225, 0.22, 3.0, 3.0), 0.336, 1e-15);
    EXPECT_THROW(scaling::ct_from_torque(1, 1.225, 0.22, 3.0, 0.0), ZeroWind);
}

TEST(CurveCsv, RoundTripWithMetadata) {
    TorqueCurve c{{1.5, 2.5, 3.5}, {0.9, 0.7, -0.1}, 3.0, 2.0};
    auto text = scaling::csv::write_curve(c);
    EXPECT_EQ(text.rfind("# wind_speed=3\n# lambda_l=2\nomega_rad_s,torque_Nm\n", 0), 0u);
    auto back = scaling::csv::read_curve(text);
    EXPECT_EQ(back.omega, c.omega);
    EXPECT_EQ(back.torque, c.torque);
    EXPECT_EQ(back.wind_speed, 3.0);
    EXPECT_EQ(back.lambda_l, 2.0);
    EXPECT_THROW(scaling::csv::read_curve("w,M\n1,2\n"), SchemaError);
    try {
        scaling::csv::read_curve("omega_rad_s,torque_Nm\n1,2\n2\n");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ScaleCsv, RoundTrip) {
    auto pts = law_grid(0.34, 1.95, 3.05);
    auto back = scaling::csv::read_scale_points(scaling::csv::write_scale_points(pts));
    ASSERT_EQ(back.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(back[i].value, pts[i].value);
    EXPECT_THROW(scaling::csv::read_scale_points("lambda_l,value\n"), SchemaError);
}
