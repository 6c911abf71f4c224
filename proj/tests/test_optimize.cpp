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
#include <atomic>
#include <cmath>
#include <memory>

#include "vawt/gpr.hpp"
#include "vawt/optimize.hpp"
#include "vawt/oracle.hpp"

using namespace vawt;

namespace {

const OracleConfig kOracle{};

Surrogate counting(std::shared_ptr<std::uint64_t> calls, const DesignSpaceBounds& b, bool* infeasible_seen) {
    return Surrogate("counting", [calls, b, infeasible_seen](const DesignPoint& x) {
        ++*calls;
        if (!is_feasible(x, b)) *infeasible_seen = true;
        return oracle::evaluate(x, kOracle);
    });
}

}  // namespace

TEST(Improvement, Examples) {
    EXPECT_NEAR(opt::improvement(0.336, 0.2585), 0.2998, 1e-4);
    EXPECT_EQ(opt::improvement(0.27, 0.27), 0.0);
    EXPECT_DOUBLE_EQ(opt::improvement(0.2, 0.4), -0.5);
    EXPECT_THROW(opt::improvement(0.3, 0.0), ZeroBaseline);
}

TEST(Maximize, OracleReachesPeak) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto r = opt::maximize(s, b, 100000, seed);
        EXPECT_NEAR(r.ct_star, 0.336, 1e-3) << "seed " << seed;
        EXPECT_NEAR(r.improvement_vs_baseline, 0.30, 0.01);
        EXPECT_LE(r.evaluations, 100000u);
        EXPECT_TRUE(is_feasible(r.x_star, b));
        EXPECT_DOUBLE_EQ(r.ct_star, s.predict(r.x_star));
    }
}

TEST(Maximize, ConstantSurrogate) {
    SearchOptions o;
    o.baseline_ct = 0.2;
    auto r = opt::maximize(Surrogate::constant(0.2), DesignSpaceBounds::defaults(), 500, 3, o);
    EXPECT_EQ(r.ct_star, 0.2);
    EXPECT_EQ(r.improvement_vs_baseline, 0.0);
    EXPECT_TRUE(is_feasible(r.x_star, DesignSpaceBounds::defaults()));
}

TEST(Maximize, NeverInfeasibleAndRespectsBudget) {
    auto b = DesignSpaceBounds::defaults();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto calls = std::make_shared<std::uint64_t>(0);
        bool bad = false;
        auto r = opt::maximize(counting(calls, b, &bad), b, 1000, seed);
        EXPECT_TRUE(is_feasible(r.x_star, b));
        EXPECT_FALSE(bad);
        EXPECT_EQ(r.evaluations, *calls);
        EXPECT_LE(r.evaluations, 1000u);
    }
}

TEST(Maximize, DeterministicPerSeed) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    auto r1 = opt::maximize(s, b, 5000, 42), r2 = opt::maximize(s, b, 5000, 42);
    EXPECT_EQ(r1.x_star, r2.x_star);
    EXPECT_EQ(r1.ct_star, r2.ct_star);
    EXPECT_EQ(r1.evaluations, r2.evaluations);
}

TEST(Maximize, NestedBudgetsAreMonotone) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    double prev = -1;
    for (std::uint64_t budget : {100, 300, 1000, 3000, 10000, 30000}) {
        auto r = opt::maximize(s, b, budget, 9);
        EXPECT_GE(r.ct_star, prev);
        prev = r.ct_star;
    }
}

TEST(Maximize, DominatesItsStarts) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    auto r = opt::maximize(s, b, 20000, 5);
    FeasibleSampler sampler(b, 5);
    for (std::uint64_t i = 0; i < r.starts; ++i) EXPECT_GE(r.ct_star, s.predict(sampler.next()));
}

TEST(Maximize, DominatesBruteForceGrid) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    auto grid = opt::brute_force(s, b, 5);
    EXPECT_LE(grid.evaluations, 15625u);
    for (std::uint64_t seed = 0; seed < 3; ++seed) EXPECT_GE(opt::maximize(s, b, 100000, seed).ct_star, grid.ct_star - 1e-6);
}

TEST(Maximize, RejectsSmallBudget) {
    EXPECT_THROW(opt::maximize(Surrogate::oracle(), DesignSpaceBounds::defaults(), 99, 0), InvalidArgument);
}

TEST(BruteForce, CountsExactlyAndFilters) {
    auto b = DesignSpaceBounds::defaults();
    auto calls = std::make_shared<std::uint64_t>(0);
    bool bad = false;
    auto r = opt::brute_force(counting(calls, b, &bad), b, 2);
    EXPECT_LE(r.evaluations, 64u);
    EXPECT_GT(r.evaluations, 0u);
    EXPECT_EQ(r.evaluations, *calls);
    EXPECT_FALSE(bad);
    EXPECT_EQ(r.method, SearchMethod::grid);
}

TEST(BruteForce, TieKeepsFirstPoint) {
    auto b = DesignSpaceBounds::defaults();
    auto r = opt::brute_force(Surrogate::constant(0.25), b, 3);
    auto box = BoxChart::ranges(b);
    // First feasible point in index order: every later coordinate varies fastest.
    std::array<double, kParamCount> lo{};
    for (std::size_t j = 0; j < kParamCount; ++j) lo[j] = box[j].lo;
    auto first = BoxChart::to_box(r.x_star);
    EXPECT_NEAR(first[0], lo[0], 1e-12);
    EXPECT_NEAR(first[1], lo[1], 1e-12);
}

TEST(BruteForce, Limits) {
    EXPECT_THROW(opt::brute_force(Surrogate::oracle(), DesignSpaceBounds::defaults(), 22), GridTooLarge);
    EXPECT_THROW(opt::brute_force(Surrogate::oracle(), DesignSpaceBounds::defaults(), 1), InvalidArgument);
}

TEST(RandomSearch, BoundedByMaximize) {
    auto s = Surrogate::oracle(kOracle);
    auto b = DesignSpaceBounds::defaults();
    auto r = opt::random_search(s, b, 2000, 1);
    EXPECT_EQ(r.evaluations, 2000u);
    EXPECT_TRUE(is_feasible(r.x_star, b));
    EXPECT_LT(r.ct_star, opt::maximize(s, b, 20000, 1).ct_star);
}

TEST(Surrogate, GprOptimumVerifiesUnderOracle) {
    auto b = DesignSpaceBounds::defaults();
    auto truth = Surrogate::oracle(kOracle);
    std::vector<double> ratios;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        auto data = oracle::generate_dataset(b, 250, seed, kOracle);
        auto model = std::make_shared<const GprModel>(gpr::fit(data, KernelParams{}, UnitScaler(b)));
        auto s = Surrogate::gpr(model);
        auto r = opt::maximize(s, b, 20000, seed);
        EXPECT_NEAR(r.ct_star, s.predict(r.x_star), 1e-12);
        ratios.push_back(truth.predict(r.x_star) / 0.336);
    }
    std::nth_element(ratios.begin(), ratios.begin() + 5, ratios.end());
    double hi = ratios[5];
    double lo = *std::max_element(ratios.begin(), ratios.begin() + 5);
    EXPECT_GE(0.5 * (lo + hi), 0.95);
}

TEST(Report, Fields) {
    auto r = opt::maximize(Surrogate::oracle(kOracle), DesignSpaceBounds::defaults(), 1000, 0);
    double v = 0.3;
    auto text = opt::report(r, "oracle", &v).str();
    for (const char* key : {"surrogate=oracle", "method=multistart-local", "kappa_r=", "ct_predicted=", "ct_verified=0.3",
                            "improvement_verified="})
        EXPECT_NE(text.find(key), std::string::npos) << key;
}
