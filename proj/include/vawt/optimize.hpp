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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "vawt/dataset.hpp"
#include "vawt/design_space.hpp"
#include "vawt/error.hpp"
#include "vawt/gpr.hpp"
#include "vawt/io.hpp"
#include "vawt/nn.hpp"
#include "vawt/oracle.hpp"

namespace vawt {

/// Predictor facade: GPR posterior mean, NN forward pass, the oracle, or a constant.
class Surrogate {
public:
    using Fn = std::function<double(const DesignPoint&)>;

    Surrogate(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    static Surrogate oracle(const OracleConfig& config = {}) {
        return {"oracle", [config](const DesignPoint& x) { return oracle::evaluate(x, config); }};
    }
    static Surrogate gpr(std::shared_ptr<const GprModel> m) {
        return {"gpr", [m = std::move(m)](const DesignPoint& x) { return gpr::predict(*m, x).mean; }};
    }
    static Surrogate nn(std::shared_ptr<const MlpModel> m) {
        return {"nn", [m = std::move(m)](const DesignPoint& x) { return nn::forward(*m, x); }};
    }
    static Surrogate constant(double value) {
        return {"constant", [value](const DesignPoint& x) {
                    require_finite(x, "Surrogate::constant");
                    return value;
                }};
    }

    double predict(const DesignPoint& x) const { return fn_(x); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    Fn fn_;
};

enum class SearchMethod { multistart_local, grid, random };

inline std::string_view method_name(SearchMethod m) {
    switch (m) {
        case SearchMethod::multistart_local: return "multistart-local";
        case SearchMethod::grid: return "grid";
        case SearchMethod::random: return "random";
    }
    return "unknown";
}

struct OptResult {
    DesignPoint x_star;
    double ct_star = 0.0;
    SearchMethod method = SearchMethod::multistart_local;
    std::uint64_t evaluations = 0;
    std::uint64_t starts = 0;
    double baseline_ct = 0.0;
    double improvement_vs_baseline = 0.0;
};

struct SearchOptions {
    double initial_step = 0.1;  // fraction of each box-chart range
    double min_step = 1e-4;
    double baseline_ct = OracleConfig{}.baseline_ct;
};

namespace opt {

/// Signed relative change (ct_star - baseline) / baseline.
inline double improvement(double ct_star, double baseline_ct) {
    if (baseline_ct == 0.0) throw ZeroBaseline("improvement: baseline C_T is zero");
    if (!(baseline_ct > 0.0)) throw InvalidArgument("improvement: baseline C_T must be > 0");
    return (ct_star - baseline_ct) / baseline_ct;
}

inline constexpr std::uint64_t kMinBudget = 100;
inline constexpr std::uint64_t kMaxGridPoints = 100000000;

/// Multistart compass search in box-chart coordinates. Starts come lazily from a
/// seeded feasible sampler, each refined by +/- coordinate moves (first improvement
/// accepted) with step halving; infeasible trials are rejected without evaluation.
/// Runs sequentially, so a larger budget replays the smaller one as a prefix.
inline OptResult maximize(const Surrogate& s, const DesignSpaceBounds& bounds, std::uint64_t budget, std::uint64_t seed,
                          const SearchOptions& options = {}) {
    if (budget < kMinBudget) throw InvalidArgument("maximize: budget must be >= " + std::to_string(kMinBudget));
    bounds.validate();
    const auto box = BoxChart::ranges(bounds);
    FeasibleSampler sampler(bounds, seed);

    OptResult best;
    best.method = SearchMethod::multistart_local;
    best.baseline_ct = options.baseline_ct;
    bool have = false;
    std::uint64_t evals = 0;

    while (evals < budget) {
        DesignPoint x;
        try {
            x = sampler.next();
        } catch (const ExhaustedRejection& e) {
            if (have) break;
            throw NoFeasibleStart(std::string("maximize: ") + e.what());
        }
        double f = s.predict(x);
        ++evals;
        ++best.starts;
        if (!have || f > best.ct_star) {
            best.x_star = x;
            best.ct_star = f;
            have = true;
        }
        auto z = BoxChart::to_box(x);
        for (double h = options.initial_step; h >= options.min_step && evals < budget; h *= 0.5) {
            bool improved = true;
            while (improved && evals < budget) {
                improved = false;
                for (std::size_t j = 0; j < kParamCount && evals < budget; ++j) {
                    const double step = h * box[j].width();
                    for (double dir : {1.0, -1.0}) {
                        auto zt = z;
                        zt[j] = std::clamp(z[j] + dir * step, box[j].lo, box[j].hi);
                        if (zt[j] == z[j]) continue;
                        auto xt = BoxChart::from_box(zt);
                        if (!is_feasible(xt, bounds)) continue;
                        double ft = s.predict(xt);
                        ++evals;
                        if (ft > f) {
                            z = zt;
                            x = xt;
                            f = ft;
                            improved = true;
                            break;
                        }
                        if (evals >= budget) break;
                    }
                }
            }
            if (f > best.ct_star) {
                best.x_star = x;
                best.ct_star = f;
            }
        }
        if (f > best.ct_star) {
            best.x_star = x;
            best.ct_star = f;
        }
    }
    best.evaluations = evals;
    best.improvement_vs_baseline = improvement(best.ct_star, options.baseline_ct);
    return best;
}

/// Exhaustive search over the feasible part of a resolution^6 box-chart grid.
/// The first axis is outermost; ties keep the lexicographically first point.
inline OptResult brute_force(const Surrogate& s, const DesignSpaceBounds& bounds, std::size_t resolution,
                             const SearchOptions& options = {}) {
    if (resolution < 2) throw InvalidArgument("brute_force: resolution must be >= 2");
    double total = std::pow(static_cast<double>(resolution), static_cast<double>(kParamCount));
    if (total > static_cast<double>(kMaxGridPoints))
        throw GridTooLarge("brute_force: " + std::to_string(resolution) + "^6 grid exceeds 1e8 points");
    bounds.validate();
    const auto box = BoxChart::ranges(bounds);
    std::array<std::vector<double>, kParamCount> axes;
    for (std::size_t j = 0; j < kParamCount; ++j) axes[j] = linspace(box[j].lo, box[j].hi, resolution);

    OptResult best;
    best.method = SearchMethod::grid;
    best.baseline_ct = options.baseline_ct;
    bool have = false;
    std::array<std::size_t, kParamCount> idx{};
    for (;;) {
        std::array<double, kParamCount> z{};
        for (std::size_t j = 0; j < kParamCount; ++j) z[j] = axes[j][idx[j]];
        auto x = BoxChart::from_box(z);
        if (is_feasible(x, bounds)) {
            double f = s.predict(x);
            ++best.evaluations;
            if (!have || f > best.ct_star) {
                best.x_star = x;
                best.ct_star = f;
                have = true;
            }
        }
        std::size_t j = kParamCount;
        while (j > 0 && ++idx[j - 1] == resolution) idx[--j] = 0;
        if (j == 0) break;
    }
    if (!have) throw NoFeasibleStart("brute_force: no feasible grid point");
    best.improvement_vs_baseline = improvement(best.ct_star, options.baseline_ct);
    return best;
}

/// Best of `budget` seeded feasible draws.
inline OptResult random_search(const Surrogate& s, const DesignSpaceBounds& bounds, std::uint64_t budget,
                               std::uint64_t seed, const SearchOptions& options = {}) {
    if (budget < 1) throw InvalidArgument("random_search: budget must be >= 1");
    FeasibleSampler sampler(bounds, seed);
    OptResult best;
    best.method = SearchMethod::random;
    best.baseline_ct = options.baseline_ct;
    for (std::uint64_t i = 0; i < budget; ++i) {
        DesignPoint x;
        try {
            x = sampler.next();
        } catch (const ExhaustedRejection& e) {
            throw NoFeasibleStart(std::string("random_search: ") + e.what());
        }
        double f = s.predict(x);
        if (i == 0 || f > best.ct_star) {
            best.x_star = x;
            best.ct_star = f;
        }
        ++best.evaluations;
    }
    best.improvement_vs_baseline = improvement(best.ct_star, options.baseline_ct);
    return best;
}

/// Flat key=value report; `verified_ct` (oracle value at x_star) is optional.
inline io::KeyValues report(const OptResult& r, std::string_view surrogate, const double* verified_ct = nullptr) {
    io::KeyValues kv;
    kv.set("surrogate", std::string(surrogate));
    kv.set("method", std::string(method_name(r.method)));
    kv.set("evaluations", r.evaluations);
    kv.set("starts", r.starts);
    for (auto p : kAllParams) kv.set(std::string(param_name(p)), r.x_star.get(p));
    kv.set("ct_predicted", r.ct_star);
    if (verified_ct != nullptr) kv.set("ct_verified", *verified_ct);
    kv.set("baseline_ct", r.baseline_ct);
    kv.set("improvement", r.improvement_vs_baseline);
    if (verified_ct != nullptr) kv.set("improvement_verified", improvement(*verified_ct, r.baseline_ct));
    return kv;
}

}  // namespace opt
}  // namespace vawt
