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
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vawt/error.hpp"

namespace vawt {

/// Design coordinates in storage order (also the CSV column order).
enum class Param : std::size_t { kappa_r = 0, kappa_d, L_dr, L_rr, L_d, alpha };

inline constexpr std::size_t kParamCount = 6;

inline constexpr std::array<Param, kParamCount> kAllParams{Param::kappa_r, Param::kappa_d, Param::L_dr,
                                                           Param::L_rr,    Param::L_d,     Param::alpha};

inline constexpr std::string_view param_name(Param p) {
    constexpr std::array<std::string_view, kParamCount> names{"kappa_r", "kappa_d", "L_dr", "L_rr", "L_d", "alpha_deg"};
    return names[static_cast<std::size_t>(p)];
}

inline Param parse_param(std::string_view name) {
    for (auto p : kAllParams)
        if (param_name(p) == name) return p;
    if (name == "alpha") return Param::alpha;
    throw InvalidArgument("unknown design parameter '" + std::string(name) + "'");
}

/// Six-parameter turbine geometry. Lengths are in the dimensionless units of the
/// design-space ranges; alpha is the relative rotor phase in degrees.
struct DesignPoint {
    double kappa_r = 0.0;    ///< blade mean curvature
    double kappa_d = 0.0;    ///< deflector curvature
    double L_dr = 0.0;       ///< deflector to rotor-axis-plane distance
    double L_rr = 0.0;       ///< rotor to rotor distance
    double L_d = 0.0;        ///< deflector corner-to-corner size
    double alpha_deg = 0.0;  ///< relative rotor phase, degrees

    std::array<double, kParamCount> to_array() const { return {kappa_r, kappa_d, L_dr, L_rr, L_d, alpha_deg}; }

    static DesignPoint from_array(const std::array<double, kParamCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }

    double get(Param p) const { return to_array()[static_cast<std::size_t>(p)]; }

    void set(Param p, double v) {
        auto a = to_array();
        a[static_cast<std::size_t>(p)] = v;
        *this = from_array(a);
    }

    bool all_finite() const {
        for (double v : to_array())
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};

inline void require_finite(const DesignPoint& x, std::string_view where) {
    if (!x.all_finite()) throw NonFiniteInput(std::string(where) + ": design point has a NaN or infinite component");
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double v) const {
        return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    }
    double width() const { return hi - lo; }
};

/// Strict lower bound 0 < alpha is realised as alpha >= this value.
inline constexpr double kAlphaMinDeg = 1e-9;
/// Strict upper bounds (kappa_d * L_d < 1) are approached no closer than this in sampling and search.
inline constexpr double kOpenBoundMargin = 1e-9;

/// Rotor clearance threshold shared by both collision inequalities (rotor diameter 0.44 h).
inline constexpr double kRotorClearance = 0.44;
/// Half blade chord entering the blade sagitta term.
inline constexpr double kBladeHalfChord = 0.19;

/// Box constraints of the design space plus the coupled bound on kappa_d * L_d.
/// kappa_d has no standalone range; it is implied per point by L_d.
struct DesignSpaceBounds {
    Interval kappa_r{1.0, 5.26};
    Interval L_rr{0.7, 1.5};
    Interval L_d{0.1, 1.3};
    Interval L_dr{0.2, 1.0};
    Interval kappa_d_L_d{0.1, 1.0, false, true};
    Interval alpha_deg{0.0, 45.0, true, false};

    static DesignSpaceBounds defaults() { return {}; }

    /// Wider (L_rr, L_d) ranges used by the contour evaluation grid.
    static DesignSpaceBounds extended() {
        DesignSpaceBounds b;
        b.L_rr = {0.36, 1.6};
        b.L_d = {0.15, 1.35};
        return b;
    }

    static DesignSpaceBounds from_preset(std::string_view name) {
        if (name == "default") return defaults();
        if (name == "extended") return extended();
        throw InvalidArgument("unknown bounds preset '" + std::string(name) + "' (expected default or extended)");
    }

    void validate() const {
        for (const Interval* iv : {&kappa_r, &L_rr, &L_d, &L_dr, &kappa_d_L_d, &alpha_deg})
            if (!(iv->lo < iv->hi) || !std::isfinite(iv->lo) || !std::isfinite(iv->hi))
                throw InvalidArgument("design-space interval with lo >= hi or non-finite limits");
        if (L_d.lo <= 0.0 || kappa_d_L_d.lo <= 0.0) throw InvalidArgument("L_d and kappa_d*L_d must be positive");
    }

    /// Standalone kappa_d range implied by the coupled bound over all admissible L_d.
    Interval kappa_d_range() const { return {kappa_d_L_d.lo / L_d.hi, kappa_d_L_d.hi / L_d.lo}; }

    /// Closed range per coordinate, used for standardization and tensor grids.
    Interval range(Param p) const {
        switch (p) {
            case Param::kappa_r: return {kappa_r.lo, kappa_r.hi};
            case Param::kappa_d: return kappa_d_range();
            case Param::L_dr: return {L_dr.lo, L_dr.hi};
            case Param::L_rr: return {L_rr.lo, L_rr.hi};
            case Param::L_d: return {L_d.lo, L_d.hi};
            case Param::alpha: return {alpha_deg.lo, alpha_deg.hi};
        }
        return {};
    }
};

struct Violation {
    std::string id;
    double slack = 0.0;  ///< signed margin, negative (or zero for strict bounds) when violated
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;

    bool has(std::string_view id) const {
        for (const auto& v : violations)
            if (v.id == id) return true;
        return false;
    }
};

/// Blade sagitta term 1/kappa_r - sqrt((1/kappa_r)^2 - 0.19^2). The radicand is clamped at 0.
inline double blade_sagitta(double kappa_r) {
    double inv = 1.0 / kappa_r;
    double radicand = inv * inv - kBladeHalfChord * kBladeHalfChord;
    return inv - std::sqrt(std::max(radicand, 0.0));
}

/// Box bounds, the coupled kappa_d*L_d bound and both rotor-collision inequalities.
/// Each violated constraint is listed once with its signed margin.
inline FeasibilityReport check_feasible(const DesignPoint& x, const DesignSpaceBounds& bounds = {}) {
    require_finite(x, "check_feasible");
    FeasibilityReport rep;
    auto add = [&rep](std::string_view id, double slack, bool strict) {
        if (slack < 0.0 || (strict && slack <= 0.0)) rep.violations.push_back({std::string(id), slack});
    };
    auto box = [&add](std::string_view name, double v, const Interval& iv) {
        add(std::string(name) + "_min", v - iv.lo, iv.lo_open);
        add(std::string(name) + "_max", iv.hi - v, iv.hi_open);
    };

    box("kappa_r", x.kappa_r, bounds.kappa_r);
    box("kappa_d_L_d", x.kappa_d * x.L_d, bounds.kappa_d_L_d);
    box("L_dr", x.L_dr, bounds.L_dr);
    box("L_rr", x.L_rr, bounds.L_rr);
    box("L_d", x.L_d, bounds.L_d);
    // The open lower alpha bound is checked as alpha >= kAlphaMinDeg.
    if (bounds.alpha_deg.lo_open && bounds.alpha_deg.lo == 0.0)
        add("alpha_min", x.alpha_deg - kAlphaMinDeg, false);
    else
        add("alpha_min", x.alpha_deg - bounds.alpha_deg.lo, bounds.alpha_deg.lo_open);
    add("alpha_max", bounds.alpha_deg.hi - x.alpha_deg, bounds.alpha_deg.hi_open);

    const double c2 = kRotorClearance * kRotorClearance;
    add("rotor_deflector_clearance", 0.25 * (x.L_rr - x.L_d) * (x.L_rr - x.L_d) + x.L_dr * x.L_dr - c2, true);

    if (x.kappa_r <= 0.0) {
        add("curvature_geometry", x.kappa_r, true);
    } else {
        double inv = 1.0 / x.kappa_r;
        double radicand = inv * inv - kBladeHalfChord * kBladeHalfChord;
        if (radicand < 0.0) add("curvature_geometry", radicand, false);
        double half_angle = (45.0 - 0.5 * x.alpha_deg) * std::numbers::pi / 180.0;
        add("rotor_rotor_clearance", x.L_rr * std::cos(half_angle) - blade_sagitta(x.kappa_r) - kRotorClearance, true);
    }

    rep.feasible = rep.violations.empty();
    return rep;
}

inline bool is_feasible(const DesignPoint& x, const DesignSpaceBounds& bounds = {}) {
    return check_feasible(x, bounds).feasible;
}

/// Coordinates in which the design-space box is rectangular:
/// (kappa_r, kappa_d*L_d, L_dr, L_rr, L_d, alpha).
struct BoxChart {
    static std::array<double, kParamCount> to_box(const DesignPoint& x) {
        return {x.kappa_r, x.kappa_d * x.L_d, x.L_dr, x.L_rr, x.L_d, x.alpha_deg};
    }

    static DesignPoint from_box(const std::array<double, kParamCount>& z) {
        return {z[0], z[1] / z[4], z[2], z[3], z[4], z[5]};
    }

    /// Closed box; open ends pulled in by kOpenBoundMargin / kAlphaMinDeg.
    static std::array<Interval, kParamCount> ranges(const DesignSpaceBounds& b) {
        auto closed = [](const Interval& iv, double lo_pad, double hi_pad) {
            return Interval{iv.lo_open ? iv.lo + lo_pad : iv.lo, iv.hi_open ? iv.hi - hi_pad : iv.hi};
        };
        Interval alpha = closed(b.alpha_deg, kOpenBoundMargin, kOpenBoundMargin);
        if (b.alpha_deg.lo_open && b.alpha_deg.lo == 0.0) alpha.lo = kAlphaMinDeg;
        return {closed(b.kappa_r, kOpenBoundMargin, kOpenBoundMargin),
                closed(b.kappa_d_L_d, kOpenBoundMargin, kOpenBoundMargin),
                closed(b.L_dr, kOpenBoundMargin, kOpenBoundMargin),
                closed(b.L_rr, kOpenBoundMargin, kOpenBoundMargin),
                closed(b.L_d, kOpenBoundMargin, kOpenBoundMargin),
                alpha};
    }
};

/// Uniform rejection sampler over the box, kappa_d drawn from its per-point range
/// [kdld.lo / L_d, kdld.hi / L_d). Owns its RNG; the sequence depends only on the seed.
class FeasibleSampler {
public:
    static constexpr std::uint64_t kRejectionWindow = 10000;

    FeasibleSampler(const DesignSpaceBounds& bounds, std::uint64_t seed)
        : bounds_(bounds), ranges_(BoxChart::ranges(bounds)), rng_(seed) {
        bounds_.validate();
    }

    DesignPoint next() {
        std::uint64_t misses = 0;
        for (;;) {
            std::array<double, kParamCount> z{};
            // kappa_r, L_dr, L_rr, L_d first; the product bound needs L_d.
            for (std::size_t i : {0u, 2u, 3u, 4u, 1u, 5u}) {
                std::uniform_real_distribution<double> u(ranges_[i].lo, ranges_[i].hi);
                z[i] = u(rng_);
            }
            ++draws_;
            DesignPoint x = BoxChart::from_box(z);
            if (check_feasible(x, bounds_).feasible) return x;
            if (++misses >= kRejectionWindow)
                throw ExhaustedRejection("no feasible draw in the last " + std::to_string(kRejectionWindow) +
                                         " attempts; bounds are malformed or the feasible set is empty");
        }
    }

    std::uint64_t draws() const { return draws_; }

private:
    DesignSpaceBounds bounds_;
    std::array<Interval, kParamCount> ranges_;
    std::mt19937_64 rng_;
    std::uint64_t draws_ = 0;
};

inline std::vector<DesignPoint> sample_feasible(const DesignSpaceBounds& bounds, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_feasible: n must be >= 1");
    FeasibleSampler sampler(bounds, seed);
    std::vector<DesignPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
    return out;
}

/// Affine map of each coordinate onto [0, 1] using the bound ranges.
class UnitScaler {
public:
    UnitScaler() : UnitScaler(DesignSpaceBounds::defaults()) {}
    explicit UnitScaler(const DesignSpaceBounds& b) {
        for (auto p : kAllParams) {
            auto r = b.range(p);
            lo_[static_cast<std::size_t>(p)] = r.lo;
            span_[static_cast<std::size_t>(p)] = r.width();
        }
    }
    UnitScaler(const std::array<double, kParamCount>& lo, const std::array<double, kParamCount>& span)
        : lo_(lo), span_(span) {
        for (double s : span_)
            if (!(s > 0.0)) throw InvalidArgument("UnitScaler: non-positive span");
    }

    std::array<double, kParamCount> apply(const DesignPoint& x) const {
        auto a = x.to_array();
        for (std::size_t i = 0; i < kParamCount; ++i) a[i] = (a[i] - lo_[i]) / span_[i];
        return a;
    }

    const std::array<double, kParamCount>& lo() const { return lo_; }
    const std::array<double, kParamCount>& span() const { return span_; }

private:
    std::array<double, kParamCount> lo_{};
    std::array<double, kParamCount> span_{};
};

struct GridPoint {
    DesignPoint x;
    FeasibilityReport report;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (i + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// Uniform tensor grid over two coordinates, first axis outermost. The remaining
/// coordinates come from `fixed`. Infeasible points are kept and flagged.
inline std::vector<GridPoint> grid(Param axis_a, Interval range_a, std::size_t res_a, Param axis_b, Interval range_b,
                                   std::size_t res_b, const DesignPoint& fixed,
                                   const DesignSpaceBounds& bounds = {}) {
    if (res_a < 2 || res_b < 2) throw InvalidArgument("grid: resolution must be >= 2 per axis");
    if (axis_a == axis_b) throw InvalidArgument("grid: the two axes must differ");
    for (double v : {range_a.lo, range_a.hi, range_b.lo, range_b.hi})
        if (!std::isfinite(v)) throw NonFiniteInput("grid: non-finite axis range");
    std::vector<GridPoint> out;
    out.reserve(res_a * res_b);
    for (double a : linspace(range_a.lo, range_a.hi, res_a)) {
        for (double b : linspace(range_b.lo, range_b.hi, res_b)) {
            DesignPoint x = fixed;
            x.set(axis_a, a);
            x.set(axis_b, b);
            require_finite(x, "grid");
            out.push_back({x, check_feasible(x, bounds)});
        }
    }
    return out;
}

inline std::vector<GridPoint> grid(Param axis_a, Interval range_a, Param axis_b, Interval range_b,
                                   std::size_t resolution, const DesignPoint& fixed,
                                   const DesignSpaceBounds& bounds = {}) {
    return grid(axis_a, range_a, resolution, axis_b, range_b, resolution, fixed, bounds);
}

/// Fixed coordinates of the contour evaluation slice; L_rr and L_d are placeholders.
inline DesignPoint contour_fixed_point() { return {4.95, 0.765, 0.47, 1.1, 0.7, 45.0}; }

}  // namespace vawt
