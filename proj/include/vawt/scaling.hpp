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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "vawt/error.hpp"
#include "vawt/io.hpp"

namespace vawt {

inline constexpr double kBetzLimit = 0.593;

struct ScalingParams {
    double lambda_l = 1.0;
    double lambda_t = 1.0;
    double lambda_rho = 1.0;

    double lambda_v() const { return lambda_l / lambda_t; }

    void validate() const {
        for (double v : {lambda_l, lambda_t, lambda_rho})
            if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("ScalingParams: scale factors must be > 0");
    }

    /// Componentwise product: applying *this after `o`.
    ScalingParams compose(const ScalingParams& o) const {
        return {lambda_l * o.lambda_l, lambda_t * o.lambda_t, lambda_rho * o.lambda_rho};
    }
};

struct OperatingPoint {
    double torque = 0.0;            // N m
    double angular_velocity = 0.0;  // rad/s
    double wind_speed = 0.0;        // m/s
    double air_density = 1.225;     // kg/m^3
    double swept_area = 0.0;        // m^2

    double power() const { return torque * angular_velocity; }
};

struct Efficiency {
    double eta = 0.0;
    bool betz_warning = false;
};

struct ScaledTorquePower {
    double torque = 0.0;
    double power = 0.0;
    double angular_velocity = 0.0;
};

struct Similarity {
    ScalingParams params;
    /// lambda_l^2 / lambda_t; equals 1 only under full (viscous) similarity.
    double viscosity_mismatch = 1.0;
};

struct RatedPoint {
    double power = 0.0;
    double angular_velocity = 0.0;
    double torque = 0.0;
};

struct TorqueCurve {
    std::vector<double> omega;   // rad/s, strictly increasing, > 0
    std::vector<double> torque;  // N m
    double wind_speed = std::numeric_limits<double>::quiet_NaN();
    double lambda_l = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        if (omega.size() != torque.size()) throw ShapeMismatch("TorqueCurve: omega/torque length mismatch");
        if (omega.size() < 2) throw TooFewSamples("TorqueCurve: need at least 2 samples");
        for (std::size_t i = 0; i < omega.size(); ++i) {
            if (!std::isfinite(omega[i]) || !std::isfinite(torque[i])) throw NonFiniteInput("TorqueCurve: non-finite sample");
            if (!(omega[i] > 0.0)) throw InvalidArgument("TorqueCurve: angular velocity must be > 0");
            if (i > 0 && !(omega[i] > omega[i - 1]))
                throw InvalidArgument("TorqueCurve: angular velocity must be strictly increasing");
        }
    }
};

struct ScalePoint {
    double lambda_l = 1.0;
    double lambda_v = 1.0;
    double value = 0.0;
};

struct PowerLawFit {
    double prefactor = 0.0;
    double exponent_l = 0.0;
    double exponent_v = 0.0;
    double residual = 0.0;  // RMS in log space
    bool dropped_l = false;
    bool dropped_v = false;
    std::vector<std::size_t> negative_indices;  // rows whose value was negative (|value| fitted)
};

namespace scaling {

/// Mechanical over kinetic power through the swept area.
inline Efficiency efficiency(const OperatingPoint& op) {
    if (op.wind_speed == 0.0) throw ZeroWind("efficiency: wind speed is zero");
    if (!(op.air_density > 0.0)) throw InvalidArgument("efficiency: air density must be > 0");
    if (!(op.swept_area > 0.0)) throw InvalidArgument("efficiency: swept area must be > 0");
    if (!(op.wind_speed > 0.0)) throw InvalidArgument("efficiency: wind speed must be > 0");
    if (op.angular_velocity < 0.0) throw InvalidArgument("efficiency: angular velocity must be >= 0");
    Efficiency e;
    e.eta = op.power() / (0.5 * op.air_density * op.swept_area * std::pow(op.wind_speed, 3));
    e.betz_warning = e.eta > kBetzLimit;
    return e;
}

/// M' = rho l^5 / t^2 M, P' = rho l^5 / t^3 P, w' = w / t.
inline ScaledTorquePower scale_torque_power(double torque, double omega, const ScalingParams& s) {
    s.validate();
    const double base = s.lambda_rho * std::pow(s.lambda_l, 5);
    return {base / (s.lambda_t * s.lambda_t) * torque, base / std::pow(s.lambda_t, 3) * (torque * omega),
            omega / s.lambda_t};
}

/// Operating point carried through a similarity transform (area ~ l^2, speed ~ l/t).
inline OperatingPoint scale_operating_point(const OperatingPoint& op, const ScalingParams& s) {
    auto tp = scale_torque_power(op.torque, op.angular_velocity, s);
    OperatingPoint out = op;
    out.torque = tp.torque;
    out.angular_velocity = tp.angular_velocity;
    out.wind_speed = op.wind_speed * s.lambda_v();
    out.air_density = op.air_density * s.lambda_rho;
    out.swept_area = op.swept_area * s.lambda_l * s.lambda_l;
    return out;
}

/// Time scale from geometry and wind-speed scales with unchanged density; viscosity is not matched.
inline Similarity similarity_from_speed(double lambda_l, double lambda_v) {
    if (!(lambda_l > 0.0) || !(lambda_v > 0.0)) throw InvalidArgument("similarity_from_speed: scales must be > 0");
    Similarity out;
    out.params = {lambda_l, lambda_l / lambda_v, 1.0};
    out.viscosity_mismatch = lambda_l * lambda_l / out.params.lambda_t;
    return out;
}

/// Maximum of w M(w) for piecewise-linear M over the sampled range.
inline RatedPoint rated_power(const TorqueCurve& c) {
    c.validate();
    RatedPoint best{c.omega[0] * c.torque[0], c.omega[0], c.torque[0]};
    auto consider = [&](double w, double m) {
        if (w * m > best.power) best = {w * m, w, m};
    };
    for (std::size_t i = 0; i + 1 < c.omega.size(); ++i) {
        const double w0 = c.omega[i], w1 = c.omega[i + 1];
        const double m0 = c.torque[i], m1 = c.torque[i + 1];
        const double slope = (m1 - m0) / (w1 - w0);
        // Within the segment M = m0 + slope (w - w0); P'(w) = 0 at the vertex below.
        if (slope < 0.0) {
            const double wv = (slope * w0 - m0) / (2.0 * slope);
            if (wv > w0 && wv < w1) consider(wv, m0 + slope * (wv - w0));
        }
        consider(w1, m1);
    }
    return best;
}

/// Inverse of the torque coefficient definition: M = C_T 0.5 rho r A V^2.
inline double torque_from_ct(double ct, double rho, double radius, double area, double wind_speed) {
    return ct * 0.5 * rho * radius * area * wind_speed * wind_speed;
}

inline double ct_from_torque(double torque, double rho, double radius, double area, double wind_speed) {
    const double q = 0.5 * rho * radius * area * wind_speed * wind_speed;
    if (q == 0.0) throw ZeroWind("ct_from_torque: zero dynamic pressure term");
    return torque / q;
}

/// OLS of log|value| on log lambda_l and log lambda_v. A coordinate with a single
/// distinct value is dropped (exponent 0, flagged); any other rank loss throws.
inline PowerLawFit fit_power_law(const std::vector<ScalePoint>& pts, bool absolute = false) {
    if (pts.size() < 3) throw TooFewSamples("fit_power_law: need at least 3 points");
    PowerLawFit fit;
    std::vector<double> y;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!std::isfinite(p.lambda_l) || !std::isfinite(p.lambda_v) || !std::isfinite(p.value))
            throw NonFiniteInput("fit_power_law: non-finite input");
        if (!(p.lambda_l > 0.0) || !(p.lambda_v > 0.0)) throw InvalidArgument("fit_power_law: scales must be > 0");
        double v = p.value;
        if (absolute && v < 0.0) {
            fit.negative_indices.push_back(i);
            v = -v;
        }
        if (!(v > 0.0)) throw InvalidArgument("fit_power_law: values must be > 0 (row " + std::to_string(i + 1) + ")");
        y.push_back(std::log(v));
    }
    auto distinct = [&](auto get) {
        for (const auto& p : pts)
            if (get(p) != get(pts[0])) return true;
        return false;
    };
    fit.dropped_l = !distinct([](const ScalePoint& p) { return p.lambda_l; });
    fit.dropped_v = !distinct([](const ScalePoint& p) { return p.lambda_v; });

    const auto n = static_cast<Eigen::Index>(pts.size());
    const Eigen::Index k = 1 + (fit.dropped_l ? 0 : 1) + (fit.dropped_v ? 0 : 1);
    Eigen::MatrixXd A(n, k);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pts[static_cast<std::size_t>(i)];
        Eigen::Index c = 0;
        A(i, c++) = 1.0;
        if (!fit.dropped_l) A(i, c++) = std::log(p.lambda_l);
        if (!fit.dropped_v) A(i, c++) = std::log(p.lambda_v);
        b(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < k) throw RankDeficient("fit_power_law: log-design matrix is rank deficient");
    Eigen::VectorXd beta = qr.solve(b);
    Eigen::Index c = 0;
    fit.prefactor = std::exp(beta(c++));
    if (!fit.dropped_l) fit.exponent_l = beta(c++);
    if (!fit.dropped_v) fit.exponent_v = beta(c++);
    fit.residual = std::sqrt((A * beta - b).squaredNorm() / static_cast<double>(n));
    return fit;
}

inline PowerLawFit rated_torque_law(const std::vector<ScalePoint>& pts) { return fit_power_law(pts, true); }

inline double evaluate_power_law(const PowerLawFit& f, double lambda_l, double lambda_v) {
    return f.prefactor * std::pow(lambda_l, f.exponent_l) * std::pow(lambda_v, f.exponent_v);
}

namespace csv {

inline constexpr std::string_view kCurveHeader = "omega_rad_s,torque_Nm";
inline constexpr std::string_view kScaleHeader = "lambda_l,lambda_v,value";

/// '#'-prefixed key=value metadata lines, then the header, then rows.
inline TorqueCurve read_curve(std::string_view text) {
    TorqueCurve c;
    bool header = false;
    std::size_t line_no = 0;
    for (auto raw : io::split(text, '\n')) {
        ++line_no;
        auto line = io::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = io::trim(line.substr(1));
            auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            auto key = io::trim(body.substr(0, eq));
            auto val = io::trim(body.substr(eq + 1));
            if (key == "wind_speed") c.wind_speed = io::parse_double(val, line_no, "wind_speed");
            else if (key == "lambda_l") c.lambda_l = io::parse_double(val, line_no, "lambda_l");
            continue;
        }
        if (!header) {
            if (line != kCurveHeader)
                throw SchemaError("torque curve header must be '" + std::string(kCurveHeader) + "'", line_no);
            header = true;
            continue;
        }
        auto f = io::split(line);
        if (f.size() != 2) throw SchemaError("torque curve row must have 2 fields", line_no);
        c.omega.push_back(io::parse_double(f[0], line_no, "omega_rad_s"));
        c.torque.push_back(io::parse_double(f[1], line_no, "torque_Nm"));
    }
    if (!header) throw SchemaError("torque curve lacks the '" + std::string(kCurveHeader) + "' header");
    return c;
}

inline std::string write_curve(const TorqueCurve& c) {
    std::string out;
    if (std::isfinite(c.wind_speed)) out += "# wind_speed=" + io::format_double(c.wind_speed) + "\n";
    if (std::isfinite(c.lambda_l)) out += "# lambda_l=" + io::format_double(c.lambda_l) + "\n";
    out += std::string(kCurveHeader) + "\n";
    for (std::size_t i = 0; i < c.omega.size(); ++i)
        out += io::format_double(c.omega[i]) + "," + io::format_double(c.torque[i]) + "\n";
    return out;
}

inline std::vector<ScalePoint> read_scale_points(std::string_view text) {
    std::vector<ScalePoint> pts;
    bool header = false;
    std::size_t line_no = 0;
    for (auto raw : io::split(text, '\n')) {
        ++line_no;
        auto line = io::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != kScaleHeader)
                throw SchemaError("scale data header must be '" + std::string(kScaleHeader) + "'", line_no);
            header = true;
            continue;
        }
        auto f = io::split(line);
        if (f.size() != 3) throw SchemaError("scale data row must have 3 fields", line_no);
        pts.push_back({io::parse_double(f[0], line_no, "lambda_l"), io::parse_double(f[1], line_no, "lambda_v"),
                       io::parse_double(f[2], line_no, "value")});
    }
    if (!header) throw SchemaError("scale data lacks the '" + std::string(kScaleHeader) + "' header");
    return pts;
}

inline std::string write_scale_points(const std::vector<ScalePoint>& pts) {
    std::string out = std::string(kScaleHeader) + "\n";
    for (const auto& p : pts)
        out += io::format_double(p.lambda_l) + "," + io::format_double(p.lambda_v) + "," + io::format_double(p.value) + "\n";
    return out;
}

}  // namespace csv
}  // namespace scaling
}  // namespace vawt
