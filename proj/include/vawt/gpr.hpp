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

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "vawt/dataset.hpp"
#include "vawt/design_space.hpp"
#include "vawt/error.hpp"
#include "vawt/io.hpp"

namespace vawt {

/// Hyperparameters of the scaled squared-exponential prior with constant mean.
/// Only length_scale^2 enters the kernel, so the sign of length_scale is irrelevant.
struct KernelParams {
    double sigma = 0.5;
    double length_scale = 0.5;
    double noise_sigma0 = 1e-3;
    double mean_m0 = 0.16;

    double l2() const { return length_scale * length_scale; }

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("KernelParams: sigma must be > 0");
        if (length_scale == 0.0 || !std::isfinite(length_scale))
            throw InvalidArgument("KernelParams: length_scale must be non-zero");
        if (!(noise_sigma0 >= 0.0) || !std::isfinite(noise_sigma0))
            throw InvalidArgument("KernelParams: noise_sigma0 must be >= 0");
        if (!std::isfinite(mean_m0)) throw InvalidArgument("KernelParams: mean_m0 must be finite");
    }
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

using UnitPoint = std::array<double, kParamCount>;

class GprModel;

namespace gpr {
GprModel fit(const Dataset& data, const KernelParams& params, const UnitScaler& scaler);
}

/// Conditioned Gaussian process. Immutable after fit; safe to share across threads.
class GprModel {
public:
    const KernelParams& params() const { return params_; }
    const UnitScaler& scaler() const { return scaler_; }
    std::size_t size() const { return train_x_.size(); }
    const std::vector<DesignPoint>& train_x() const { return train_x_; }
    const Eigen::VectorXd& train_y() const { return train_y_; }
    const Eigen::MatrixXd& train_unit() const { return train_unit_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::MatrixXd& factor() const { return factor_; }
    /// Relative diagonal inflation that made K_c factorizable (0 when none was needed).
    double jitter() const { return jitter_; }
    /// Number of predictions whose variance was clamped at 0.
    std::size_t variance_clamps() const { return clamps_->load(); }

    /// K_c = K + sigma0^2 I (with jitter applied), as factorized.
    Eigen::MatrixXd kernel_matrix() const;

    /// ||L L^T - K_c||_F / ||K_c||_F.
    double factor_residual() const {
        Eigen::MatrixXd kc = kernel_matrix();
        return (factor_ * factor_.transpose() - kc).norm() / kc.norm();
    }

private:
    friend GprModel gpr::fit(const Dataset&, const KernelParams&, const UnitScaler&);
    friend Prediction predict_impl(const GprModel&, const DesignPoint&);

    KernelParams params_;
    UnitScaler scaler_;
    std::vector<DesignPoint> train_x_;
    Eigen::MatrixXd train_unit_;  // n x 6
    Eigen::VectorXd train_y_;
    Eigen::MatrixXd factor_;      // lower Cholesky factor of K_c
    Eigen::VectorXd alpha_;       // K_c^{-1} (y - m0)
    double jitter_ = 0.0;
    std::shared_ptr<std::atomic<std::size_t>> clamps_ = std::make_shared<std::atomic<std::size_t>>(0);
};

namespace gpr {

/// sigma^2 exp(-|a - b|^2 / (2 l^2)) on standardized coordinates.
inline double kernel(const UnitPoint& a, const UnitPoint& b, const KernelParams& p) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw NonFiniteInput("gpr::kernel: non-finite coordinate");
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return p.sigma * p.sigma * std::exp(-d2 / (2.0 * p.l2()));
}

inline double kernel(const DesignPoint& a, const DesignPoint& b, const KernelParams& p,
                     const UnitScaler& scaler = UnitScaler{}) {
    require_finite(a, "gpr::kernel");
    require_finite(b, "gpr::kernel");
    return kernel(scaler.apply(a), scaler.apply(b), p);
}

namespace detail {

inline UnitPoint row(const Eigen::MatrixXd& m, Eigen::Index i) {
    UnitPoint u{};
    for (std::size_t j = 0; j < kParamCount; ++j) u[j] = m(i, static_cast<Eigen::Index>(j));
    return u;
}

inline Eigen::MatrixXd noisy_gram(const Eigen::MatrixXd& xu, const KernelParams& p, double jitter) {
    const Eigen::Index n = xu.rows();
    Eigen::MatrixXd kc(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto ri = row(xu, i);
        for (Eigen::Index j = 0; j <= i; ++j) kc(i, j) = kc(j, i) = kernel(ri, row(xu, j), p);
        kc(i, i) = (kc(i, i) + p.noise_sigma0 * p.noise_sigma0) * (1.0 + jitter);
    }
    return kc;
}

}  // namespace detail

inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-6;

/// Conditions the prior on the data. Exact duplicate inputs (after standardization)
/// are merged when their C_T agree.
inline GprModel fit(const Dataset& data, const KernelParams& params, const UnitScaler& scaler) {
    params.validate();
    if (data.empty()) throw InvalidArgument("gpr::fit: empty dataset");

    GprModel m;
    m.params_ = params;
    m.scaler_ = scaler;
    std::map<UnitPoint, double> seen;
    std::vector<UnitPoint> units;
    std::vector<double> ys;
    for (const auto& r : data.rows) {
        require_finite(r.x, "gpr::fit");
        if (!std::isfinite(r.ct)) throw NonFiniteInput("gpr::fit: non-finite C_T");
        auto u = scaler.apply(r.x);
        auto [it, inserted] = seen.emplace(u, r.ct);
        if (!inserted) {
            if (it->second != r.ct) throw ConflictingDuplicates("gpr::fit: repeated input with different C_T");
            continue;
        }
        units.push_back(u);
        ys.push_back(r.ct);
        m.train_x_.push_back(r.x);
    }

    const auto n = static_cast<Eigen::Index>(units.size());
    m.train_unit_.resize(n, static_cast<Eigen::Index>(kParamCount));
    m.train_y_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < kParamCount; ++j)
            m.train_unit_(i, static_cast<Eigen::Index>(j)) = units[static_cast<std::size_t>(i)][j];
        m.train_y_(i) = ys[static_cast<std::size_t>(i)];
    }

    double jitter = 0.0;
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(detail::noisy_gram(m.train_unit_, params, jitter));
        if (llt.info() == Eigen::Success) {
            m.factor_ = llt.matrixL();
            m.alpha_ = llt.solve((m.train_y_.array() - params.mean_m0).matrix());
            if (m.alpha_.allFinite()) break;
        }
        jitter = jitter == 0.0 ? kJitterStart : jitter * 10.0;
        if (jitter > kJitterMax * 1.000001)
            throw SingularKernel("K_c not positive definite even with relative diagonal jitter " +
                                 io::format_double(kJitterMax));
    }
    m.jitter_ = jitter;
    return m;
}

inline GprModel fit(const Dataset& data, const KernelParams& params = {}) { return fit(data, params, UnitScaler{}); }

}  // namespace gpr

inline Eigen::MatrixXd GprModel::kernel_matrix() const { return gpr::detail::noisy_gram(train_unit_, params_, jitter_); }

/// Posterior mean and variance. The noise kernel sigma0^2 delta(x, x') uses exact
/// point identity, so a query at a training input reproduces its observation.
inline Prediction predict_impl(const GprModel& m, const DesignPoint& x) {
    require_finite(x, "gpr::predict");
    const auto& p = m.params_;
    const double s02 = p.noise_sigma0 * p.noise_sigma0;
    auto u = m.scaler_.apply(x);
    const Eigen::Index n = m.train_unit_.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto ri = gpr::detail::row(m.train_unit_, i);
        k(i) = gpr::kernel(u, ri, p);
        if (ri == u) k(i) += s02;
    }
    Prediction out;
    out.mean = k.dot(m.alpha_) + p.mean_m0;
    Eigen::VectorXd v = m.factor_.triangularView<Eigen::Lower>().solve(k);
    out.variance = p.sigma * p.sigma + s02 - v.squaredNorm();
    if (out.variance < 0.0) {
        out.variance = 0.0;
        m.clamps_->fetch_add(1);
    }
    return out;
}

namespace gpr {

inline Prediction predict(const GprModel& m, const DesignPoint& x) { return predict_impl(m, x); }

inline double mse(const GprModel& m, const Dataset& test) {
    if (test.empty()) throw InvalidArgument("gpr::mse: empty test set");
    double s = 0.0;
    for (const auto& r : test.rows) {
        double e = predict(m, r.x).mean - r.ct;
        s += e * e;
    }
    return s / static_cast<double>(test.size());
}

/// Negative log marginal likelihood of the data under the prior.
inline double nlml(const Dataset& data, const KernelParams& params, const UnitScaler& scaler = UnitScaler{}) {
    auto m = fit(data, params, scaler);
    Eigen::VectorXd r = (m.train_y().array() - params.mean_m0).matrix();
    double log_det_half = m.factor().diagonal().array().log().sum();
    return 0.5 * r.dot(m.alpha()) + log_det_half +
           0.5 * static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi);
}

struct LatticePoint {
    double sigma = 0.0;
    double length_scale = 0.0;
};

inline std::vector<LatticePoint> make_lattice(const std::vector<double>& sigmas, const std::vector<double>& length_scales) {
    std::vector<LatticePoint> out;
    for (double s : sigmas)
        for (double l : length_scales) out.push_back({s, l});
    return out;
}

/// Exhaustive NLML minimization over (sigma, length_scale). Ties go to the smallest
/// sigma, then the smallest l^2. m0 and sigma0 are taken from `base`.
inline KernelParams tune(const Dataset& data, const std::vector<LatticePoint>& lattice, const KernelParams& base = {},
                         const UnitScaler& scaler = UnitScaler{}) {
    if (lattice.empty()) throw InvalidArgument("gpr::tune: empty lattice");
    KernelParams best = base;
    double best_value = 0.0;
    bool have = false;
    for (const auto& lp : lattice) {
        KernelParams p = base;
        p.sigma = lp.sigma;
        p.length_scale = lp.length_scale;
        double v = nlml(data, p, scaler);
        bool better = !have || v < best_value ||
                      (v == best_value && (p.sigma < best.sigma || (p.sigma == best.sigma && p.l2() < best.l2())));
        if (better) {
            best = p;
            best_value = v;
            have = true;
        }
    }
    return best;
}

inline constexpr std::string_view kModelFormat = "vawt-gpr-1";

namespace detail {

inline std::string join(const std::array<double, kParamCount>& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + io::format_double(a[i]);
    return s;
}

inline std::array<double, kParamCount> parse_six(std::string_view s, std::string_view what) {
    auto f = io::split(s);
    if (f.size() != kParamCount) throw SchemaError(std::string(what) + ": expected 6 values");
    std::array<double, kParamCount> a{};
    for (std::size_t i = 0; i < kParamCount; ++i) a[i] = io::parse_double(f[i], 0, what);
    return a;
}

}  // namespace detail

/// Text model file: key=value header, then [X], [y] and [alpha] CSV blocks.
inline std::string save(const GprModel& m) {
    io::KeyValues kv;
    kv.set("format", std::string(kModelFormat));
    kv.set("sigma", m.params().sigma);
    kv.set("length_scale", m.params().length_scale);
    kv.set("noise_sigma0", m.params().noise_sigma0);
    kv.set("mean_m0", m.params().mean_m0);
    kv.set("jitter", m.jitter());
    kv.set("rows", static_cast<std::uint64_t>(m.size()));
    kv.set("scaler_lo", detail::join(m.scaler().lo()));
    kv.set("scaler_span", detail::join(m.scaler().span()));
    std::string out = kv.str();
    out += "[X]\n";
    out += std::string(csv::kPointHeader) + "\n";
    for (const auto& x : m.train_x()) out += csv::point_fields(x) + "\n";
    out += "[y]\n";
    for (Eigen::Index i = 0; i < m.train_y().size(); ++i) out += io::format_double(m.train_y()(i)) + "\n";
    out += "[alpha]\n";
    for (Eigen::Index i = 0; i < m.alpha().size(); ++i) out += io::format_double(m.alpha()(i)) + "\n";
    return out;
}

/// Reloads by refitting the stored observations; the stored alpha must agree.
inline GprModel load(std::string_view text) {
    std::map<std::string, std::string> blocks;
    std::string header, current;
    std::string* sink = &header;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        auto t = io::trim(line);
        if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
            current = std::string(t.substr(1, t.size() - 2));
            sink = &blocks[current];
            continue;
        }
        *sink += std::string(line) + "\n";
    }
    auto kv = io::KeyValues::parse(header);
    if (!kv.contains("format") || kv.get("format") != kModelFormat)
        throw SchemaError("not a GPR model file (format key missing or not " + std::string(kModelFormat) + ")");
    for (const char* b : {"X", "y", "alpha"})
        if (!blocks.count(b)) throw SchemaError(std::string("GPR model file lacks the [") + b + "] block");

    KernelParams p;
    p.sigma = kv.get_double("sigma");
    p.length_scale = kv.get_double("length_scale");
    p.noise_sigma0 = kv.get_double("noise_sigma0");
    p.mean_m0 = kv.get_double("mean_m0");
    UnitScaler scaler(detail::parse_six(kv.get("scaler_lo"), "scaler_lo"),
                      detail::parse_six(kv.get("scaler_span"), "scaler_span"));
    auto rows = kv.get_uint("rows");

    auto xs = csv::read_points(blocks["X"]);
    std::vector<double> ys, alphas;
    auto column = [](const std::string& block, std::vector<double>& dst) {
        for (auto line : io::split(block, '\n')) {
            line = io::trim(line);
            if (!line.empty()) dst.push_back(io::parse_double(line, 0, "model value"));
        }
    };
    column(blocks["y"], ys);
    column(blocks["alpha"], alphas);
    if (xs.size() != rows || ys.size() != rows || alphas.size() != rows)
        throw SchemaError("GPR model blocks disagree with rows=" + std::to_string(rows));

    Dataset d;
    for (std::size_t i = 0; i < rows; ++i) d.rows.push_back({xs[i], ys[i]});
    GprModel m = fit(d, p, scaler);
    if (static_cast<std::uint64_t>(m.size()) != rows) throw SchemaError("GPR model file contains duplicate inputs");
    for (std::size_t i = 0; i < rows; ++i) {
        double a = m.alpha()(static_cast<Eigen::Index>(i));
        if (std::abs(a - alphas[i]) > 1e-9 * std::max(1.0, std::abs(alphas[i])))
            throw SchemaError("stored alpha does not match the refitted model (row " + std::to_string(i + 1) + ")");
    }
    return m;
}

}  // namespace gpr
}  // namespace vawt
