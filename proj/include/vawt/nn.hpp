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
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vawt/dataset.hpp"
#include "vawt/design_space.hpp"
#include "vawt/error.hpp"
#include "vawt/io.hpp"

namespace vawt {

struct MlpConfig {
    int hidden_layers = 1;
    int width = 64;
    double learning_rate = 0.01;
    int epochs = 20000;
    std::uint64_t seed = 0;
    double train_fraction = 0.9;
    /// Early stop when train MSE improves by less than this over `stop_window` epochs.
    double stop_tolerance = 1e-10;
    int stop_window = 100;

    void validate() const {
        if (hidden_layers < 1) throw InvalidArgument("MlpConfig: hidden_layers must be >= 1");
        if (width < 1) throw InvalidArgument("MlpConfig: width must be >= 1");
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw InvalidArgument("MlpConfig: learning_rate must be finite and >= 0");
        if (epochs < 0) throw InvalidArgument("MlpConfig: epochs must be >= 0");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw InvalidArgument("MlpConfig: train_fraction must lie in (0, 1)");
        if (stop_window < 1) throw InvalidArgument("MlpConfig: stop_window must be >= 1");
    }
};

/// Affine map between raw and standardized units: z = (v - shift) / scale.
struct Affine {
    double shift = 0.0;
    double scale = 1.0;
    double to_std(double v) const { return (v - shift) / scale; }
    double from_std(double z) const { return z * scale + shift; }
};

/// Dense tanh network. Layer i computes W[i] a + b[i]; every layer but the last
/// applies tanh.
struct MlpModel {
    MlpConfig config;
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
    std::array<Affine, kParamCount> input{};
    Affine output{};
    std::vector<double> history;  // per-epoch train MSE, standardized units

    std::size_t layers() const { return W.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < W.size(); ++i) n += static_cast<std::size_t>(W[i].size() + b[i].size());
        return n;
    }

    void check_shapes() const {
        if (W.empty() || W.size() != b.size()) throw ShapeMismatch("MlpModel: layer count mismatch");
        Eigen::Index in = static_cast<Eigen::Index>(kParamCount);
        for (std::size_t i = 0; i < W.size(); ++i) {
            if (W[i].cols() != in) throw ShapeMismatch("MlpModel: W" + std::to_string(i + 1) + " has wrong column count");
            if (b[i].size() != W[i].rows()) throw ShapeMismatch("MlpModel: b" + std::to_string(i + 1) + " size mismatch");
            in = W[i].rows();
        }
        if (in != 1) throw ShapeMismatch("MlpModel: output layer must have one row");
    }

    bool all_finite() const {
        for (std::size_t i = 0; i < W.size(); ++i)
            if (!W[i].allFinite() || !b[i].allFinite()) return false;
        return true;
    }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

struct TrainReport {
    double initial_train_mse = 0.0;
    double final_train_mse = 0.0;
    /// Held-out MSE: the external test set when one is given, else the internal validation split.
    double final_test_mse = 0.0;
    double validation_mse = 0.0;
    int epochs_run = 0;
    bool diverged = false;
};

namespace nn {

/// Total parameters of an n-hidden-layer, width-w network on 6 inputs.
constexpr std::size_t param_count(std::size_t n, std::size_t w) { return 6 * w + w + (n - 1) * (w * w + w) + w + 1; }

/// Zero-initialised network with the layer shapes of `config`.
inline MlpModel make_model(const MlpConfig& config) {
    config.validate();
    MlpModel m;
    m.config = config;
    Eigen::Index in = static_cast<Eigen::Index>(kParamCount);
    const Eigen::Index w = config.width;
    for (int i = 0; i < config.hidden_layers; ++i) {
        m.W.push_back(Eigen::MatrixXd::Zero(w, in));
        m.b.push_back(Eigen::VectorXd::Zero(w));
        in = w;
    }
    m.W.push_back(Eigen::MatrixXd::Zero(1, in));
    m.b.push_back(Eigen::VectorXd::Zero(1));
    return m;
}

/// Uniform [-s, s] with s = fanin^-1/2, weights then biases, layer by layer.
inline void initialize(MlpModel& m, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        double s = 1.0 / std::sqrt(static_cast<double>(m.W[i].cols()));
        std::uniform_real_distribution<double> u(-s, s);
        for (Eigen::Index r = 0; r < m.W[i].rows(); ++r)
            for (Eigen::Index c = 0; c < m.W[i].cols(); ++c) m.W[i](r, c) = u(rng);
        for (Eigen::Index r = 0; r < m.b[i].size(); ++r) m.b[i](r) = u(rng);
    }
}

inline Eigen::Matrix<double, 6, 1> standardize_input(const MlpModel& m, const DesignPoint& x) {
    require_finite(x, "nn::forward");
    auto a = x.to_array();
    Eigen::Matrix<double, 6, 1> v;
    for (std::size_t i = 0; i < kParamCount; ++i) v(static_cast<Eigen::Index>(i)) = m.input[i].to_std(a[i]);
    return v;
}

/// Network output in standardized units for standardized inputs (one column per sample).
inline Eigen::RowVectorXd forward_std(const MlpModel& m, const Eigen::MatrixXd& xs) {
    m.check_shapes();
    Eigen::MatrixXd a = xs;
    for (std::size_t i = 0; i + 1 < m.W.size(); ++i) a = ((m.W[i] * a).colwise() + m.b[i]).array().tanh().matrix();
    return ((m.W.back() * a).colwise() + m.b.back()).row(0);
}

inline double forward(const MlpModel& m, const DesignPoint& x) {
    Eigen::MatrixXd xs = standardize_input(m, x);
    return m.output.from_std(forward_std(m, xs)(0));
}

namespace detail {

struct Batch {
    Eigen::MatrixXd x;   // 6 x N, standardized
    Eigen::RowVectorXd t;  // standardized targets
};

inline Batch make_batch(const MlpModel& m, const std::vector<Observation>& rows) {
    Batch bt;
    const auto n = static_cast<Eigen::Index>(rows.size());
    bt.x.resize(static_cast<Eigen::Index>(kParamCount), n);
    bt.t.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& r = rows[static_cast<std::size_t>(j)];
        bt.x.col(j) = standardize_input(m, r.x);
        if (!std::isfinite(r.ct)) throw NonFiniteInput("nn: non-finite C_T");
        bt.t(j) = m.output.to_std(r.ct);
    }
    return bt;
}

/// Loss (mean squared error, standardized units) and, when `g` is non-null, its gradient.
inline double loss_and_gradient(const MlpModel& m, const Batch& bt, Gradients* g) {
    const std::size_t L = m.W.size();
    const double n = static_cast<double>(bt.x.cols());
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(L);
    acts.push_back(bt.x);
    for (std::size_t i = 0; i + 1 < L; ++i)
        acts.push_back(((m.W[i] * acts.back()).colwise() + m.b[i]).array().tanh().matrix());
    Eigen::RowVectorXd out = ((m.W.back() * acts.back()).colwise() + m.b.back()).row(0);
    Eigen::RowVectorXd resid = out - bt.t;
    double loss = resid.squaredNorm() / n;
    if (g == nullptr) return loss;

    g->dW.assign(L, {});
    g->db.assign(L, {});
    Eigen::MatrixXd delta = (2.0 / n) * resid;
    for (std::size_t k = L; k-- > 0;) {
        g->dW[k] = delta * acts[k].transpose();
        g->db[k] = delta.rowwise().sum();
        if (k == 0) break;
        delta = ((m.W[k].transpose() * delta).array() * (1.0 - acts[k].array().square())).matrix();
    }
    return loss;
}

inline double mse_ct(const MlpModel& m, const std::vector<Observation>& rows) {
    if (rows.empty()) return 0.0;
    return loss_and_gradient(m, make_batch(m, rows), nullptr) * m.output.scale * m.output.scale;
}

inline Affine fit_affine(const std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(v.size()));
    return {mean, sd > 0.0 ? sd : 1.0};
}

}  // namespace detail

/// Gradient of the batch MSE (standardized units) with respect to every W_i and b_i.
inline Gradients backward(const MlpModel& m, const Dataset& batch) {
    if (batch.empty()) throw InvalidArgument("nn::backward: empty batch");
    m.check_shapes();
    Gradients g;
    detail::loss_and_gradient(m, detail::make_batch(m, batch.rows), &g);
    return g;
}

/// Batch MSE in standardized units (the training objective).
inline double loss(const MlpModel& m, const Dataset& batch) {
    if (batch.empty()) throw InvalidArgument("nn::loss: empty batch");
    m.check_shapes();
    return detail::loss_and_gradient(m, detail::make_batch(m, batch.rows), nullptr);
}

/// Mean squared error in C_T units.
inline double mse(const MlpModel& m, const Dataset& data) {
    if (data.empty()) throw InvalidArgument("nn::mse: empty dataset");
    m.check_shapes();
    return detail::mse_ct(m, data.rows);
}

/// One gradient-descent step: W <- W - lr dE/dW.
inline void apply_step(MlpModel& m, const Gradients& g, double lr) {
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        m.W[i] -= lr * g.dW[i];
        m.b[i] -= lr * g.db[i];
    }
}

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

inline constexpr std::size_t kMinTrainRows = 10;

/// Seeded shuffle split, standardization on the train split, fan-in uniform
/// initialization, then full-batch gradient descent.
inline TrainResult train(const Dataset& data, const MlpConfig& config, const Dataset* test = nullptr) {
    config.validate();
    if (data.size() < kMinTrainRows)
        throw DatasetTooSmall("nn::train: need at least " + std::to_string(kMinTrainRows) + " rows, got " +
                              std::to_string(data.size()));
    for (const auto& r : data.rows) {
        require_finite(r.x, "nn::train");
        if (!std::isfinite(r.ct)) throw NonFiniteInput("nn::train: non-finite C_T");
    }

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(data.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);
    std::vector<Observation> train_rows, valid_rows;
    for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train_rows : valid_rows).push_back(data.rows[order[i]]);

    MlpModel m = make_model(config);
    for (std::size_t j = 0; j < kParamCount; ++j) {
        std::vector<double> col;
        for (const auto& r : train_rows) col.push_back(r.x.to_array()[j]);
        m.input[j] = detail::fit_affine(col);
    }
    {
        std::vector<double> ys;
        for (const auto& r : train_rows) ys.push_back(r.ct);
        m.output = detail::fit_affine(ys);
    }
    initialize(m, rng);

    TrainResult res;
    const auto batch = detail::make_batch(m, train_rows);
    const double out_var = m.output.scale * m.output.scale;
    Gradients g;
    double current = detail::loss_and_gradient(m, batch, &g);
    res.report.initial_train_mse = current * out_var;
    int epochs_run = 0;
    for (int e = 0; e < config.epochs; ++e) {
        m.history.push_back(current);
        auto prev_W = m.W;
        auto prev_b = m.b;
        apply_step(m, g, config.learning_rate);
        Gradients g_next;
        double next = m.all_finite() ? detail::loss_and_gradient(m, batch, &g_next)
                                     : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(next)) {
            m.W = std::move(prev_W);
            m.b = std::move(prev_b);
            res.report.diverged = true;
            break;
        }
        g = std::move(g_next);
        current = next;
        ++epochs_run;
        const auto h = m.history.size();
        if (h > static_cast<std::size_t>(config.stop_window) &&
            m.history[h - 1 - static_cast<std::size_t>(config.stop_window)] - current < config.stop_tolerance)
            break;
    }
    res.report.epochs_run = epochs_run;
    res.report.final_train_mse = current * out_var;
    res.report.validation_mse = detail::mse_ct(m, valid_rows);
    res.report.final_test_mse = (test != nullptr && !test->empty()) ? mse(m, *test) : res.report.validation_mse;
    res.model = std::move(m);
    return res;
}

struct GridEntry {
    MlpConfig config;
    TrainReport report;
};

struct GridResult {
    std::vector<GridEntry> table;
    std::size_t best = 0;
    const GridEntry& winner() const { return table.at(best); }
};

inline constexpr std::array<int, 2> kGridLayers{1, 2};
inline constexpr std::array<double, 2> kGridRates{0.01, 0.001};
inline constexpr std::array<int, 8> kGridWidths{10, 20, 30, 40, 50, 64, 80, 128};

/// The 32 grid configurations in table order (layers, then rate, then width).
inline std::vector<MlpConfig> grid_configs(const MlpConfig& base = {}) {
    std::vector<MlpConfig> out;
    for (int n : kGridLayers)
        for (double lr : kGridRates)
            for (int w : kGridWidths) {
                MlpConfig c = base;
                c.hidden_layers = n;
                c.learning_rate = lr;
                c.width = w;
                out.push_back(c);
            }
    return out;
}

/// True when `a` beats `b`: lower test MSE, then smaller width, fewer layers, larger rate.
inline bool grid_better(const GridEntry& a, const GridEntry& b) {
    if (a.report.final_test_mse != b.report.final_test_mse) return a.report.final_test_mse < b.report.final_test_mse;
    if (a.config.width != b.config.width) return a.config.width < b.config.width;
    if (a.config.hidden_layers != b.config.hidden_layers) return a.config.hidden_layers < b.config.hidden_layers;
    return a.config.learning_rate > b.config.learning_rate;
}

/// Trains every grid configuration with the same seed and split. `threads` = 0 uses
/// the hardware concurrency; the table order never depends on scheduling.
inline GridResult grid_search(const Dataset& data, const Dataset& test, const MlpConfig& base = {}, unsigned threads = 0) {
    auto configs = grid_configs(base);
    GridResult res;
    res.table.resize(configs.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(configs.size());
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
            try {
                res.table[i] = {configs[i], train(data, configs[i], &test).report};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (std::size_t i = 1; i < res.table.size(); ++i)
        if (grid_better(res.table[i], res.table[res.best])) res.best = i;
    return res;
}

inline constexpr std::string_view kModelFormat = "vawt-mlp-1";
inline constexpr int kModelDigits = 17;

/// Text model: key=value config echo, then one [Wi rows cols] / [bi rows] block per layer, row-major.
inline std::string save(const MlpModel& m) {
    m.check_shapes();
    auto f = [](double v) { return io::format_double(v, kModelDigits); };
    io::KeyValues kv;
    kv.set("format", std::string(kModelFormat));
    kv.set("hidden_layers", m.config.hidden_layers);
    kv.set("width", m.config.width);
    kv.set("learning_rate", m.config.learning_rate);
    kv.set("epochs", m.config.epochs);
    kv.set("seed", m.config.seed);
    kv.set("train_fraction", m.config.train_fraction);
    std::string shift, scale;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        shift += (i ? "," : "") + f(m.input[i].shift);
        scale += (i ? "," : "") + f(m.input[i].scale);
    }
    kv.set("input_shift", shift);
    kv.set("input_scale", scale);
    kv.set("output_shift", f(m.output.shift));
    kv.set("output_scale", f(m.output.scale));
    std::string out = kv.str();
    for (std::size_t k = 0; k < m.W.size(); ++k) {
        out += "[W" + std::to_string(k + 1) + " " + std::to_string(m.W[k].rows()) + " " +
               std::to_string(m.W[k].cols()) + "]\n";
        for (Eigen::Index r = 0; r < m.W[k].rows(); ++r) {
            for (Eigen::Index c = 0; c < m.W[k].cols(); ++c) out += (c ? "," : "") + f(m.W[k](r, c));
            out += "\n";
        }
        out += "[b" + std::to_string(k + 1) + " " + std::to_string(m.b[k].size()) + "]\n";
        for (Eigen::Index r = 0; r < m.b[k].size(); ++r) out += f(m.b[k](r)) + "\n";
    }
    return out;
}

inline MlpModel load(std::string_view text) {
    std::vector<std::string_view> lines = io::split(text, '\n');
    std::size_t i = 0;
    std::string header;
    for (; i < lines.size() && !io::trim(lines[i]).starts_with("["); ++i) header += std::string(lines[i]) + "\n";
    auto kv = io::KeyValues::parse(header);
    if (!kv.contains("format") || kv.get("format") != kModelFormat)
        throw SchemaError("not an NN model file (format key missing or not " + std::string(kModelFormat) + ")");

    MlpConfig c;
    c.hidden_layers = static_cast<int>(kv.get_uint("hidden_layers"));
    c.width = static_cast<int>(kv.get_uint("width"));
    c.learning_rate = kv.get_double("learning_rate");
    c.epochs = static_cast<int>(kv.get_uint("epochs"));
    c.seed = kv.get_uint("seed");
    c.train_fraction = kv.get_double("train_fraction");
    MlpModel m = make_model(c);

    auto six = [&](std::string_view key) {
        auto fields = io::split(kv.get(key));
        if (fields.size() != kParamCount) throw SchemaError(std::string(key) + ": expected 6 values");
        std::array<double, kParamCount> a{};
        for (std::size_t j = 0; j < kParamCount; ++j) a[j] = io::parse_double(fields[j], 0, key);
        return a;
    };
    auto sh = six("input_shift"), sc = six("input_scale");
    for (std::size_t j = 0; j < kParamCount; ++j) m.input[j] = {sh[j], sc[j]};
    m.output = {kv.get_double("output_shift"), kv.get_double("output_scale")};

    auto next_row = [&](std::size_t expect) {
        while (i < lines.size() && io::trim(lines[i]).empty()) ++i;
        if (i >= lines.size()) throw SchemaError("NN model file truncated", i + 1);
        auto fields = io::split(io::trim(lines[i]));
        if (fields.size() != expect)
            throw SchemaError("NN model row has " + std::to_string(fields.size()) + " values, expected " +
                                  std::to_string(expect), i + 1);
        std::vector<double> v;
        for (auto f : fields) v.push_back(io::parse_double(f, i + 1, "weight"));
        ++i;
        return v;
    };
    auto expect_block = [&](const std::string& tag) {
        while (i < lines.size() && io::trim(lines[i]).empty()) ++i;
        if (i >= lines.size() || io::trim(lines[i]) != tag)
            throw SchemaError("expected block " + tag, i + 1);
        ++i;
    };
    for (std::size_t k = 0; k < m.W.size(); ++k) {
        expect_block("[W" + std::to_string(k + 1) + " " + std::to_string(m.W[k].rows()) + " " +
                     std::to_string(m.W[k].cols()) + "]");
        for (Eigen::Index r = 0; r < m.W[k].rows(); ++r) {
            auto v = next_row(static_cast<std::size_t>(m.W[k].cols()));
            for (Eigen::Index cc = 0; cc < m.W[k].cols(); ++cc) m.W[k](r, cc) = v[static_cast<std::size_t>(cc)];
        }
        expect_block("[b" + std::to_string(k + 1) + " " + std::to_string(m.b[k].size()) + "]");
        for (Eigen::Index r = 0; r < m.b[k].size(); ++r) m.b[k](r) = next_row(1)[0];
    }
    if (!m.all_finite()) throw SchemaError("NN model contains non-finite parameters");
    return m;
}

}  // namespace nn
}  // namespace vawt
