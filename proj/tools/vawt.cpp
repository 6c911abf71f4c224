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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vawt/vawt.hpp"

namespace fs = std::filesystem;
using namespace vawt;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kIo = 3, kData = 4, kOptimization = 5 };

struct Global {
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string preset = "default";
    std::vector<std::string> bound_overrides;

    DesignSpaceBounds bounds() const {
        auto b = DesignSpaceBounds::from_preset(preset);
        for (const auto& s : bound_overrides) {
            auto f = io::split(s, ':');
            if (f.size() != 3) throw InvalidArgument("--bound must be NAME:lo:hi, got '" + s + "'");
            Interval* iv = nullptr;
            if (f[0] == "kappa_r") iv = &b.kappa_r;
            else if (f[0] == "kappa_d_L_d") iv = &b.kappa_d_L_d;
            else if (f[0] == "L_dr") iv = &b.L_dr;
            else if (f[0] == "L_rr") iv = &b.L_rr;
            else if (f[0] == "L_d") iv = &b.L_d;
            else if (f[0] == "alpha_deg") iv = &b.alpha_deg;
            else throw InvalidArgument("unknown --bound name '" + std::string(f[0]) + "'");
            try {
                iv->lo = io::parse_double(f[1]);
                iv->hi = io::parse_double(f[2]);
            } catch (const SchemaError&) {
                throw InvalidArgument("bad --bound range in '" + s + "'");
            }
        }
        b.validate();
        return b;
    }
};

fs::path out_path(const Global& g, const std::string& name) {
    fs::path dir(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir / name;
}

/// Resolved configuration (deterministic) plus a timestamped run sidecar.
void write_manifest(const Global& g, const std::string& stem, const std::string& command, io::KeyValues kv) {
    io::KeyValues m;
    m.set("command", command);
    m.set("seed", g.seed);
    m.set("preset", g.preset);
    for (const auto& s : g.bound_overrides) m.set("bound_" + std::string(io::split(s, ':').front()), s);
    for (const auto& [k, v] : kv.items()) m.set(k, v);
    m.set("config_hash", io::hex64(io::fnv1a64(m.str())));
    io::write_file_atomic(out_path(g, stem + ".manifest"), m.str());
    io::KeyValues run;
    run.set("command", command);
    run.set("generated_at", oracle::utc_timestamp());
    io::write_file_atomic(out_path(g, stem + ".run.meta"), run.str());
}

std::array<double, kParamCount> parse_point(const std::string& s) {
    auto f = io::split(s);
    if (f.size() != kParamCount) throw InvalidArgument("expected 6 comma-separated values, got '" + s + "'");
    std::array<double, kParamCount> a{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
        try {
            a[i] = io::parse_double(f[i]);
        } catch (const SchemaError&) {
            throw InvalidArgument("cannot parse number '" + std::string(f[i]) + "'");
        }
    }
    return a;
}

struct AxisSpec {
    Param param;
    Interval range;
};

/// NAME:lo:hi
AxisSpec parse_axis(const std::string& s, const DesignSpaceBounds& b) {
    auto f = io::split(s, ':');
    if (f.size() != 1 && f.size() != 3) throw InvalidArgument("axis must be NAME or NAME:lo:hi, got '" + s + "'");
    auto p = parse_param(f[0]);
    Interval r = b.range(p);
    if (f.size() == 3) {
        try {
            r = {io::parse_double(f[1]), io::parse_double(f[2])};
        } catch (const SchemaError&) {
            throw InvalidArgument("bad axis range in '" + s + "'");
        }
    }
    if (!(r.hi > r.lo)) throw InvalidArgument("axis range must have hi > lo in '" + s + "'");
    return {p, r};
}

/// Most-square factorization n = nx * ny with nx >= ny.
std::pair<std::size_t, std::size_t> factor_grid(std::size_t n) {
    std::size_t ny = 1;
    for (std::size_t d = 1; d * d <= n; ++d)
        if (n % d == 0) ny = d;
    return {n / ny, ny};
}

Dataset read_dataset_file(const std::string& path) { return csv::read_dataset(io::read_file(path)); }

std::string model_format(const std::string& text) {
    auto nl = text.find('\n');
    auto kv = io::KeyValues::parse(std::string_view(text).substr(0, nl));
    return kv.contains("format") ? kv.get("format") : std::string();
}

struct LoadedModel {
    std::string kind;
    std::shared_ptr<const GprModel> gpr;
    std::shared_ptr<const MlpModel> nn;

    Surrogate surrogate() const { return gpr ? Surrogate::gpr(gpr) : Surrogate::nn(nn); }
};

LoadedModel load_model(const std::string& path) {
    auto text = io::read_file(path);
    auto fmt = model_format(text);
    LoadedModel m;
    if (fmt == gpr::kModelFormat) {
        m.kind = "gpr";
        m.gpr = std::make_shared<const GprModel>(gpr::load(text));
    } else if (fmt == nn::kModelFormat) {
        m.kind = "nn";
        m.nn = std::make_shared<const MlpModel>(nn::load(text));
    } else {
        throw SchemaError(path + " is not a model file (unknown format '" + fmt + "')", 1);
    }
    return m;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::size_t n = 250;
    std::vector<std::string> grid;
    std::string fixed;
    double noise = 0.0;
    std::string name = "dataset";
};

int cmd_generate(const Global& g, const GenerateArgs& a) {
    if (a.n < 1) throw InvalidArgument("--n must be >= 1");
    auto bounds = g.bounds();
    OracleConfig config;
    config.noise_sigma = a.noise;
    config.validate();
    io::KeyValues kv;
    kv.set("n", static_cast<std::uint64_t>(a.n));
    kv.set("noise_sigma", a.noise);
    kv.set("oracle_hash", oracle::config_hash(config));
    Dataset d;
    if (a.grid.empty()) {
        d = oracle::generate_dataset(bounds, a.n, g.seed, config);
        kv.set("mode", "sample");
    } else {
        if (a.grid.size() != 2) throw InvalidArgument("--grid takes exactly two axes");
        auto ax = parse_axis(a.grid[0], bounds), ay = parse_axis(a.grid[1], bounds);
        if (ax.param == ay.param) throw InvalidArgument("--grid axes must differ");
        auto [nx, ny] = factor_grid(a.n);
        if (ny < 2) throw InvalidArgument("--n must factor into a grid with at least 2 points per axis");
        DesignPoint fixed = a.fixed.empty() ? contour_fixed_point() : DesignPoint::from_array(parse_point(a.fixed));
        std::vector<DesignPoint> pts;
        for (const auto& gp : grid(ax.param, ax.range, nx, ay.param, ay.range, ny, fixed, bounds)) pts.push_back(gp.x);
        d = oracle::evaluate_points(pts, g.seed, config);
        kv.set("mode", "grid");
        kv.set("grid", a.grid[0] + " " + a.grid[1]);
        kv.set("grid_shape", std::to_string(nx) + "x" + std::to_string(ny));
        kv.set("fixed", csv::point_fields(fixed));
    }
    d.meta.preset = g.preset;
    io::write_file_atomic(out_path(g, a.name + ".csv"), csv::write_dataset(d));
    io::write_file_atomic(out_path(g, a.name + ".meta"), dataset_sidecar(d).str());
    write_manifest(g, a.name, "generate", kv);
    std::cout << "wrote " << d.size() << " rows to " << out_path(g, a.name + ".csv").string() << "\n";
    return kOk;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::string model = "gpr";
    std::string data;
    std::string test;
    std::string name = "model";
    KernelParams kernel;
    bool tune = false;
    MlpConfig mlp;
    bool grid_search = false;
    unsigned threads = 0;
};

int cmd_train(const Global& g, TrainArgs a) {
    auto data = read_dataset_file(a.data);
    std::optional<Dataset> test;
    if (!a.test.empty()) test = read_dataset_file(a.test);
    io::KeyValues kv;
    kv.set("model", a.model);
    kv.set("data", a.data);
    kv.set("data_rows", static_cast<std::uint64_t>(data.size()));
    kv.set("test", a.test);
    io::KeyValues rep;
    std::string model_text;

    if (a.model == "gpr") {
        auto bounds = g.bounds();
        UnitScaler scaler(bounds);
        if (a.tune) {
            auto lattice = gpr::make_lattice({0.1, 0.25, 0.5, 1.0, 2.0}, {0.1, 0.2, 0.3, 0.5, 0.7, 1.0});
            a.kernel = gpr::tune(data, lattice, a.kernel, scaler);
        }
        auto m = gpr::fit(data, a.kernel, scaler);
        kv.set("sigma", a.kernel.sigma);
        kv.set("length_scale", a.kernel.length_scale);
        kv.set("noise_sigma0", a.kernel.noise_sigma0);
        kv.set("mean_m0", a.kernel.mean_m0);
        kv.set("tune", a.tune ? "true" : "false");
        rep.set("train_mse", gpr::mse(m, data));
        if (test) rep.set("test_mse", gpr::mse(m, *test));
        rep.set("nlml", gpr::nlml(data, a.kernel, scaler));
        rep.set("jitter", m.jitter());
        model_text = gpr::save(m);
    } else if (a.model == "nn") {
        kv.set("epochs", a.mlp.epochs);
        kv.set("train_fraction", a.mlp.train_fraction);
        a.mlp.seed = g.seed;
        if (a.grid_search) {
            if (!test) throw InvalidArgument("--grid-search requires --test");
            auto res = nn::grid_search(data, *test, a.mlp, a.threads);
            std::string table = "hidden_layers,width,learning_rate,train_mse,validation_mse,test_mse,epochs_run,diverged\n";
            for (const auto& e : res.table)
                table += std::to_string(e.config.hidden_layers) + "," + std::to_string(e.config.width) + "," +
                         io::format_double(e.config.learning_rate) + "," + io::format_double(e.report.final_train_mse) +
                         "," + io::format_double(e.report.validation_mse) + "," +
                         io::format_double(e.report.final_test_mse) + "," + std::to_string(e.report.epochs_run) + "," +
                         (e.report.diverged ? "1" : "0") + "\n";
            io::write_file_atomic(out_path(g, a.name + "_grid.csv"), table);
            std::cout << table;
            a.mlp = res.winner().config;
            kv.set("grid_search", "true");
        }
        kv.set("hidden_layers", a.mlp.hidden_layers);
        kv.set("width", a.mlp.width);
        kv.set("learning_rate", a.mlp.learning_rate);
        auto r = nn::train(data, a.mlp, test ? &*test : nullptr);
        rep.set("hidden_layers", a.mlp.hidden_layers);
        rep.set("width", a.mlp.width);
        rep.set("learning_rate", a.mlp.learning_rate);
        rep.set("initial_train_mse", r.report.initial_train_mse);
        rep.set("train_mse", r.report.final_train_mse);
        rep.set("validation_mse", r.report.validation_mse);
        if (test) rep.set("test_mse", r.report.final_test_mse);
        rep.set("epochs_run", r.report.epochs_run);
        rep.set("diverged", r.report.diverged ? "true" : "false");
        model_text = nn::save(r.model);
    } else {
        throw InvalidArgument("--model must be gpr or nn");
    }
    io::write_file_atomic(out_path(g, a.name + ".model"), model_text);
    io::write_file_atomic(out_path(g, a.name + ".report"), rep.str());
    write_manifest(g, a.name, "train", kv);
    std::cout << rep.str();
    return kOk;
}

// ---- contour ----------------------------------------------------------------

struct ContourArgs {
    std::string model;
    std::string axes = "L_rr,L_d";
    std::size_t res = 50;
    std::string fixed;
    std::string range_a, range_b;
    std::string name = "contour";
};

int cmd_contour(const Global& g, const ContourArgs& a) {
    auto bounds = g.bounds();
    auto names = io::split(a.axes);
    if (names.size() != 2) throw InvalidArgument("--axes takes two comma-separated parameter names");
    std::string sa(names[0]), sb(names[1]);
    auto ax = parse_axis(a.range_a.empty() ? sa : sa + ":" + a.range_a, bounds);
    auto ay = parse_axis(a.range_b.empty() ? sb : sb + ":" + a.range_b, bounds);
    if (ax.param == ay.param) throw InvalidArgument("--axes must name two different parameters");
    if (a.res < 2) throw InvalidArgument("--res must be >= 2");
    DesignPoint fixed = a.fixed.empty() ? contour_fixed_point() : DesignPoint::from_array(parse_point(a.fixed));
    auto model = load_model(a.model);
    auto s = model.surrogate();
    std::string out = std::string(param_name(ax.param)) + "," + std::string(param_name(ay.param)) + ",C_T_pred,feasible\n";
    for (const auto& gp : grid(ax.param, ax.range, ay.param, ay.range, a.res, fixed, bounds))
        out += io::format_double(gp.x.get(ax.param)) + "," + io::format_double(gp.x.get(ay.param)) + "," +
               io::format_double(s.predict(gp.x)) + "," + (gp.report.feasible ? "1" : "0") + "\n";
    io::write_file_atomic(out_path(g, a.name + ".csv"), out);
    io::KeyValues kv;
    kv.set("model", a.model);
    kv.set("model_kind", model.kind);
    kv.set("axes", std::string(param_name(ax.param)) + "," + std::string(param_name(ay.param)));
    kv.set("range_a", io::format_double(ax.range.lo) + ":" + io::format_double(ax.range.hi));
    kv.set("range_b", io::format_double(ay.range.lo) + ":" + io::format_double(ay.range.hi));
    kv.set("res", static_cast<std::uint64_t>(a.res));
    kv.set("fixed", csv::point_fields(fixed));
    write_manifest(g, a.name, "contour", kv);
    std::cout << "fixed " << csv::point_fields(fixed) << "\nwrote " << a.res * a.res << " rows to "
              << out_path(g, a.name + ".csv").string() << "\n";
    return kOk;
}

// ---- scale ------------------------------------------------------------------

struct ScaleArgs {
    std::vector<std::string> curves;
    std::string data;
    bool torque = false;
    double lambda_l = 1.0, lambda_v = 1.0;
    double torque_nm = 0.0, omega = 0.0, power = -1.0;
    double wind_speed = 3.0, rho = 1.225, area = 3.0;
};

int cmd_scale(const Global& g, const std::string& action, const ScaleArgs& a) {
    io::KeyValues rep;
    if (action == "rated") {
        if (a.curves.empty()) throw InvalidArgument("scale rated needs --curve");
        std::size_t i = 0;
        for (const auto& path : a.curves) {
            auto c = scaling::csv::read_curve(io::read_file(path));
            auto r = scaling::rated_power(c);
            std::string p = "curve" + std::to_string(++i) + ".";
            rep.set(p + "file", path);
            if (std::isfinite(c.wind_speed)) rep.set(p + "wind_speed", c.wind_speed);
            if (std::isfinite(c.lambda_l)) rep.set(p + "lambda_l", c.lambda_l);
            rep.set(p + "rated_power", r.power);
            rep.set(p + "omega", r.angular_velocity);
            rep.set(p + "torque", r.torque);
        }
    } else if (action == "fit") {
        if (a.data.empty()) throw InvalidArgument("scale fit needs --data");
        auto pts = scaling::csv::read_scale_points(io::read_file(a.data));
        auto f = a.torque ? scaling::rated_torque_law(pts) : scaling::fit_power_law(pts);
        rep.set("quantity", a.torque ? "torque" : "power");
        rep.set("prefactor", f.prefactor);
        rep.set("exponent_l", f.exponent_l);
        rep.set("exponent_v", f.exponent_v);
        rep.set("residual", f.residual);
        rep.set("dropped_l", f.dropped_l ? "true" : "false");
        rep.set("dropped_v", f.dropped_v ? "true" : "false");
        std::string neg;
        for (auto k : f.negative_indices) neg += (neg.empty() ? "" : ",") + std::to_string(k + 1);
        if (!neg.empty()) rep.set("negative_rows", neg);
    } else if (action == "similarity") {
        auto s = scaling::similarity_from_speed(a.lambda_l, a.lambda_v);
        rep.set("lambda_l", s.params.lambda_l);
        rep.set("lambda_t", s.params.lambda_t);
        rep.set("lambda_rho", s.params.lambda_rho);
        rep.set("lambda_v", a.lambda_v);
        rep.set("viscosity_mismatch", s.viscosity_mismatch);
        rep.set("power_factor", a.lambda_l * a.lambda_l * std::pow(a.lambda_v, 3));
        rep.set("torque_factor", std::pow(a.lambda_l, 3) * a.lambda_v * a.lambda_v);
    } else if (action == "efficiency") {
        OperatingPoint op;
        if (a.power >= 0.0) {
            op.torque = a.power;
            op.angular_velocity = 1.0;
        } else {
            op.torque = a.torque_nm;
            op.angular_velocity = a.omega;
        }
        op.wind_speed = a.wind_speed;
        op.air_density = a.rho;
        op.swept_area = a.area;
        auto e = scaling::efficiency(op);
        rep.set("power", op.power());
        rep.set("eta", e.eta);
        rep.set("betz_warning", e.betz_warning ? "true" : "false");
    }
    io::write_file_atomic(out_path(g, "scale_" + action + ".txt"), rep.str());
    std::cout << rep.str();
    return kOk;
}

// ---- optimize ---------------------------------------------------------------

struct OptimizeArgs {
    std::string model;
    bool use_oracle = false;
    std::uint64_t budget = 100000;
    std::uint64_t seeds = 1;
    bool verify = false;
    double baseline = OracleConfig{}.baseline_ct;
    std::string name = "optimum";
};

int cmd_optimize(const Global& g, const OptimizeArgs& a) {
    if (a.use_oracle == !a.model.empty()) throw InvalidArgument("give exactly one of --model or --oracle");
    if (a.seeds < 1) throw InvalidArgument("--seeds must be >= 1");
    auto bounds = g.bounds();
    std::optional<LoadedModel> model;
    if (!a.use_oracle) model = load_model(a.model);
    Surrogate s = a.use_oracle ? Surrogate::oracle() : model->surrogate();
    SearchOptions o;
    o.baseline_ct = a.baseline;
    OptResult best;
    std::uint64_t evals = 0;
    for (std::uint64_t k = 0; k < a.seeds; ++k) {
        auto r = opt::maximize(s, bounds, a.budget, g.seed + k, o);
        evals += r.evaluations;
        if (k == 0 || r.ct_star > best.ct_star) best = r;
    }
    best.evaluations = evals;
    double verified = oracle::evaluate(best.x_star);
    auto rep = opt::report(best, s.name(), (a.verify || a.use_oracle) ? &verified : nullptr);
    io::write_file_atomic(out_path(g, a.name + ".txt"), rep.str());
    io::write_file_atomic(out_path(g, a.name + "_xstar.csv"), csv::write_points({best.x_star}));
    io::KeyValues kv;
    kv.set("surrogate", s.name());
    kv.set("model", a.model);
    kv.set("budget", a.budget);
    kv.set("seeds", a.seeds);
    kv.set("baseline_ct", a.baseline);
    write_manifest(g, a.name, "optimize", kv);
    std::cout << rep.str();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-model design optimization for a deflector-augmented twin-rotor VAWT"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--preset", g.preset, "Design-space bounds preset")
        ->check(CLI::IsMember({"default", "extended"}))
        ->capture_default_str();
    app.add_option("--bound", g.bound_overrides, "Override one preset interval as NAME:lo:hi (repeatable)");

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "Sample oracle C_T observations");
    gen->add_option("--n", ga.n, "Number of points")->capture_default_str();
    gen->add_option("--grid", ga.grid, "Two axes NAME:lo:hi for a tensor grid instead of random sampling")->expected(2);
    gen->add_option("--fixed", ga.fixed, "Fixed design point for --grid (6 comma-separated values)");
    gen->add_option("--noise", ga.noise, "Gaussian noise sigma added to C_T")->capture_default_str();
    gen->add_option("--name", ga.name, "Output file stem")->capture_default_str();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a GPR or NN surrogate");
    tr->add_option("--model", ta.model, "gpr or nn")->check(CLI::IsMember({"gpr", "nn"}))->capture_default_str();
    tr->add_option("--data", ta.data, "Training dataset CSV")->required();
    tr->add_option("--test", ta.test, "Held-out test dataset CSV");
    tr->add_option("--name", ta.name, "Output file stem")->capture_default_str();
    tr->add_option("--sigma", ta.kernel.sigma, "GPR kernel amplitude")->capture_default_str();
    tr->add_option("--length-scale", ta.kernel.length_scale, "GPR length scale (l^2 enters the kernel)")->capture_default_str();
    tr->add_option("--noise-sigma0", ta.kernel.noise_sigma0, "GPR observation noise")->capture_default_str();
    tr->add_option("--m0", ta.kernel.mean_m0, "GPR prior mean")->capture_default_str();
    tr->add_flag("--tune", ta.tune, "Tune sigma and length scale by marginal likelihood");
    tr->add_option("--layers", ta.mlp.hidden_layers, "NN hidden layers")->capture_default_str();
    tr->add_option("--width", ta.mlp.width, "NN hidden width")->capture_default_str();
    tr->add_option("--lr", ta.mlp.learning_rate, "NN learning rate")->capture_default_str();
    tr->add_option("--epochs", ta.mlp.epochs, "NN epoch budget")->capture_default_str();
    tr->add_option("--train-fraction", ta.mlp.train_fraction, "NN internal train split")->capture_default_str();
    tr->add_flag("--grid-search", ta.grid_search, "Run the 32-configuration NN grid search");
    tr->add_option("--threads", ta.threads, "Grid-search worker threads (0 = all cores)")->capture_default_str();

    ContourArgs ca;
    auto* co = app.add_subcommand("contour", "Export a 2-D prediction grid");
    co->add_option("--model", ca.model, "Trained model file")->required();
    co->add_option("--axes", ca.axes, "Two parameter names")->capture_default_str();
    co->add_option("--res", ca.res, "Points per axis")->capture_default_str();
    co->add_option("--fixed", ca.fixed, "Fixed design point (6 comma-separated values)");
    co->add_option("--range-a", ca.range_a, "lo:hi for the first axis");
    co->add_option("--range-b", ca.range_b, "lo:hi for the second axis");
    co->add_option("--name", ca.name, "Output file stem")->capture_default_str();

    ScaleArgs sa;
    std::string scale_action;
    auto* sc = app.add_subcommand("scale", "Scaling analysis");
    sc->require_subcommand(1);
    auto* rated = sc->add_subcommand("rated", "Rated power of torque-speed curves");
    rated->add_option("--curve", sa.curves, "Torque curve CSV (repeatable)")->required();
    auto* fit = sc->add_subcommand("fit", "Fit a power law to (lambda_l, lambda_v, value) data");
    fit->add_option("--data", sa.data, "Scale data CSV")->required();
    fit->add_flag("--torque", sa.torque, "Fit |value| as torque");
    auto* sim = sc->add_subcommand("similarity", "Scale factors from geometry and wind-speed scales");
    sim->add_option("--lambda-l", sa.lambda_l)->required();
    sim->add_option("--lambda-v", sa.lambda_v)->required();
    auto* eff = sc->add_subcommand("efficiency", "Power efficiency and Betz check");
    eff->add_option("--torque", sa.torque_nm, "Torque (N m)");
    eff->add_option("--omega", sa.omega, "Angular velocity (rad/s)");
    eff->add_option("--power", sa.power, "Mechanical power (W); overrides torque and omega");
    eff->add_option("--wind-speed", sa.wind_speed)->capture_default_str();
    eff->add_option("--rho", sa.rho)->capture_default_str();
    eff->add_option("--area", sa.area)->capture_default_str();
    for (auto* s : {rated, fit, sim, eff}) s->callback([&scale_action, s] { scale_action = s->get_name(); });

    OptimizeArgs oa;
    auto* op = app.add_subcommand("optimize", "Maximize predicted C_T over the design space");
    op->add_option("--model", oa.model, "Trained model file");
    op->add_flag("--oracle", oa.use_oracle, "Optimize the oracle directly");
    op->add_option("--budget", oa.budget, "Surrogate evaluations per seed")->capture_default_str();
    op->add_option("--seeds", oa.seeds, "Number of consecutive seeds starting at --seed")->capture_default_str();
    op->add_flag("--verify-oracle", oa.verify, "Evaluate the optimum under the oracle");
    op->add_option("--baseline", oa.baseline, "Baseline C_T for the improvement figure")->capture_default_str();
    op->add_option("--name", oa.name, "Output file stem")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(g, ga);
        if (tr->parsed()) return cmd_train(g, ta);
        if (co->parsed()) return cmd_contour(g, ca);
        if (sc->parsed()) return cmd_scale(g, scale_action, sa);
        if (op->parsed()) return cmd_optimize(g, oa);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const GridTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const NoFeasibleStart& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOptimization;
    } catch (const ExhaustedRejection& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOptimization;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
