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

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vawt/design_space.hpp"
#include "vawt/error.hpp"
#include "vawt/io.hpp"

namespace vawt {

struct Observation {
    DesignPoint x;
    double ct = 0.0;
};

struct DatasetMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string generated_at;  ///< only ever written to the sidecar
    double reynolds = 8e4;
    double noise_sigma = 0.0;
    std::string preset = "default";
};

/// Ordered (DesignPoint, C_T) observations. add() keeps the no-duplicate invariant;
/// rows may also be filled directly, in which case consumers re-check.
class Dataset {
public:
    std::vector<Observation> rows;
    DatasetMeta meta;

    /// Returns false for an exact repeat of an existing row; throws on a repeated
    /// point with a different C_T.
    bool add(const DesignPoint& x, double ct) {
        require_finite(x, "Dataset::add");
        if (!std::isfinite(ct)) throw NonFiniteInput("Dataset::add: C_T is not finite");
        auto [it, inserted] = index_.emplace(x.to_array(), rows.size());
        if (!inserted) {
            if (rows[it->second].ct == ct) return false;
            throw ConflictingDuplicates("design point repeated with a different C_T");
        }
        rows.push_back({x, ct});
        return true;
    }

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    Dataset prefix(std::size_t n) const {
        Dataset d;
        d.meta = meta;
        for (std::size_t i = 0; i < n && i < rows.size(); ++i) d.add(rows[i].x, rows[i].ct);
        return d;
    }

private:
    std::map<std::array<double, kParamCount>, std::size_t> index_;
};

namespace csv {

inline constexpr std::string_view kPointHeader = "kappa_r,kappa_d,L_dr,L_rr,L_d,alpha_deg";
inline constexpr std::string_view kCtColumn = "C_T";

inline std::string point_fields(const DesignPoint& x) {
    std::string s;
    for (std::size_t i = 0; auto v : x.to_array()) {
        if (i++) s += ',';
        s += io::format_double(v);
    }
    return s;
}

inline std::string write_points(const std::vector<DesignPoint>& pts) {
    std::string out(kPointHeader);
    out += '\n';
    for (const auto& x : pts) out += point_fields(x) + '\n';
    return out;
}

inline std::string write_dataset(const Dataset& d) {
    std::string out(kPointHeader);
    out += ',';
    out += kCtColumn;
    out += '\n';
    for (const auto& r : d.rows) out += point_fields(r.x) + ',' + io::format_double(r.ct) + '\n';
    return out;
}

struct ParsedRows {
    bool has_ct = false;
    std::vector<Observation> rows;
};

/// Parses the design-point schema. The header must match the column order exactly;
/// the C_T column is required when require_ct is set.
inline ParsedRows parse(std::string_view text, bool require_ct) {
    ParsedRows out;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        auto line = io::trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        auto fields = io::split(line);
        if (!header_seen) {
            header_seen = true;
            auto expected = io::split(kPointHeader);
            if (fields.size() < expected.size())
                throw SchemaError("header has " + std::to_string(fields.size()) + " columns, expected " +
                                      std::string(kPointHeader) + (require_ct ? ",C_T" : ""),
                                  lineno);
            for (std::size_t i = 0; i < expected.size(); ++i)
                if (fields[i] != expected[i])
                    throw SchemaError("column " + std::to_string(i + 1) + " is '" + std::string(fields[i]) +
                                          "', expected '" + std::string(expected[i]) + "'",
                                      lineno);
            if (fields.size() == expected.size() + 1) {
                if (fields.back() != kCtColumn)
                    throw SchemaError("unexpected column '" + std::string(fields.back()) + "', expected 'C_T'", lineno);
                out.has_ct = true;
            } else if (fields.size() > expected.size() + 1) {
                throw SchemaError("too many header columns", lineno);
            }
            if (require_ct && !out.has_ct) throw SchemaError("missing required column 'C_T'", lineno);
            continue;
        }
        std::size_t want = out.has_ct ? kParamCount + 1 : kParamCount;
        if (fields.size() != want)
            throw SchemaError("row has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(want),
                              lineno);
        std::array<double, kParamCount> a{};
        for (std::size_t i = 0; i < kParamCount; ++i)
            a[i] = io::parse_double(fields[i], lineno, param_name(kAllParams[i]));
        Observation obs{DesignPoint::from_array(a), 0.0};
        if (out.has_ct) obs.ct = io::parse_double(fields[kParamCount], lineno, kCtColumn);
        if (!obs.x.all_finite() || !std::isfinite(obs.ct)) throw SchemaError("non-finite value", lineno);
        out.rows.push_back(obs);
    }
    if (!header_seen) throw SchemaError("empty file: header required");
    return out;
}

inline Dataset read_dataset(std::string_view text) {
    auto parsed = parse(text, true);
    Dataset d;
    for (const auto& r : parsed.rows) d.add(r.x, r.ct);
    return d;
}

inline std::vector<DesignPoint> read_points(std::string_view text) {
    auto parsed = parse(text, false);
    std::vector<DesignPoint> pts;
    pts.reserve(parsed.rows.size());
    for (const auto& r : parsed.rows) pts.push_back(r.x);
    return pts;
}

}  // namespace csv

/// key=value sidecar describing how a dataset was produced.
inline io::KeyValues dataset_sidecar(const Dataset& d) {
    io::KeyValues kv;
    kv.set("rows", static_cast<std::uint64_t>(d.size()));
    kv.set("seed", d.meta.seed);
    kv.set("config_hash", d.meta.config_hash);
    kv.set("noise_sigma", d.meta.noise_sigma);
    kv.set("reynolds", d.meta.reynolds);
    kv.set("preset", d.meta.preset);
    kv.set("generated_at", d.meta.generated_at);
    return kv;
}

inline void apply_sidecar(Dataset& d, const io::KeyValues& kv) {
    if (kv.contains("seed")) d.meta.seed = kv.get_uint("seed");
    if (kv.contains("config_hash")) d.meta.config_hash = kv.get("config_hash");
    if (kv.contains("noise_sigma")) d.meta.noise_sigma = kv.get_double("noise_sigma");
    if (kv.contains("reynolds")) d.meta.reynolds = kv.get_double("reynolds");
    if (kv.contains("preset")) d.meta.preset = kv.get("preset");
    if (kv.contains("generated_at")) d.meta.generated_at = kv.get("generated_at");
}

}  // namespace vawt
