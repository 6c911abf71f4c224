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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "vawt/error.hpp"

namespace vawt::io {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double(double v, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line = 0, std::string_view what = "value") {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("cannot parse " + std::string(what) + " '" + std::string(s) + "'", line);
    return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::size_t line = 0, std::string_view what = "value") {
    s = trim(s);
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("cannot parse " + std::string(what) + " '" + std::string(s) + "'", line);
    return v;
}

// Flat key=value records, kept in insertion order so files are stable.
class KeyValues {
public:
    void set(std::string key, std::string value) {
        for (auto& [k, v] : items_)
            if (k == key) {
                v = std::move(value);
                return;
            }
        items_.emplace_back(std::move(key), std::move(value));
    }
    void set(std::string key, double value) { set(std::move(key), format_double(value)); }
    void set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }
    void set(std::string key, int value) { set(std::move(key), std::to_string(value)); }

    bool contains(std::string_view key) const {
        for (const auto& kv : items_)
            if (kv.first == key) return true;
        return false;
    }
    const std::string& get(std::string_view key) const {
        for (const auto& kv : items_)
            if (kv.first == key) return kv.second;
        throw SchemaError("missing key '" + std::string(key) + "'");
    }
    double get_double(std::string_view key) const { return parse_double(get(key), 0, key); }
    std::uint64_t get_uint(std::string_view key) const { return parse_uint(get(key), 0, key); }

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : items_) out += k + "=" + v + "\n";
        return out;
    }

    // Lines without '=' and lines starting with '#' are skipped.
    static KeyValues parse(std::string_view text) {
        KeyValues kv;
        std::size_t lineno = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto end = text.find('\n', start);
            auto line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
            ++lineno;
            if (!line.empty() && line.front() != '#') {
                auto eq = line.find('=');
                if (eq != std::string_view::npos)
                    kv.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
            }
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
        return kv;
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

// FNV-1a, used for stable config fingerprints.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to a sibling temporary and renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace vawt::io
