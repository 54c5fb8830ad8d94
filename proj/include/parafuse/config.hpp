#pragma once

/// Key-value pipeline configuration: "key = value" lines, '#' comment lines.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/evaluation.hpp"
#include "parafuse/fusion.hpp"
#include "parafuse/io.hpp"
#include "parafuse/text.hpp"

namespace parafuse {

enum class ValueKind { path, text, size, real, boolean, choice, weight_grid, size_list };

struct ConfigKey {
    std::string_view name;
    ValueKind kind;
    std::string_view default_value;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string_view> choices = {};
};

inline std::vector<ConfigKey> const& config_schema()
{
    static std::vector<ConfigKey> const schema{
        {"corpus_dir", ValueKind::path, ""},
        {"labels", ValueKind::path, ""},
        {"output_dir", ValueKind::path, "out"},
        {"embeddings", ValueKind::path, ""},
        {"doc_embeddings", ValueKind::path, ""},
        {"summaries", ValueKind::path, ""},
        {"pair_scores", ValueKind::path, ""},
        {"task2_dir", ValueKind::path, ""},
        {"task2_embeddings", ValueKind::path, ""},
        {"granularity", ValueKind::choice, "paragraph", 0, 0, {"paragraph", "document"}},
        {"split", ValueKind::choice, "all", 0, 0, {"all", "train", "validation"}},
        {"eval_split", ValueKind::choice, "validation", 0, 0, {"all", "train", "validation"}},
        {"depth", ValueKind::size, "100", 1, 1e9},
        {"aggregated_depth", ValueKind::size, "1000", 1, 1e9},
        {"aggregation", ValueKind::choice, "additive", 0, 0, {"additive", "scoresum", "interleave"}},
        {"alpha", ValueKind::real, "3", 0, 1e9},
        {"beta", ValueKind::real, "1", 0, 1e9},
        {"normalize", ValueKind::boolean, "false"},
        {"rerank_depth", ValueKind::size, "500", 1, 1e9},
        {"cutoff", ValueKind::size, "7", 1, 1e9},
        {"task2_alpha", ValueKind::real, "4", 0, 1e9},
        {"task2_beta", ValueKind::real, "1", 0, 1e9},
        {"task2_cutoff", ValueKind::size, "1", 1, 1e9},
        {"weight_grid", ValueKind::weight_grid, "1:1,2:1,3:1,4:1"},
        {"cutoff_range", ValueKind::size_list, "1-20", 1, 1e9},
        {"recall_ns", ValueKind::size_list, "100,200,300,500", 1, 1e9},
        {"sweep_recall", ValueKind::size, "500", 1, 1e9},
        {"averaging", ValueKind::choice, "macro", 0, 0, {"macro", "pooled"}},
        {"k1", ValueKind::real, "1.2", 0, 1e9},
        {"b", ValueKind::real, "0.75", 0, 1},
        {"marker_regex", ValueKind::text, corpus::default_marker_pattern},
        {"summary_headers", ValueKind::text, "summary:|présumé"},
        {"french_margin", ValueKind::real, "0.2", -1, 1},
        {"boilerplate_threshold", ValueKind::size, "100", 2, 1e9},
        {"validation_size", ValueKind::size, "100", 0, 1e9},
        {"embed_dim", ValueKind::size, "256", 8, 65536},
        {"embed_seed", ValueKind::size, "13", 0, 1e18},
        {"doc_max_tokens", ValueKind::size, "512", 1, 1e9},
    };
    return schema;
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto const pos = s.find(sep, start);
        out.emplace_back(text::trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline double parse_real(std::string_view key, std::string const& v)
{
    char* end = nullptr;
    double const d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
        throw ValidationError("config '" + std::string(key) + "': not a number: '" + v + "'");
    }
    return d;
}

inline std::size_t parse_size(std::string_view key, std::string const& v)
{
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw ValidationError("config '" + std::string(key) + "': not a non-negative integer: '" +
                              v + "'");
    }
    return n;
}

}  // namespace detail

class Config {
   public:
    Config()
    {
        for (auto const& k : config_schema()) {
            values_[std::string(k.name)] = std::string(k.default_value);
        }
    }

    /// Parses config text; unknown keys and bad values are validation errors.
    static Config parse(std::string_view content)
    {
        Config c;
        std::size_t line_no = 0;
        for (auto const raw : text::split_lines(content)) {
            ++line_no;
            auto const line = text::trim(raw);
            if (line.empty() || line.front() == '#') {
                continue;
            }
            auto const eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": expected 'key = value'");
            }
            auto value = std::string(text::trim(line.substr(eq + 1)));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
                value = value.substr(1, value.size() - 2);
            }
            c.set(std::string(text::trim(line.substr(0, eq))), value);
        }
        return c;
    }

    static Config load(std::filesystem::path const& path)
    {
        if (!std::filesystem::exists(path)) {
            throw ValidationError("config file not found: " + path.string());
        }
        return parse(io::read_file(path));
    }

    /// Validates and stores the canonical form of `value`.
    void set(std::string const& key, std::string const& value)
    {
        auto const& k = key_of(key);
        values_[key] = canonical(k, value);
    }

    /// One "key = value" line per key in schema order.
    [[nodiscard]] std::string to_text() const
    {
        std::string out;
        for (auto const& k : config_schema()) {
            out.append(k.name);
            out.append(" = ");
            out.append(values_.at(std::string(k.name)));
            out.push_back('\n');
        }
        return out;
    }

    [[nodiscard]] std::string const& get(std::string const& key) const
    {
        key_of(key);
        return values_.at(key);
    }

    [[nodiscard]] std::filesystem::path path(std::string const& key) const { return get(key); }
    [[nodiscard]] bool has(std::string const& key) const { return !get(key).empty(); }
    [[nodiscard]] std::size_t size(std::string const& key) const
    {
        return detail::parse_size(key, get(key));
    }
    [[nodiscard]] double real(std::string const& key) const
    {
        return detail::parse_real(key, get(key));
    }
    [[nodiscard]] bool flag(std::string const& key) const { return get(key) == "true"; }

    [[nodiscard]] std::vector<std::size_t> sizes(std::string const& key) const
    {
        auto const& v = get(key);
        std::vector<std::size_t> out;
        if (auto dash = v.find('-'); dash != std::string::npos) {
            auto const lo = detail::parse_size(key, v.substr(0, dash));
            auto const hi = detail::parse_size(key, v.substr(dash + 1));
            for (auto k = lo; k <= hi; ++k) {
                out.push_back(k);
            }
            return out;
        }
        for (auto const& part : detail::split(v, ',')) {
            out.push_back(detail::parse_size(key, part));
        }
        return out;
    }

    [[nodiscard]] std::vector<fusion::FusionWeights> grid(std::string const& key) const
    {
        std::vector<fusion::FusionWeights> out;
        for (auto const& part : detail::split(get(key), ',')) {
            auto const ab = detail::split(part, ':');
            out.push_back({detail::parse_real(key, ab.at(0)), detail::parse_real(key, ab.at(1))});
        }
        return out;
    }

    [[nodiscard]] std::vector<std::string> list(std::string const& key, char sep = '|') const
    {
        auto const& v = get(key);
        return v.empty() ? std::vector<std::string>{} : detail::split(v, sep);
    }

    friend bool operator==(Config const&, Config const&) = default;

   private:
    static ConfigKey const& key_of(std::string const& key)
    {
        for (auto const& k : config_schema()) {
            if (k.name == key) {
                return k;
            }
        }
        throw ValidationError("unknown config key '" + key + "'");
    }

    static std::string canonical(ConfigKey const& k, std::string const& value)
    {
        auto const name = k.name;
        auto const range_check = [&](double v) {
            if (v < k.min || v > k.max) {
                throw ValidationError("config '" + std::string(name) + "' = " + value +
                                      " is outside [" + eval::format_double(k.min) + ", " +
                                      eval::format_double(k.max) + "]");
            }
        };
        switch (k.kind) {
            case ValueKind::path:
            case ValueKind::text:
                return value;
            case ValueKind::size: {
                auto const n = detail::parse_size(name, value);
                range_check(static_cast<double>(n));
                return std::to_string(n);
            }
            case ValueKind::real: {
                auto const d = detail::parse_real(name, value);
                range_check(d);
                return eval::format_double(d);
            }
            case ValueKind::boolean: {
                auto const v = text::to_lower(value);
                if (v == "true" || v == "1" || v == "yes" || v == "on") {
                    return "true";
                }
                if (v == "false" || v == "0" || v == "no" || v == "off") {
                    return "false";
                }
                throw ValidationError("config '" + std::string(name) + "': not a boolean: '" +
                                      value + "'");
            }
            case ValueKind::choice:
                if (std::find(k.choices.begin(), k.choices.end(), value) == k.choices.end()) {
                    throw ValidationError("config '" + std::string(name) + "': invalid value '" +
                                          value + "'");
                }
                return value;
            case ValueKind::weight_grid: {
                std::string out;
                for (auto const& part : detail::split(value, ',')) {
                    auto const ab = detail::split(part, ':');
                    if (ab.size() != 2) {
                        throw ValidationError("config '" + std::string(name) +
                                              "': expected alpha:beta pairs, got '" + part + "'");
                    }
                    fusion::FusionWeights const w{detail::parse_real(name, ab[0]),
                                                  detail::parse_real(name, ab[1])};
                    w.validate();
                    out += (out.empty() ? "" : ",") + eval::format_double(w.alpha) + ":" +
                           eval::format_double(w.beta);
                }
                return out;
            }
            case ValueKind::size_list: {
                if (auto dash = value.find('-'); dash != std::string::npos) {
                    auto const lo = detail::parse_size(name, std::string(text::trim(value.substr(0, dash))));
                    auto const hi = detail::parse_size(name, std::string(text::trim(value.substr(dash + 1))));
                    range_check(static_cast<double>(lo));
                    if (hi < lo) {
                        throw ValidationError("config '" + std::string(name) + "': empty range");
                    }
                    return std::to_string(lo) + "-" + std::to_string(hi);
                }
                std::string out;
                for (auto const& part : detail::split(value, ',')) {
                    auto const n = detail::parse_size(name, part);
                    range_check(static_cast<double>(n));
                    out += (out.empty() ? "" : ",") + std::to_string(n);
                }
                return out;
            }
        }
        return value;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace parafuse
