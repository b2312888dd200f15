#pragma once

// Flat `key = value` configuration text. '#' starts a comment; blank lines
// are ignored; values are SI numbers (l1 = 20e-6) except `out_dir` (a path)
// and `k_list` (comma-separated).

#include "wpt/errors.hpp"
#include "wpt/experiments.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wpt {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view text, const std::string& key) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw UsageError(key + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

inline std::size_t parse_count(std::string_view text, const std::string& key) {
    const double v = parse_double(text, key);
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw UsageError(key + ": expected a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.push_back(parse_double(piece, key));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Applies one key to `cfg`; throws UsageError naming the key when it is
/// unknown or its value does not parse.
inline void apply_config_value(ExperimentConfig& cfg, const std::string& key, std::string_view value) {
    using Setter = std::function<void(std::string_view)>;
    auto num = [&](double& field) -> Setter {
        return [&field, key](std::string_view v) { field = detail::parse_double(v, key); };
    };
    auto count = [&](std::size_t& field) -> Setter {
        return [&field, key](std::string_view v) { field = detail::parse_count(v, key); };
    };
    const std::map<std::string, Setter> table{
        {"v_amp", num(cfg.circuit.v_amp)},
        {"r1", num(cfg.circuit.r1)},
        {"l1", num(cfg.circuit.l1)},
        {"c1", num(cfg.circuit.c1)},
        {"r2", num(cfg.circuit.r2)},
        {"r_load", num(cfg.circuit.r_load)},
        {"l2", num(cfg.circuit.l2)},
        {"c2", num(cfg.circuit.c2)},
        {"k_list", [&cfg, key](std::string_view v) { cfg.k_list = detail::parse_list(v, key); }},
        {"f_min", num(cfg.f_min)},
        {"f_max", num(cfg.f_max)},
        {"points", count(cfg.points)},
        {"dt_ctrl", num(cfg.timing.dt_ctrl)},
        {"dt_detect", num(cfg.timing.dt_detect)},
        {"h", num(cfg.timing.h)},
        {"duration", num(cfg.timing.duration)},
        {"record_stride", count(cfg.record_stride)},
        {"k_start", num(cfg.k_start)},
        {"k_end", num(cfg.k_end)},
        {"k_step", num(cfg.k_step)},
        {"ramp_duration", num(cfg.ramp_duration)},
        {"start_freq", num(cfg.f_start)},
        {"learn_rate", num(cfg.controller.learn_rate)},
        {"ctrl_f_min", num(cfg.controller.f_min)},
        {"ctrl_f_max", num(cfg.controller.f_max)},
        {"probe_step", num(cfg.controller.probe_step)},
        {"max_step", num(cfg.controller.max_step)},
        {"static_design_k", num(cfg.static_design_k)},
        {"compare_dwell", num(cfg.compare_dwell)},
        {"compare_tail", count(cfg.compare_tail)},
        {"settle_guard", num(cfg.settle_guard)},
        {"out_dir", [&cfg](std::string_view v) { cfg.out_dir = std::string(detail::trim(v)); }},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
    it->second(value);
}

inline void load_config(ExperimentConfig& cfg, std::istream& in, const std::string& source = "config") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(view.substr(0, eq)));
        apply_config_value(cfg, key, view.substr(eq + 1));
    }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path + "'");
    load_config(cfg, in, path);
}

}  // namespace wpt
