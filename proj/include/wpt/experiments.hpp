#pragma once

// Reproduction harness: sweeps, the splitting surface, the closed-loop ramp
// and the static-vs-adaptive comparison, each written as plain CSV plus a
// JSON summary of headline numbers.

#include "wpt/circuit.hpp"
#include "wpt/controller.hpp"
#include "wpt/errors.hpp"
#include "wpt/estimation.hpp"
#include "wpt/format.hpp"
#include "wpt/transient.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wpt {

struct ExperimentConfig {
    CircuitParams circuit;

    std::vector<double> k_list{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    // frequency grid for sweeps and the surface
    double f_min = 40e3;
    double f_max = 200e3;
    std::size_t points = 8001;

    Timing timing;
    std::size_t record_stride = 20;

    // coupling ramp of the closed-loop scenario
    double k_start = 0.2;
    double k_end = 0.9;
    double k_step = 0.1;
    double ramp_duration = 0.02;

    double f_start = 75e3;
    ControllerConfig controller;

    double static_design_k = 0.5;
    double compare_dwell = 6e-3;      // time spent at each k in the comparison run
    std::size_t compare_tail = 4;     // windows averaged at the end of each dwell
    double settle_guard = 100e-6;     // windows starting sooner after a k switch are "unsettled"

    std::string out_dir = "wpt_out";

    std::vector<double> f_grid() const { return linear_grid(f_min, f_max, points); }

    void validate() const {
        circuit.validate();
        if (k_list.empty()) throw UsageError("k_list is empty");
        for (double k : k_list) {
            if (!(k > 0.0 && k <= kMaxCoupling)) {
                throw DomainError("k must lie in (0, " + format_number(kMaxCoupling) + "], got " + format_number(k));
            }
        }
        if (!(f_min > 0.0 && f_max > f_min)) throw UsageError("fmin/fmax: need 0 < fmin < fmax");
        if (points < 3) throw UsageError("points must be >= 3");
        if (!(timing.h > 0.0)) throw UsageError("h must be > 0");
        if (!(timing.duration > 0.0)) throw UsageError("duration must be > 0");
        if (!(timing.dt_ctrl > 0.0)) throw UsageError("dt_ctrl must be > 0");
        if (!(timing.dt_detect >= 0.0)) throw UsageError("dt_detect must be >= 0");
        if (record_stride == 0) throw UsageError("record_stride must be >= 1");
        if (!(ramp_duration > 0.0 && ramp_duration <= timing.duration)) {
            throw UsageError("ramp_duration must lie in (0, duration]");
        }
        if (!(k_step > 0.0)) throw UsageError("k_step must be > 0");
        for (double k : {k_start, k_end}) {
            if (!(k > 0.0 && k <= kMaxCoupling)) {
                throw DomainError("k must lie in (0, " + format_number(kMaxCoupling) + "], got " + format_number(k));
            }
        }
        controller.validate();
        if (!(f_start >= controller.f_min && f_start <= controller.f_max)) {
            throw UsageError("start_freq must lie in [ctrl_f_min, ctrl_f_max]");
        }
        if (!(static_design_k > 0.0 && static_design_k <= kMaxCoupling)) throw DomainError("static_design_k out of range");
        if (!(compare_dwell > 0.0)) throw UsageError("compare_dwell must be > 0");
        if (compare_tail == 0) throw UsageError("compare_tail must be >= 1");
        if (!(settle_guard >= 0.0)) throw UsageError("settle_guard must be >= 0");
    }
};

namespace detail {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<const char*> header) : path_(path) {
        std::error_code ec;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("out_dir: cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) out_ << ',';
            out_ << format_number(v);
            first = false;
        }
        out_ << '\n';
    }

    ~CsvWriter() = default;

    void close() {
        out_.close();
        if (!out_) throw IoError("out_dir: failed writing " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out_dir) / name;
}

inline std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline nlohmann::ordered_json peaks_json(const std::vector<Peak>& peaks) {
    auto arr = nlohmann::ordered_json::array();
    for (const Peak& pk : peaks) arr.push_back({{"f_hz", pk.freq}, {"value", pk.value}});
    return arr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// AC sweep

struct AcSweepRow {
    double k = 0.0;
    double argmax_i1_hz = 0.0;
    double argmax_i2_hz = 0.0;
    std::vector<Peak> i1_maxima;
    std::vector<Peak> i2_maxima;
};

struct AcSweepResult {
    std::vector<AcSweepRow> rows;
    std::optional<double> first_k_split_i1;  // smallest listed k with two |I1| maxima
    std::optional<double> first_k_split_i2;
    nlohmann::ordered_json summary;
};

inline AcSweepResult exp_ac_sweep(const ExperimentConfig& cfg, bool write_files = true) {
    cfg.validate();
    const std::vector<double> grid = cfg.f_grid();
    AcSweepResult res;
    auto rows_json = nlohmann::ordered_json::array();
    for (double k : cfg.k_list) {
        const SweepCurve c = sweep(cfg.circuit, Coupling::from_k(k, cfg.circuit).m, grid);
        if (write_files) {
            detail::CsvWriter w(detail::out_path(cfg, "sweep_" + format_number(k) + ".csv"),
                                {"f_hz", "i1_a", "i2_a", "zin_ohm", "zin_rad"});
            for (std::size_t i = 0; i < c.size(); ++i) {
                w.row({c.freqs[i], c.i1_mag[i], c.i2_mag[i], c.zin_mag[i], c.zin_phase[i]});
            }
            w.close();
        }
        AcSweepRow row;
        row.k = k;
        row.argmax_i1_hz = c.freqs[detail::argmax(c.i1_mag)];
        row.argmax_i2_hz = c.freqs[detail::argmax(c.i2_mag)];
        row.i1_maxima = local_maxima(c.i1_mag, c.freqs);
        row.i2_maxima = local_maxima(c.i2_mag, c.freqs);
        if (!res.first_k_split_i1 && row.i1_maxima.size() >= 2) res.first_k_split_i1 = k;
        if (!res.first_k_split_i2 && row.i2_maxima.size() >= 2) res.first_k_split_i2 = k;
        rows_json.push_back({{"k", k},
                             {"argmax_i1_hz", row.argmax_i1_hz},
                             {"argmax_i2_hz", row.argmax_i2_hz},
                             {"i1_maxima_count", row.i1_maxima.size()},
                             {"i2_maxima_count", row.i2_maxima.size()},
                             {"i1_maxima", detail::peaks_json(row.i1_maxima)},
                             {"i2_maxima", detail::peaks_json(row.i2_maxima)}});
        res.rows.push_back(std::move(row));
    }
    res.summary["per_k"] = rows_json;
    res.summary["first_k_split_i1"] = res.first_k_split_i1 ? nlohmann::ordered_json(*res.first_k_split_i1) : nullptr;
    res.summary["first_k_split_i2"] = res.first_k_split_i2 ? nlohmann::ordered_json(*res.first_k_split_i2) : nullptr;
    return res;
}

// ---------------------------------------------------------------------------
// |I2| over (k, f)

struct SurfaceResult {
    SplittingSurface surface;
    nlohmann::ordered_json summary;

    /// Largest ridge value in row `i`, 0 if the row has no interior maximum.
    double ridge_max(std::size_t i) const {
        double best = 0.0;
        for (const Peak& pk : surface.maxima[i]) best = std::max(best, pk.value);
        return best;
    }
};

inline SurfaceResult exp_surface(const ExperimentConfig& cfg, bool write_files = true) {
    cfg.validate();
    const std::vector<double> grid = cfg.f_grid();
    SurfaceResult res;
    res.surface = splitting_surface(cfg.circuit, cfg.k_list, grid);
    const SplittingSurface& s = res.surface;
    if (write_files) {
        detail::CsvWriter g(detail::out_path(cfg, "surface.csv"), {"k", "f_hz", "i2_a"});
        for (std::size_t i = 0; i < s.k_grid.size(); ++i) {
            for (std::size_t j = 0; j < s.f_grid.size(); ++j) g.row({s.k_grid[i], s.f_grid[j], s.i2[i][j]});
        }
        g.close();
        detail::CsvWriter r(detail::out_path(cfg, "ridge.csv"), {"k", "f_hz", "i2_a"});
        for (std::size_t i = 0; i < s.k_grid.size(); ++i) {
            for (const Peak& pk : s.maxima[i]) r.row({s.k_grid[i], pk.freq, pk.value});
        }
        r.close();
    }
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.k_grid.size(); ++i) {
        rows.push_back({{"k", s.k_grid[i]}, {"maxima", detail::peaks_json(s.maxima[i])}, {"ridge_max_a", res.ridge_max(i)}});
    }
    res.summary["shape"] = {s.k_grid.size(), s.f_grid.size()};
    res.summary["ridge"] = rows;
    return res;
}

// ---------------------------------------------------------------------------
// closed-loop coupling ramp

struct AdaptiveResult {
    RunRecord record;
    double f_at_split_boundary = 0.0;  // drive frequency when k first reaches 0.6
    double min_f_after_split = 0.0;
    double max_settled_estimate_error = 0.0;  // relative, over settled windows after the first reversal
    std::size_t settled_windows = 0;
    double final_metric = 0.0;
    double final_k = 0.0;
    double analytic_max_i2 = 0.0;  // max over the grid of |I2| at final_k
    nlohmann::ordered_json summary;
};

/// Index of the first controlled window whose frequency move reverses the previous move.
inline std::optional<std::size_t> first_reversal(const std::vector<DetectionWindow>& windows) {
    double last = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const DetectionWindow& w = windows[i];
        if (!w.controlled) continue;
        const double move = w.f_next - w.f_hz;
        if (move == 0.0) continue;
        if (last != 0.0 && (move > 0.0) != (last > 0.0)) return i;
        last = move;
    }
    return std::nullopt;
}

inline double analytic_peak_i2(const CircuitParams& p, double k, const std::vector<double>& grid) {
    const double m = Coupling::from_k(k, p).m;
    double best = 0.0;
    for (double f : grid) best = std::max(best, i2_magnitude(p, m, kTwoPi * f));
    return best;
}

inline AdaptiveResult exp_adaptive(const ExperimentConfig& cfg, bool write_files = true) {
    cfg.validate();
    const CouplingSchedule schedule = CouplingSchedule::ramp(cfg.k_start, cfg.k_end, cfg.k_step, cfg.ramp_duration);
    ScenarioOptions opt;
    opt.f_start = cfg.f_start;
    opt.controller = cfg.controller;
    opt.timing = cfg.timing;
    opt.record_stride = cfg.record_stride;

    AdaptiveResult res;
    res.record = run_scenario(cfg.circuit, schedule, opt);
    const auto& wins = res.record.windows;

    if (write_files) {
        detail::CsvWriter w(detail::out_path(cfg, "adaptive.csv"),
                            {"t_s", "k", "f_hz", "i2_meas_a", "i2_est_a", "metric_a"});
        for (const DetectionWindow& d : wins) w.row({d.t_end, d.k, d.f_hz, d.i2_amp, d.i2_est, d.metric});
        w.close();
    }

    // frequency behaviour around the onset of secondary splitting
    const double split_k = 0.6;
    double t_split = std::numeric_limits<double>::infinity();
    for (const auto& seg : schedule.segments()) {
        if (seg.k >= split_k - 1e-12) {
            t_split = seg.t_start;
            break;
        }
    }
    res.f_at_split_boundary = cfg.f_start;
    res.min_f_after_split = std::numeric_limits<double>::infinity();
    for (const DetectionWindow& d : wins) {
        if (d.t_end <= t_split) res.f_at_split_boundary = d.f_next;
        else res.min_f_after_split = std::min(res.min_f_after_split, d.f_next);
    }

    const auto rev = first_reversal(wins);
    for (std::size_t i = rev.value_or(wins.size()); i < wins.size(); ++i) {
        const DetectionWindow& d = wins[i];
        if (!d.estimate_ok || d.since_k_switch < cfg.settle_guard || d.i2_amp <= 0.0) continue;
        res.max_settled_estimate_error =
            std::max(res.max_settled_estimate_error, std::abs(d.i2_est - d.i2_amp) / d.i2_amp);
        ++res.settled_windows;
    }

    for (auto it = wins.rbegin(); it != wins.rend(); ++it) {
        if (it->controlled) {
            res.final_metric = it->metric;
            res.final_k = it->k;
            break;
        }
    }
    if (res.final_k > 0.0) res.analytic_max_i2 = analytic_peak_i2(cfg.circuit, res.final_k, cfg.f_grid());

    res.summary = {{"windows", wins.size()},
                   {"clamp_count", res.record.clamp_count},
                   {"f_at_k0.6_boundary_hz", res.f_at_split_boundary},
                   {"min_f_after_k0.6_hz", res.min_f_after_split},
                   {"first_reversal_t_s", rev ? nlohmann::ordered_json(wins[*rev].t_end) : nullptr},
                   {"settled_windows", res.settled_windows},
                   {"max_settled_estimate_error", res.max_settled_estimate_error},
                   {"final_k", res.final_k},
                   {"final_f_hz", res.record.final_controller ? res.record.final_controller->f_curr : 0.0},
                   {"final_metric_a", res.final_metric},
                   {"analytic_max_i2_a", res.analytic_max_i2},
                   {"energy_residual_rel", res.record.energy_residual_max / res.record.energy_max}};
    return res;
}

// ---------------------------------------------------------------------------
// static vs adaptive matching

struct ComparisonRow {
    double k = 0.0;
    double static_metric = 0.0;   // |I2|^2 at the fixed design frequency, A^2
    double dynamic_metric = 0.0;  // settled closed-loop |I2|^2, A^2
    double improvement_pct = 0.0;
    double p_load_w = 0.0;        // 0.5 |I2|^2 r_load for the dynamic arm
    double dynamic_f_hz = 0.0;
};

struct CompareResult {
    double f_static_hz = 0.0;
    std::vector<ComparisonRow> rows;
    nlohmann::ordered_json summary;
};

inline double improvement_pct(double static_metric, double dynamic_metric) {
    if (!(static_metric > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return 100.0 * (dynamic_metric - static_metric) / static_metric;
}

inline CompareResult exp_compare(const ExperimentConfig& cfg, bool write_files = true) {
    cfg.validate();
    const CircuitParams& p = cfg.circuit;
    const std::vector<double> grid = cfg.f_grid();

    CompareResult res;
    {
        const double m = Coupling::from_k(cfg.static_design_k, p).m;
        double best = -1.0;
        for (double f : grid) {
            const double v = i2_magnitude(p, m, kTwoPi * f);
            if (v > best) {
                best = v;
                res.f_static_hz = f;
            }
        }
    }

    // every k is held for compare_dwell, entering with the frequency and
    // controller memory left by the previous k
    const CouplingSchedule schedule = CouplingSchedule::staircase(cfg.k_list, cfg.compare_dwell);
    ScenarioOptions opt;
    opt.f_start = cfg.f_start;
    opt.controller = cfg.controller;
    opt.timing = cfg.timing;
    opt.timing.duration = cfg.compare_dwell * static_cast<double>(cfg.k_list.size());
    opt.record_stride = std::max<std::size_t>(cfg.record_stride, 1000);
    const RunRecord rec = run_scenario(p, schedule, opt);

    for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
        const double k = cfg.k_list[i];
        const double t_lo = cfg.compare_dwell * static_cast<double>(i);
        const double t_hi = t_lo + cfg.compare_dwell;
        std::vector<const DetectionWindow*> seg;
        for (const DetectionWindow& d : rec.windows) {
            if (d.t_end > t_lo + 1e-12 && d.t_end <= t_hi + 1e-12) seg.push_back(&d);
        }
        if (seg.size() < cfg.compare_tail) throw UsageError("compare_dwell is too short for compare_tail windows");
        double acc = 0.0;
        for (std::size_t j = seg.size() - cfg.compare_tail; j < seg.size(); ++j) acc += seg[j]->i2_amp * seg[j]->i2_amp;

        ComparisonRow row;
        row.k = k;
        const double i2s = i2_magnitude(p, Coupling::from_k(k, p).m, kTwoPi * res.f_static_hz);
        row.static_metric = i2s * i2s;
        row.dynamic_metric = acc / static_cast<double>(cfg.compare_tail);
        row.improvement_pct = improvement_pct(row.static_metric, row.dynamic_metric);
        row.p_load_w = 0.5 * row.dynamic_metric * p.r_load;
        row.dynamic_f_hz = seg.back()->f_next;
        res.rows.push_back(row);
    }

    if (write_files) {
        detail::CsvWriter w(detail::out_path(cfg, "compare.csv"),
                            {"k", "static_a2", "dynamic_a2", "improvement_pct", "p_load_w"});
        for (const ComparisonRow& r : res.rows) {
            w.row({r.k, r.static_metric, r.dynamic_metric, r.improvement_pct, r.p_load_w});
        }
        w.close();
    }

    auto rows = nlohmann::ordered_json::array();
    for (const ComparisonRow& r : res.rows) {
        rows.push_back({{"k", r.k},
                        {"static_a2", r.static_metric},
                        {"dynamic_a2", r.dynamic_metric},
                        {"improvement_pct", r.improvement_pct},
                        {"p_load_w", r.p_load_w},
                        {"dynamic_f_hz", r.dynamic_f_hz}});
    }
    res.summary = {{"f_static_hz", res.f_static_hz}, {"rows", rows}};
    return res;
}

/// Writes `summary.json` into the output directory.
inline void write_summary(const ExperimentConfig& cfg, const nlohmann::ordered_json& summary) {
    const std::filesystem::path path = detail::out_path(cfg, "summary.json");
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("out_dir: cannot write " + path.string());
    out << summary.dump(2) << '\n';
    if (!out) throw IoError("out_dir: failed writing " + path.string());
}

}  // namespace wpt
