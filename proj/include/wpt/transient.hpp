#pragma once

// Time-domain plant. State x = (i1, i2, v_c1, v_c2) obeys
//
//   L1 i1' + M  i2' = v(t) - R1 i1 - v_c1
//   M  i1' + L2 i2' =      - R2 i2 - v_c2
//   v_c1' = i1 / C1,  v_c2' = i2 / C2
//
// integrated with fixed-step classical RK4. M is piecewise constant in time;
// at a switch the currents and capacitor voltages carry over unchanged.

#include "wpt/circuit.hpp"
#include "wpt/controller.hpp"
#include "wpt/errors.hpp"
#include "wpt/estimation.hpp"
#include "wpt/format.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace wpt {

struct TransientState {
    double i1 = 0.0;
    double i2 = 0.0;
    double v_c1 = 0.0;
    double v_c2 = 0.0;
    double t = 0.0;
};

struct StateDerivative {
    double di1 = 0.0;
    double di2 = 0.0;
    double dv_c1 = 0.0;
    double dv_c2 = 0.0;
};

inline StateDerivative derivatives(const TransientState& s, double v_drive, const CircuitParams& p, double m) {
    const double det = p.l1 * p.l2 - m * m;
    if (!(det > 1e-12 * p.l1 * p.l2)) {
        throw NearUnityCoupling("inductance matrix is singular (k too close to 1)");
    }
    const double a = v_drive - p.r1 * s.i1 - s.v_c1;
    const double b = -p.r2 * s.i2 - s.v_c2;
    return {(p.l2 * a - m * b) / det, (p.l1 * b - m * a) / det, s.i1 / p.c1, s.i2 / p.c2};
}

/// Magnetic plus electric energy stored in both tanks.
inline double stored_energy(const TransientState& s, const CircuitParams& p, double m) {
    return 0.5 * p.l1 * s.i1 * s.i1 + 0.5 * p.l2 * s.i2 * s.i2 + m * s.i1 * s.i2 +
           0.5 * p.c1 * s.v_c1 * s.v_c1 + 0.5 * p.c2 * s.v_c2 * s.v_c2;
}

/// Source power minus resistive loss.
inline double net_power(const TransientState& s, double v_drive, const CircuitParams& p) {
    return v_drive * s.i1 - p.r1 * s.i1 * s.i1 - p.r2 * s.i2 * s.i2;
}

namespace detail {

inline TransientState advance(const TransientState& s, const StateDerivative& d, double h) {
    return {s.i1 + h * d.di1, s.i2 + h * d.di2, s.v_c1 + h * d.dv_c1, s.v_c2 + h * d.dv_c2, s.t + h};
}

}  // namespace detail

/// One classical RK4 step. If `work` is non-null the net power is integrated
/// with the same stages and added to it.
template <class Drive>
    requires std::invocable<Drive&, double>
TransientState rk4_step(const TransientState& s, double h, Drive&& drive, const CircuitParams& p, double m,
                        double* work = nullptr) {
    if (!(h > 0.0)) throw DomainError("step h must be > 0");
    const double t = s.t;
    const double v1 = drive(t);
    const double v2 = drive(t + 0.5 * h);
    const double v4 = drive(t + h);

    const StateDerivative k1 = derivatives(s, v1, p, m);
    const TransientState s2 = detail::advance(s, k1, 0.5 * h);
    const StateDerivative k2 = derivatives(s2, v2, p, m);
    const TransientState s3 = detail::advance(s, k2, 0.5 * h);
    const StateDerivative k3 = derivatives(s3, v2, p, m);
    const TransientState s4 = detail::advance(s, k3, h);
    const StateDerivative k4 = derivatives(s4, v4, p, m);

    if (work != nullptr) {
        *work += h / 6.0 *
                 (net_power(s, v1, p) + 2.0 * net_power(s2, v2, p) + 2.0 * net_power(s3, v2, p) +
                  net_power(s4, v4, p));
    }
    const double w = h / 6.0;
    return {s.i1 + w * (k1.di1 + 2.0 * k2.di1 + 2.0 * k3.di1 + k4.di1),
            s.i2 + w * (k1.di2 + 2.0 * k2.di2 + 2.0 * k3.di2 + k4.di2),
            s.v_c1 + w * (k1.dv_c1 + 2.0 * k2.dv_c1 + 2.0 * k3.dv_c1 + k4.dv_c1),
            s.v_c2 + w * (k1.dv_c2 + 2.0 * k2.dv_c2 + 2.0 * k3.dv_c2 + k4.dv_c2),
            t + h};
}

/// Peak |sample| over a window that must cover at least one carrier period.
inline double amplitude_detector(std::span<const double> window, double sample_dt, double carrier_hz) {
    if (!(sample_dt > 0.0 && carrier_hz > 0.0)) throw DomainError("sample_dt and carrier_hz must be > 0");
    const double span = static_cast<double>(window.size()) * sample_dt;
    if (span < (1.0 - 1e-9) / carrier_hz) {
        throw UsageError("detection window is shorter than one carrier period");
    }
    double peak = 0.0;
    for (double x : window) peak = std::max(peak, std::abs(x));
    return peak;
}

/// Sinusoid whose frequency can be changed without a jump in phase.
class SineDrive {
public:
    SineDrive(double amplitude, double freq_hz) : amp_(amplitude), freq_(freq_hz) {}

    double operator()(double t) const { return amp_ * std::sin(phase_at(t)); }

    double phase_at(double t) const { return phase_ref_ + kTwoPi * freq_ * (t - t_ref_); }

    void retune(double t, double freq_hz) {
        phase_ref_ = std::remainder(phase_at(t), kTwoPi);
        t_ref_ = t;
        freq_ = freq_hz;
    }

    double frequency() const { return freq_; }
    double amplitude() const { return amp_; }

private:
    double amp_;
    double freq_;
    double phase_ref_ = 0.0;
    double t_ref_ = 0.0;
};

/// Piecewise-constant coupling coefficient over time.
class CouplingSchedule {
public:
    struct Segment {
        double t_start = 0.0;
        double k = 0.0;
    };

    CouplingSchedule() = default;
    explicit CouplingSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) { validate(); }

    static CouplingSchedule constant(double k) { return CouplingSchedule({{0.0, k}}); }

    /// Levels k_start, k_start + k_step, ..., k_end; the last level is reached
    /// at t = ramp_duration and held afterwards.
    static CouplingSchedule ramp(double k_start, double k_end, double k_step, double ramp_duration) {
        if (!(k_step > 0.0 && k_end >= k_start && ramp_duration > 0.0)) {
            throw UsageError("ramp needs k_step > 0, k_end >= k_start and ramp_duration > 0");
        }
        const auto steps = static_cast<std::int64_t>(std::llround((k_end - k_start) / k_step));
        std::vector<Segment> seg;
        for (std::int64_t i = 0; i <= steps; ++i) {
            const double t = steps == 0 ? 0.0 : ramp_duration * static_cast<double>(i) / static_cast<double>(steps);
            // round to 12 decimals so 0.2 + 3 * 0.1 prints as 0.5
            const double k = std::round((k_start + k_step * static_cast<double>(i)) * 1e12) / 1e12;
            seg.push_back({t, k});
        }
        return CouplingSchedule(std::move(seg));
    }

    /// One segment of length `dwell` per listed k.
    static CouplingSchedule staircase(std::span<const double> ks, double dwell) {
        if (!(dwell > 0.0)) throw UsageError("dwell must be > 0");
        std::vector<Segment> seg;
        for (std::size_t i = 0; i < ks.size(); ++i) seg.push_back({dwell * static_cast<double>(i), ks[i]});
        return CouplingSchedule(std::move(seg));
    }

    void validate() const {
        if (segments_.empty()) throw UsageError("coupling schedule is empty");
        if (segments_.front().t_start != 0.0) throw UsageError("coupling schedule must start at t = 0");
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const double k = segments_[i].k;
            if (!(k > 0.0 && k <= kMaxCoupling)) {
                throw DomainError("k must lie in (0, " + format_number(kMaxCoupling) + "], got " +
                                  format_number(k));
            }
            if (i > 0 && !(segments_[i].t_start > segments_[i - 1].t_start)) {
                throw UsageError("coupling schedule start times must be strictly increasing");
            }
        }
    }

    double k_at(double t) const {
        double k = segments_.front().k;
        for (const Segment& s : segments_) {
            if (s.t_start <= t) k = s.k;
        }
        return k;
    }

    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
};

struct Timing {
    double dt_ctrl = 150e-6;  // controller / detection interval
    double dt_detect = 0.0;   // detection window; 0 = one period at the current frequency
    double h = 50e-9;         // integrator step
    double duration = 0.025;
};

/// Detector outputs for the window that closes at t_end, and what the loop did with them.
struct DetectionWindow {
    double t_end = 0.0;
    double k = 0.0;
    double f_hz = 0.0;       // drive frequency during the window
    double v_amp = 0.0;
    double i1_amp = 0.0;
    double i2_amp = 0.0;     // measured secondary amplitude
    double m_est = std::numeric_limits<double>::quiet_NaN();
    double i2_est = std::numeric_limits<double>::quiet_NaN();
    bool estimate_ok = false;
    bool controlled = false; // a controller step was taken at t_end
    double metric = std::numeric_limits<double>::quiet_NaN();
    double f_next = 0.0;
    bool clamped = false;
    double since_k_switch = 0.0;  // time from the last coupling switch to the window start
};

struct RunRecord {
    // waveforms, one entry every `record_stride` integrator steps (t = 0 included)
    std::vector<double> t;
    std::vector<double> i1;
    std::vector<double> i2;
    std::vector<double> v;
    std::vector<double> f;
    std::vector<double> k;

    std::vector<DetectionWindow> windows;
    TransientState final_state;
    std::optional<ControllerState> final_controller;

    std::size_t clamp_count = 0;
    double energy_max = 0.0;
    double energy_residual_max = 0.0;  // max |E - E0 - W - W_switch|
    double switch_work = 0.0;          // energy injected by coupling switches
    double max_drive_jump = 0.0;       // largest |v(t_{n+1}) - v(t_n)|
    double f_max_seen = 0.0;
};

struct ScenarioOptions {
    double f_start = 75e3;
    std::optional<ControllerConfig> controller;
    Timing timing;
    std::size_t record_stride = 1;
};

inline RunRecord run_scenario(const CircuitParams& p, const CouplingSchedule& schedule,
                              const ScenarioOptions& opt) {
    p.validate();
    schedule.validate();
    const Timing& tm = opt.timing;
    if (!(tm.h > 0.0 && tm.dt_ctrl > 0.0 && tm.duration > 0.0 && tm.dt_detect >= 0.0)) {
        throw UsageError("timing values must be positive");
    }
    if (opt.record_stride == 0) throw UsageError("record_stride must be >= 1");
    if (!(opt.f_start > 0.0)) throw UsageError("start frequency must be > 0");

    std::optional<ControllerState> ctrl;
    double f_lowest = opt.f_start;
    if (opt.controller) {
        ctrl = init(opt.f_start, *opt.controller);
        f_lowest = opt.controller->f_min;
    }
    const double window_floor = tm.dt_detect > 0.0 ? tm.dt_detect : 1.0 / f_lowest;
    if (tm.dt_detect > 0.0 && tm.dt_detect * (1.0 + 1e-9) < 1.0 / f_lowest) {
        throw UsageError("dt_detect must cover one carrier period at the lowest frequency");
    }
    if (window_floor > tm.dt_ctrl * (1.0 + 1e-9)) {
        throw UsageError("dt_ctrl must be at least the detection window");
    }

    const auto total_steps = static_cast<std::int64_t>(std::llround(tm.duration / tm.h));
    const auto steps_per_tick = static_cast<std::int64_t>(std::llround(tm.dt_ctrl / tm.h));
    if (total_steps < 1 || steps_per_tick < 1) throw UsageError("duration and dt_ctrl must span >= 1 step");

    // k switch step indices
    const auto& segs = schedule.segments();
    std::vector<std::int64_t> switch_step(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        switch_step[i] = static_cast<std::int64_t>(std::ceil(segs[i].t_start / tm.h - 1e-9));
    }

    auto window_steps_for = [&](double f) {
        const double len = tm.dt_detect > 0.0 ? tm.dt_detect : 1.0 / f;
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(len / tm.h - 1e-9)));
    };

    SineDrive drive(p.v_amp, opt.f_start);
    RunRecord rec;
    const std::size_t n_records = static_cast<std::size_t>(total_steps) / opt.record_stride + 1;
    rec.t.reserve(n_records);
    rec.i1.reserve(n_records);
    rec.i2.reserve(n_records);
    rec.v.reserve(n_records);
    rec.f.reserve(n_records);
    rec.k.reserve(n_records);

    TransientState s;
    std::size_t seg_idx = 0;
    double k = segs[0].k;
    double m = Coupling::from_k(k, p).m;
    double t_last_switch = 0.0;

    const double e0 = stored_energy(s, p, m);
    double work = 0.0;
    rec.energy_max = e0;
    rec.f_max_seen = opt.f_start;

    auto record = [&](std::int64_t n, double v_now) {
        if (n % static_cast<std::int64_t>(opt.record_stride) != 0) return;
        rec.t.push_back(s.t);
        rec.i1.push_back(s.i1);
        rec.i2.push_back(s.i2);
        rec.v.push_back(v_now);
        rec.f.push_back(drive.frequency());
        rec.k.push_back(k);
    };
    double v_prev = drive(0.0);
    record(0, v_prev);

    std::int64_t next_tick = steps_per_tick;
    std::int64_t window_steps = window_steps_for(drive.frequency());
    double peak_v = 0.0, peak_i1 = 0.0, peak_i2 = 0.0;

    for (std::int64_t n = 1; n <= total_steps; ++n) {
        // coupling switch effective from the step that starts at switch_step
        while (seg_idx + 1 < segs.size() && switch_step[seg_idx + 1] <= n - 1) {
            ++seg_idx;
            const double m_new = Coupling::from_k(segs[seg_idx].k, p).m;
            rec.switch_work += stored_energy(s, p, m_new) - stored_energy(s, p, m);
            k = segs[seg_idx].k;
            m = m_new;
            t_last_switch = static_cast<double>(n - 1) * tm.h;
        }

        s = rk4_step(s, tm.h, drive, p, m, &work);
        s.t = static_cast<double>(n) * tm.h;  // no drift in t

        const double v_now = drive(s.t);
        rec.max_drive_jump = std::max(rec.max_drive_jump, std::abs(v_now - v_prev));
        v_prev = v_now;

        const double e = stored_energy(s, p, m);
        rec.energy_max = std::max(rec.energy_max, e);
        rec.energy_residual_max =
            std::max(rec.energy_residual_max, std::abs(e - e0 - work - rec.switch_work));

        const bool is_tick = n == next_tick;
        const std::int64_t close_at = std::min(next_tick, total_steps);
        if (n > close_at - window_steps) {
            peak_v = std::max(peak_v, std::abs(v_now));
            peak_i1 = std::max(peak_i1, std::abs(s.i1));
            peak_i2 = std::max(peak_i2, std::abs(s.i2));
        }
        // a trailing partial interval still yields a window if it is long enough
        const bool tail_window =
            !is_tick && n == close_at && n - (next_tick - steps_per_tick) >= window_steps;

        if (is_tick || tail_window) {
            DetectionWindow w;
            w.t_end = s.t;
            w.k = k;
            w.f_hz = drive.frequency();
            w.v_amp = peak_v;
            w.i1_amp = peak_i1;
            w.i2_amp = peak_i2;
            w.since_k_switch = s.t - static_cast<double>(window_steps) * tm.h - t_last_switch;
            if (peak_v > 0.0 && peak_i1 > 0.0) {
                try {
                    const EstimationResult est =
                        estimate_i2({peak_v, peak_i1, kTwoPi * drive.frequency(), std::nullopt}, p);
                    w.m_est = est.m_est;
                    w.i2_est = est.i2_est;
                    w.estimate_ok = true;
                } catch (const SimulationError&) {
                    w.estimate_ok = false;
                }
            }
            w.f_next = drive.frequency();
            if (ctrl && is_tick && w.estimate_ok) {
                const AscentResult r = ascent_step(*ctrl, w.i2_est);
                *ctrl = r.state;
                w.controlled = true;
                w.metric = w.i2_est;
                w.f_next = r.f_next;
                w.clamped = r.clamped;
                if (r.clamped) ++rec.clamp_count;
                if (r.f_next != drive.frequency()) drive.retune(s.t, r.f_next);
                rec.f_max_seen = std::max(rec.f_max_seen, r.f_next);
            }
            rec.windows.push_back(w);
            peak_v = peak_i1 = peak_i2 = 0.0;
            next_tick += steps_per_tick;
            window_steps = window_steps_for(drive.frequency());
        }
        record(n, v_now);
    }
    rec.final_state = s;
    rec.final_controller = ctrl;
    return rec;
}

/// Fixed-frequency, fixed-coupling run from rest.
inline RunRecord run_open_loop(const CircuitParams& p, double k, double f_hz, double duration,
                               double h = 50e-9, std::size_t record_stride = 1) {
    if (!(f_hz > 0.0)) throw DomainError("frequency must be > 0");
    if (duration * f_hz < 20.0 * (1.0 - 1e-9)) {
        throw UsageError("open-loop duration must cover at least 20 carrier periods");
    }
    ScenarioOptions opt;
    opt.f_start = f_hz;
    opt.timing.h = h;
    opt.timing.duration = duration;
    opt.timing.dt_ctrl = std::min(150e-6, duration);
    opt.timing.dt_ctrl = std::max(opt.timing.dt_ctrl, 1.0 / f_hz);
    opt.record_stride = record_stride;
    return run_scenario(p, CouplingSchedule::constant(k), opt);
}

}  // namespace wpt
