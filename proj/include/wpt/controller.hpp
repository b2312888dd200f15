#pragma once

// Discrete gradient-ascent (perturb-and-observe) frequency tracker:
//
//   f_n = f_{n-1} + rate * (m_{n-1} - m_{n-2}) * sign(f_{n-1} - f_{n-2})
//
// with sign(0) = +1 and the result clamped to [f_min, f_max].

#include "wpt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wpt {

struct ControllerConfig {
    double learn_rate = 8e5;  // Hz per ampere of metric change
    double f_min = 56e3;
    double f_max = 95e3;
    /// Size of the very first move, made before any metric difference exists.
    /// <= 0 applies the plain update rule against the zero-initialised memory.
    double probe_step = 200.0;
    /// Upper bound on |f_next - f_curr| per tick; infinity disables it.
    double max_step = 1000.0;

    void validate() const {
        if (!(learn_rate > 0.0 && std::isfinite(learn_rate))) throw UsageError("learn_rate must be > 0");
        if (!(f_min > 0.0 && f_min < f_max)) throw UsageError("controller bounds need 0 < f_min < f_max");
        if (!(max_step > 0.0)) throw UsageError("max_step must be > 0");
        if (!std::isfinite(probe_step)) throw UsageError("probe_step must be finite");
    }
};

struct ControllerState {
    double f_curr = 0.0;
    double f_prev = 0.0;
    double metric_prev = 0.0;
    double metric_prev2 = 0.0;
    double learn_rate = 8e5;
    double f_min = 0.0;
    double f_max = 0.0;
    double probe_step = 0.0;
    double max_step = std::numeric_limits<double>::infinity();
    std::int64_t ticks = 0;
};

struct AscentResult {
    ControllerState state;
    double f_next = 0.0;
    bool clamped = false;
};

inline ControllerState init(double f_start, const ControllerConfig& cfg) {
    cfg.validate();
    if (!(f_start >= cfg.f_min && f_start <= cfg.f_max)) {
        throw UsageError("start frequency must lie in [f_min, f_max]");
    }
    ControllerState st;
    st.f_curr = f_start;
    st.f_prev = f_start;
    st.learn_rate = cfg.learn_rate;
    st.f_min = cfg.f_min;
    st.f_max = cfg.f_max;
    st.probe_step = cfg.probe_step;
    st.max_step = cfg.max_step;
    return st;
}

/// Plain update rule: no probe, no step limit.
inline ControllerState init(double f_start, double learn_rate, double f_min, double f_max) {
    ControllerConfig cfg;
    cfg.learn_rate = learn_rate;
    cfg.f_min = f_min;
    cfg.f_max = f_max;
    cfg.probe_step = 0.0;
    cfg.max_step = std::numeric_limits<double>::infinity();
    return init(f_start, cfg);
}

inline AscentResult ascent_step(const ControllerState& st, double metric_new) {
    if (!std::isfinite(metric_new) || metric_new < 0.0) {
        throw UsageError("controller metric must be finite and >= 0");
    }
    double step = 0.0;
    if (st.ticks == 0 && st.probe_step > 0.0) {
        step = st.probe_step;
    } else {
        const double delta = metric_new - st.metric_prev;
        const double direction = st.f_curr - st.f_prev >= 0.0 ? 1.0 : -1.0;
        step = st.learn_rate * delta * direction;
    }
    step = std::clamp(step, -st.max_step, st.max_step);

    const double proposed = st.f_curr + step;
    AscentResult r;
    r.f_next = std::clamp(proposed, st.f_min, st.f_max);
    r.clamped = r.f_next != proposed;
    r.state = st;
    r.state.f_prev = st.f_curr;
    r.state.f_curr = r.f_next;
    r.state.metric_prev2 = st.metric_prev;
    r.state.metric_prev = metric_new;
    r.state.ticks = st.ticks + 1;
    return r;
}

}  // namespace wpt
