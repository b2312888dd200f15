// wpt: command-line front end for the coupled-resonator toolkit.
//
// Exit codes: 0 success, 1 usage / config error, 2 simulation error.

#include "wpt/wpt.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config_path;
    std::vector<double> k;
    std::optional<double> fmin, fmax, duration, learn_rate, start_freq, step, dwell;
    std::optional<std::size_t> points;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, Overrides& o, bool simulation) {
    cmd->add_option("-c,--config", o.config_path, "key = value configuration file");
    cmd->add_option("--k", o.k, "coupling coefficient(s) in (0, 0.99], comma separated [-]")->delimiter(',');
    cmd->add_option("--fmin", o.fmin, "frequency grid lower bound [Hz]");
    cmd->add_option("--fmax", o.fmax, "frequency grid upper bound [Hz]");
    cmd->add_option("--points", o.points, "frequency grid size [-]");
    cmd->add_option("--out-dir", o.out_dir, "output directory (default: $WPT_OUT_DIR or ./wpt_out)");
    if (simulation) {
        cmd->add_option("--duration", o.duration, "closed-loop run length [s]");
        cmd->add_option("--learn-rate", o.learn_rate, "gradient-ascent rate [Hz/A]");
        cmd->add_option("--start-freq", o.start_freq, "initial drive frequency [Hz]");
        cmd->add_option("--step", o.step, "integrator step h [s]");
        cmd->add_option("--dwell", o.dwell, "time held at each k in the comparison run [s]");
    }
}

wpt::ExperimentConfig build_config(const Overrides& o, bool k_is_ramp) {
    wpt::ExperimentConfig cfg;
    if (const char* env = std::getenv("WPT_OUT_DIR"); env != nullptr && *env != '\0') cfg.out_dir = env;
    if (!o.config_path.empty()) wpt::load_config_file(cfg, o.config_path);
    if (!o.k.empty()) {
        cfg.k_list = o.k;
        if (k_is_ramp) {
            cfg.k_start = o.k.front();
            cfg.k_end = o.k.back();
        }
    }
    if (o.fmin) cfg.f_min = *o.fmin;
    if (o.fmax) cfg.f_max = *o.fmax;
    if (o.points) cfg.points = *o.points;
    if (o.duration) {
        cfg.timing.duration = *o.duration;
        cfg.ramp_duration = std::min(cfg.ramp_duration, *o.duration);
    }
    if (o.learn_rate) cfg.controller.learn_rate = *o.learn_rate;
    if (o.start_freq) cfg.f_start = *o.start_freq;
    if (o.step) cfg.timing.h = *o.step;
    if (o.dwell) cfg.compare_dwell = *o.dwell;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    cfg.validate();
    return cfg;
}

void print_sweep(const wpt::AcSweepResult& r) {
    std::printf("%6s %14s %14s %8s %8s\n", "k", "argmax|I1| Hz", "argmax|I2| Hz", "#max I1", "#max I2");
    for (const auto& row : r.rows) {
        std::printf("%6.3g %14.1f %14.1f %8zu %8zu\n", row.k, row.argmax_i1_hz, row.argmax_i2_hz, row.i1_maxima.size(),
                    row.i2_maxima.size());
    }
}

void print_surface(const wpt::SurfaceResult& r) {
    const auto& s = r.surface;
    std::printf("surface %zu x %zu\n", s.k_grid.size(), s.f_grid.size());
    for (std::size_t i = 0; i < s.k_grid.size(); ++i) {
        std::printf("k=%-5.3g", s.k_grid[i]);
        for (const auto& pk : s.maxima[i]) std::printf("  %.1f Hz (%.6f A)", pk.freq, pk.value);
        std::printf("\n");
    }
}

void print_adaptive(const wpt::AdaptiveResult& r) {
    std::printf("windows                     %zu\n", r.record.windows.size());
    std::printf("f at k=0.6 boundary         %.1f Hz\n", r.f_at_split_boundary);
    std::printf("min f after k=0.6           %.1f Hz\n", r.min_f_after_split);
    std::printf("max settled estimate error  %.3e\n", r.max_settled_estimate_error);
    std::printf("final k / metric            %.3g / %.6f A (analytic max %.6f A)\n", r.final_k, r.final_metric,
                r.analytic_max_i2);
}

void print_compare(const wpt::CompareResult& r) {
    std::printf("static frequency %.1f Hz\n", r.f_static_hz);
    std::printf("%5s %12s %12s %14s %10s\n", "k", "static A^2", "dynamic A^2", "improvement %", "P_load W");
    for (const auto& row : r.rows) {
        std::printf("%5.2f %12.4f %12.4f %14.2f %10.4f\n", row.k, row.static_metric, row.dynamic_metric,
                    row.improvement_pct, row.p_load_w);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-resonator wireless power link: sweeps, estimation and adaptive frequency tracking"};
    app.require_subcommand(1);

    Overrides o;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "AC sweep per k; writes sweep_<k>.csv");
    CLI::App* surface_cmd = app.add_subcommand("surface", "|I2| over (k, f); writes surface.csv and ridge.csv");
    CLI::App* adapt_cmd = app.add_subcommand("adapt", "closed-loop coupling ramp; writes adaptive.csv");
    CLI::App* compare_cmd = app.add_subcommand("compare", "static vs adaptive matching; writes compare.csv");
    CLI::App* all_cmd = app.add_subcommand("all", "every experiment above into one output tree");
    CLI::App* estimate_cmd = app.add_subcommand("estimate", "mutual inductance and |I2| from primary-side data");
    add_common(sweep_cmd, o, false);
    add_common(surface_cmd, o, false);
    add_common(adapt_cmd, o, true);
    add_common(compare_cmd, o, true);
    add_common(all_cmd, o, true);

    std::optional<double> zin_mag, zin_phase, freq, v_meas, i1_meas;
    estimate_cmd->add_option("-c,--config", o.config_path, "key = value configuration file (circuit values)");
    estimate_cmd->add_option("--zin-mag", zin_mag, "input impedance magnitude [ohm]");
    estimate_cmd->add_option("--zin-phase", zin_phase, "input impedance phase [rad]");
    estimate_cmd->add_option("--v", v_meas, "drive amplitude [V] (default: circuit v_amp)");
    estimate_cmd->add_option("--i1", i1_meas, "primary current amplitude [A]");
    estimate_cmd->add_option("--freq", freq, "operating frequency [Hz]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (estimate_cmd->parsed()) {
            const wpt::ExperimentConfig cfg = build_config(o, false);
            const wpt::CircuitParams& p = cfg.circuit;
            const double v = v_meas.value_or(p.v_amp);
            double i1 = 0.0;
            if (i1_meas) {
                i1 = *i1_meas;
            } else if (zin_mag) {
                i1 = v / *zin_mag;
            } else {
                throw wpt::UsageError("estimate needs --zin-mag or --i1");
            }
            if (!(*freq > 0.0)) throw wpt::UsageError("--freq must be > 0");
            const double omega = wpt::kTwoPi * *freq;
            const wpt::EstimationResult r = wpt::estimate_i2({v, i1, omega, zin_phase}, p);
            std::printf("zin_mag_ohm = %.10g\n", v / i1);
            std::printf("m_est_h = %.6e\n", r.m_est);
            std::printf("k_est = %.6g\n", r.m_est / std::sqrt(p.l1 * p.l2));
            std::printf("i2_est_a = %.6g\n", r.i2_est);
            std::printf("alpha = %.6e\nbeta = %.6e\ngamma = %.6e\n", r.quadratic_terms.alpha, r.quadratic_terms.beta,
                        r.quadratic_terms.gamma);
            if (zin_phase) {
                std::printf("m_est_phase_h = %.6e\n", wpt::m_from_zin_phase(*zin_phase, p, omega));
            }
            return 0;
        }

        const bool ramp_k = adapt_cmd->parsed();
        const wpt::ExperimentConfig cfg = build_config(o, ramp_k);
        nlohmann::ordered_json summary;
        const bool all = all_cmd->parsed();
        if (all || sweep_cmd->parsed()) {
            const auto r = wpt::exp_ac_sweep(cfg);
            print_sweep(r);
            summary["ac_sweep"] = r.summary;
        }
        if (all || surface_cmd->parsed()) {
            const auto r = wpt::exp_surface(cfg);
            print_surface(r);
            summary["surface"] = r.summary;
        }
        if (all || adapt_cmd->parsed()) {
            const auto r = wpt::exp_adaptive(cfg);
            print_adaptive(r);
            summary["adaptive"] = r.summary;
        }
        if (all || compare_cmd->parsed()) {
            const auto r = wpt::exp_compare(cfg);
            print_compare(r);
            summary["compare"] = r.summary;
        }
        wpt::write_summary(cfg, summary);
        return 0;
    } catch (const wpt::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const wpt::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "simulation error: %s\n", e.what());
        return 2;
    }
}
