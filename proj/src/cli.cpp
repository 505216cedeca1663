#include "ipfe/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "ipfe/circuit.hpp"
#include "ipfe/config.hpp"
#include "ipfe/curve.hpp"
#include "ipfe/error.hpp"
#include "ipfe/image.hpp"
#include "ipfe/monte_carlo.hpp"

namespace ipfe {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path);
}

// Writes to `path`, or to stdout when no path was given.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty()) {
        out << text;
    } else {
        write_text(path, text);
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string features_json(const CurveFeatures& f) {
    return "{\"threshold_code\":" + std::to_string(f.threshold_code) + ",\"ax\":" + std::to_string(f.ax) +
           ",\"ay\":" + std::to_string(f.ay) + ",\"bx\":" + std::to_string(f.bx) + ",\"by\":" + std::to_string(f.by) +
           ",\"stage1_max\":" + std::to_string(f.stage1_max) + ",\"stage2_min\":" +
           std::to_string(f.stage2_span.first) + ",\"stage2_max\":" + std::to_string(f.stage2_span.second) + "}\n";
}

std::string family_csv(const char* column, std::span<const double> values, std::span<const TransferCurve> curves) {
    std::ostringstream os;
    os << column << ",input_code,v_drop_v,v_out_raw_v,output_code,ptm_state\n";
    char buf[192];
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        for (int k = 0; k < c.n; ++k) {
            std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g,%d,%s\n", values[i], k, c.v_drop[k], c.v_out_raw[k],
                          c.lut[k], to_string(c.state_seq[k]));
            os << buf;
        }
    }
    return os.str();
}

// One line per curve: value, threshold code (or -1 without a transition).
std::string family_thresholds(std::span<const double> values, std::span<const TransferCurve> curves) {
    std::string s;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        int code = -1;
        try {
            code = curve_features(curves[i]).threshold_code;
        } catch (const SimError& e) {
            if (e.kind() != ErrorKind::NoTransition) throw;
        }
        s += fmt("%.9g", values[i]) + " threshold_code=" + std::to_string(code) + "\n";
    }
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"In-pixel foreground/contrast enhancement simulator", "ipfe"};
    app.require_subcommand(1, 1);

    std::string config_path, out_path, in_path, report_path, trace_path, image_path, summary_path;
    std::string param_name, free_name;
    std::vector<double> values;
    int n_points = 0, target_code = -1, steps = 0;
    int width = 512, height = 512, l_min = 131, l_max = 176;
    std::uint64_t seed = 42;
    std::optional<std::uint64_t> samples, mc_seed;
    std::optional<unsigned> workers;
    double illum = -1.0;
    bool p2 = false;

    std::function<void()> action;

    auto add_config = [&](CLI::App* s) {
        s->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    };
    auto add_points = [&](CLI::App* s) {
        s->add_option("--n", n_points, "curve points (default: curve.n from the config)")->check(CLI::Range(2, 65536));
    };

    auto curve_n = [&](const RunConfig& rc) { return n_points > 0 ? n_points : rc.curve.n; };

    {
        auto* s = app.add_subcommand("extract-curve", "extract the pixel transfer curve as CSV");
        add_config(s);
        add_points(s);
        s->add_option("--out", out_path, "curve CSV (default: stdout)");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                std::ostringstream os;
                write_curve_csv(os, extract_curve(rc.pixel, curve_n(rc), rc.curve.norm));
                emit(out, out_path, os.str());
            };
        });
    }
    {
        auto* s = app.add_subcommand("features", "report threshold code and A/B points of the transfer curve");
        add_config(s);
        add_points(s);
        s->add_option("--out", out_path, "features JSON (default: stdout)");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                emit(out, out_path, features_json(curve_features(extract_curve(rc.pixel, curve_n(rc), rc.curve.norm))));
            };
        });
    }
    {
        auto* s = app.add_subcommand("sweep", "design-phase sweep of one PTM parameter");
        add_config(s);
        add_points(s);
        s->add_option("--param", param_name, "parameter to sweep")
            ->required()
            ->check(CLI::IsMember({"r_lrs", "r_hrs", "ic_hlt"}));
        s->add_option("--values", values, "parameter values (default: sweep.<param> from the config)");
        s->add_option("--out", out_path, "long-form curve CSV")->required();
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                SweepParam p = SweepParam::RLrs;
                const std::vector<double>* defaults = &rc.sweep.r_lrs;
                if (param_name == "r_hrs") {
                    p = SweepParam::RHrs;
                    defaults = &rc.sweep.r_hrs;
                } else if (param_name == "ic_hlt") {
                    p = SweepParam::IcHlt;
                    defaults = &rc.sweep.ic_hlt;
                }
                const std::vector<double> vals = values.empty() ? *defaults : values;
                const auto curves = sweep_parameter(rc.pixel, p, vals, curve_n(rc), rc.curve.norm);
                write_text(out_path, family_csv(param_name.c_str(), vals, curves));
                out << family_thresholds(vals, curves);
            };
        });
    }
    {
        auto* s = app.add_subcommand("vgt-sweep", "real-time tuning sweep of the T_c gate voltage");
        add_config(s);
        add_points(s);
        s->add_option("--values", values, "gate voltages in volts (default: sweep.v_gt from the config)");
        s->add_option("--out", out_path, "long-form curve CSV")->required();
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                const std::vector<double> vals = values.empty() ? rc.sweep.v_gt : values;
                const auto curves = vgt_family(rc.pixel, vals, curve_n(rc), rc.curve.norm);
                write_text(out_path, family_csv("v_gt", vals, curves));
                out << family_thresholds(vals, curves);
            };
        });
    }
    {
        auto* s = app.add_subcommand("design", "solve for the PTM parameter that places the threshold at a code");
        add_config(s);
        add_points(s);
        s->add_option("--target-code", target_code, "desired threshold input code")->required()->check(CLI::Range(0, 65535));
        s->add_option("--free", free_name, "free parameter")->required()->check(CLI::IsMember({"ic_hlt", "r_hrs"}));
        s->add_option("--out", out_path, "result JSON (default: stdout)");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                const DesignParam dp = free_name == "ic_hlt" ? DesignParam::IcHlt : DesignParam::RHrs;
                const int n = curve_n(rc);
                const double v = design_threshold(rc.pixel, target_code, dp, n, rc.curve.norm);
                const PixelConfig designed =
                    with_param(rc.pixel, dp == DesignParam::IcHlt ? SweepParam::IcHlt : SweepParam::RHrs, v);
                const int code = curve_features(extract_curve(designed, n, rc.curve.norm)).threshold_code;
                emit(out, out_path,
                     "{\"free\":\"" + free_name + "\",\"value\":" + fmt("%.9g", v) +
                         ",\"target_code\":" + std::to_string(target_code) +
                         ",\"threshold_code\":" + std::to_string(code) + "}\n");
            };
        });
    }
    {
        auto* s = app.add_subcommand("enhance", "apply the pixel LUT to an image and report contrast");
        add_config(s);
        s->add_option("--in", in_path, "input PGM")->required()->check(CLI::ExistingFile);
        s->add_option("--out-image", out_path, "enhanced PGM")->required();
        s->add_option("--report", report_path, "contrast report JSON")->required();
        s->add_flag("--p2", p2, "write ASCII (P2) instead of binary (P5)");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                const GrayImage before = read_pgm_file(in_path);
                const TransferCurve curve = extract_curve(rc.pixel, 256, rc.curve.norm);
                const GrayImage after = apply_lut(before, make_lut(curve.lut));
                write_pgm_file(out_path, after, p2 ? PgmVariant::P2 : PgmVariant::P5);
                const ContrastReport rep = enhancement_report(before, after);
                write_text(report_path, report_json(rep) + "\n");
                out << "cr_before=" << fmt("%.6f", rep.cr_before) << " cr_after=" << fmt("%.6f", rep.cr_after)
                    << " improvement=" << fmt("%.6f", rep.improvement) << "\n";
            };
        });
    }
    {
        auto* s = app.add_subcommand("metrics", "histogram and Michelson contrast of an image");
        s->add_option("--in", in_path, "input PGM")->required()->check(CLI::ExistingFile);
        s->add_option("--out", out_path, "histogram JSON (default: stdout)");
        s->callback([&] {
            action = [&] { emit(out, out_path, histogram_json(histogram(read_pgm_file(in_path))) + "\n"); };
        });
    }
    {
        auto* s = app.add_subcommand("synth", "generate a seeded low-contrast test image");
        s->add_option("--width", width, "pixels")->check(CLI::Range(1, 1 << 15));
        s->add_option("--height", height, "pixels")->check(CLI::Range(1, 1 << 15));
        s->add_option("--l-min", l_min, "lowest code")->check(CLI::Range(0, 255));
        s->add_option("--l-max", l_max, "highest code")->check(CLI::Range(0, 255));
        s->add_option("--seed", seed, "generator seed");
        s->add_option("--out", out_path, "output PGM")->required();
        s->add_flag("--p2", p2, "write ASCII (P2) instead of binary (P5)");
        s->callback([&] {
            action = [&] {
                write_pgm_file(out_path, synth_low_contrast(width, height, l_min, l_max, seed),
                               p2 ? PgmVariant::P2 : PgmVariant::P5);
            };
        });
    }
    {
        auto* s = app.add_subcommand("simulate", "reset/integrate/readout transient of one pixel");
        add_config(s);
        s->add_option("--illum", illum, "illumination in [0, 1] (default: transient.illum)")->check(CLI::Range(0.0, 1.0));
        s->add_option("--steps", steps, "integration steps (default: transient.n_steps)")->check(CLI::Range(2, 10'000'000));
        s->add_option("--trace", trace_path, "trace CSV");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                const double x = illum >= 0.0 ? illum : rc.transient.illum;
                const FrameTrace tr = simulate_frame(rc.pixel, x, steps > 0 ? steps : rc.transient.n_steps);
                if (!trace_path.empty()) {
                    std::ostringstream os;
                    write_trace_csv(os, tr);
                    write_text(trace_path, os.str());
                }
                out << "{\"illum\":" << fmt("%.9g", x) << ",\"readout_v_out\":" << fmt("%.9g", tr.readout_v_out)
                    << ",\"state_at_readout\":\"" << to_string(tr.samples.back().ptm_state)
                    << "\",\"final_state\":\"" << to_string(tr.final_state) << "\"}\n";
            };
        });
    }
    {
        auto* s = app.add_subcommand("baseline-3t", "conventional 3-T pixel readout");
        add_config(s);
        s->add_option("--illum", illum, "illumination in [0, 1]")->required()->check(CLI::Range(0.0, 1.0));
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                out << "{\"v_reset\":" << fmt("%.9g", three_t_reset_level(rc.baseline))
                    << ",\"readout_v\":" << fmt("%.9g", simulate_3t_frame(rc.baseline, illum)) << "}\n";
            };
        });
    }
    {
        auto* s = app.add_subcommand("mc", "Monte-Carlo variation study of the contrast ratio");
        add_config(s);
        s->add_option("--samples", samples, "number of samples (default: monte_carlo.samples)");
        s->add_option("--seed", mc_seed, "seed (default: monte_carlo.seed)");
        s->add_option("--workers", workers, "worker threads (default: monte_carlo.workers)")->check(CLI::Range(1, 1024));
        s->add_option("--image", image_path, "PGM scored by every sample")->required()->check(CLI::ExistingFile);
        s->add_option("--out", out_path, "per-sample CSV")->required();
        s->add_option("--summary", summary_path, "summary JSON");
        s->callback([&] {
            action = [&] {
                const RunConfig rc = load_config(config_path);
                McOptions opts;
                opts.norm = rc.curve.norm;
                opts.workers = workers.value_or(rc.mc.workers);
                const GrayImage img = read_pgm_file(image_path);
                const auto rows = run_monte_carlo(rc.pixel, rc.mc.variation, samples.value_or(rc.mc.samples),
                                                  mc_seed.value_or(rc.mc.seed), img, opts);
                std::ostringstream os;
                write_mc_csv(os, rows);
                write_text(out_path, os.str());
                std::size_t failed = 0;
                for (const auto& r : rows) failed += r.ok ? 0 : 1;
                if (!summary_path.empty()) write_text(summary_path, summary_json(mc_summary(rows)) + "\n");
                out << rows.size() << " rows, " << failed << " failed\n";
            };
        });
    }
    {
        auto* s = app.add_subcommand("config", "print the configuration with all defaults filled in");
        add_config(s);
        s->add_option("--out", out_path, "output JSON (default: stdout)");
        s->callback([&] { action = [&] { emit(out, out_path, serialize_config(load_config(config_path))); }; });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace ipfe
