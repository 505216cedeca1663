#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "ipfe/circuit.hpp"
#include "ipfe/config.hpp"
#include "ipfe/curve.hpp"
#include "ipfe/device_models.hpp"
#include "ipfe/error.hpp"
#include "ipfe/image.hpp"
#include "ipfe/monte_carlo.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace ipfe;

namespace {

GrayImage image_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D uint8 array (height, width)");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

py::array_t<std::uint8_t> image_to_array(const GrayImage& img) {
    py::array_t<std::uint8_t> a({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_ipfe, m) {
    m.doc() = "In-pixel foreground/contrast enhancement simulator";

    static py::exception<SimError> sim_error(m, "SimError", PyExc_RuntimeError);
    static py::exception<PgmError> pgm_error(m, "PgmError", PyExc_ValueError);
    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SimError& e) {
            py::set_error(sim_error, e.what());
        } catch (const PgmError& e) {
            py::set_error(pgm_error, e.what());
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        }
    });

    py::enum_<PtmState>(m, "PtmState").value("HRS", PtmState::HRS).value("LRS", PtmState::LRS);
    py::enum_<Polarity>(m, "Polarity").value("N", Polarity::N).value("P", Polarity::P);
    py::enum_<LatchMode>(m, "LatchMode")
        .value("Latching", LatchMode::Latching)
        .value("BistableStrict", LatchMode::BistableStrict);
    py::enum_<SweepParam>(m, "SweepParam")
        .value("R_LRS", SweepParam::RLrs)
        .value("R_HRS", SweepParam::RHrs)
        .value("IC_HLT", SweepParam::IcHlt);
    py::enum_<DesignParam>(m, "DesignParam").value("IC_HLT", DesignParam::IcHlt).value("R_HRS", DesignParam::RHrs);
    py::enum_<ResetMode>(m, "ResetMode").value("Soft", ResetMode::Soft).value("Hard", ResetMode::Hard);

    py::class_<PtmParams>(m, "PtmParams")
        .def(py::init<>())
        .def_readwrite("r_hrs", &PtmParams::r_hrs)
        .def_readwrite("r_lrs", &PtmParams::r_lrs)
        .def_readwrite("i_c_hlt", &PtmParams::i_c_hlt)
        .def_readwrite("i_c_lht", &PtmParams::i_c_lht)
        .def_readwrite("l_ptm", &PtmParams::l_ptm)
        .def_readwrite("a_ptm", &PtmParams::a_ptm)
        .def("validate", &PtmParams::validate);
    m.def("ptm_table1", &ptm_table1);
    m.def("ptm_contrast_enhancement", &ptm_contrast_enhancement);

    py::class_<MosfetParams>(m, "MosfetParams")
        .def(py::init<>())
        .def(py::init([](Polarity p, double vth, double kp) { return MosfetParams{p, vth, kp}; }), "polarity"_a,
             "vth"_a, "kp"_a)
        .def_readwrite("polarity", &MosfetParams::polarity)
        .def_readwrite("vth", &MosfetParams::vth)
        .def_readwrite("kp", &MosfetParams::kp);

    py::class_<PhotodiodeParams>(m, "PhotodiodeParams")
        .def(py::init<>())
        .def_readwrite("c_pd", &PhotodiodeParams::c_pd)
        .def_readwrite("t_int", &PhotodiodeParams::t_int)
        .def_readwrite("i_pd_max", &PhotodiodeParams::i_pd_max);

    py::class_<TuningTransistor>(m, "TuningTransistor")
        .def(py::init<>())
        .def(py::init([](MosfetParams p, double v_gt) { return TuningTransistor{p, v_gt}; }), "params"_a, "v_gt"_a)
        .def_readwrite("params", &TuningTransistor::params)
        .def_readwrite("v_gt", &TuningTransistor::v_gt);

    py::class_<PixelConfig>(m, "PixelConfig")
        .def(py::init<>())
        .def_readwrite("vdd", &PixelConfig::vdd)
        .def_readwrite("ptm", &PixelConfig::ptm)
        .def_readwrite("x2", &PixelConfig::x2)
        .def_readwrite("tc", &PixelConfig::tc)
        .def_readwrite("selector_r_on", &PixelConfig::selector_r_on)
        .def_readwrite("r_load", &PixelConfig::r_load)
        .def_readwrite("pd", &PixelConfig::pd)
        .def_readwrite("latch_mode", &PixelConfig::latch_mode)
        .def("validate", &PixelConfig::validate);
    m.def("ref_a_config", &ref_a_config);

    m.def("ptm_resistance", &ptm_resistance, "state"_a, "params"_a);
    m.def("ptm_transition", &ptm_transition, "state"_a, "params"_a, "branch_current"_a);
    m.def("mosfet_drain_current", &mosfet_drain_current, "params"_a, "v_gs_eff"_a, "v_ds_eff"_a);
    m.def("photocurrent", &photocurrent, "illum"_a, "pd"_a);

    py::class_<HysteresisPoint>(m, "HysteresisPoint")
        .def_readonly("voltage", &HysteresisPoint::voltage)
        .def_readonly("current", &HysteresisPoint::current)
        .def_readonly("state", &HysteresisPoint::state);
    py::class_<HysteresisSweep>(m, "HysteresisSweep")
        .def_readonly("up", &HysteresisSweep::up)
        .def_readonly("down", &HysteresisSweep::down)
        .def_readonly("v_hlt", &HysteresisSweep::v_hlt)
        .def_readonly("v_lht", &HysteresisSweep::v_lht);
    m.def("ptm_hysteresis_sweep", &ptm_hysteresis_sweep, "params"_a, "v_max"_a = 1.2, "dv"_a = 1e-4);

    py::class_<OperatingPoint>(m, "OperatingPoint")
        .def_readonly("branch_current", &OperatingPoint::branch_current)
        .def_readonly("v_out", &OperatingPoint::v_out)
        .def_readonly("node_voltages", &OperatingPoint::node_voltages)
        .def_readonly("ptm_state", &OperatingPoint::ptm_state)
        .def_readonly("transitioned", &OperatingPoint::transitioned);
    m.def("solve_stack_dc",
          [](const PixelConfig& c, double v_pd, PtmState s) { return solve_stack_dc(c, v_pd, s); }, "config"_a,
          "v_pd"_a, "state_in"_a = PtmState::HRS);
    m.def("integrate_pd", &integrate_pd, "v0"_a, "i_pd"_a, "c_pd"_a, "dt"_a);

    py::class_<TraceSample>(m, "TraceSample")
        .def_readonly("time", &TraceSample::time)
        .def_readonly("v_pd", &TraceSample::v_pd)
        .def_readonly("branch_current", &TraceSample::branch_current)
        .def_readonly("ptm_state", &TraceSample::ptm_state)
        .def_readonly("v_out", &TraceSample::v_out);
    py::class_<FrameTrace>(m, "FrameTrace")
        .def_readonly("samples", &FrameTrace::samples)
        .def_readonly("readout_v_out", &FrameTrace::readout_v_out)
        .def_readonly("final_state", &FrameTrace::final_state);
    m.def("simulate_frame", &simulate_frame, "config"_a, "illum"_a, "n_steps"_a = 256);

    py::class_<ThreeTConfig>(m, "ThreeTConfig")
        .def(py::init<>())
        .def_readwrite("vdd", &ThreeTConfig::vdd)
        .def_readwrite("reset_mode", &ThreeTConfig::reset_mode)
        .def_readwrite("vth_x1", &ThreeTConfig::vth_x1)
        .def_readwrite("sf", &ThreeTConfig::sf)
        .def_readwrite("pd", &ThreeTConfig::pd);
    m.def("simulate_3t_frame", &simulate_3t_frame, "config"_a, "illum"_a);

    py::class_<NormalizationMode>(m, "NormalizationMode")
        .def_static("per_curve", &NormalizationMode::per_curve)
        .def_static("fixed", &NormalizationMode::fixed, "lo"_a, "hi"_a);

    py::class_<TransferCurve>(m, "TransferCurve")
        .def_readonly("n", &TransferCurve::n)
        .def_readonly("input_codes", &TransferCurve::input_codes)
        .def_readonly("v_drop", &TransferCurve::v_drop)
        .def_readonly("v_out_raw", &TransferCurve::v_out_raw)
        .def_readonly("lut", &TransferCurve::lut)
        .def_readonly("state_seq", &TransferCurve::state_seq);
    py::class_<CurveFeatures>(m, "CurveFeatures")
        .def_readonly("threshold_code", &CurveFeatures::threshold_code)
        .def_readonly("ax", &CurveFeatures::ax)
        .def_readonly("ay", &CurveFeatures::ay)
        .def_readonly("bx", &CurveFeatures::bx)
        .def_readonly("by", &CurveFeatures::by)
        .def_readonly("stage1_max", &CurveFeatures::stage1_max)
        .def_readonly("stage2_span", &CurveFeatures::stage2_span);

    const auto per_curve = NormalizationMode::per_curve();
    m.def("normalize_curve",
          [](const std::vector<double>& v, const NormalizationMode& norm) { return normalize_curve(v, norm); },
          "v_out_raw"_a, "norm"_a = per_curve);
    m.def("extract_curve", &extract_curve, "config"_a, "n"_a = 256, "norm"_a = per_curve);
    m.def("curve_features", &curve_features, "curve"_a);
    m.def("sweep_parameter",
          [](const PixelConfig& c, SweepParam p, const std::vector<double>& values, int n,
             const NormalizationMode& norm) { return sweep_parameter(c, p, values, n, norm); },
          "config"_a, "param"_a, "values"_a, "n"_a = 256, "norm"_a = per_curve);
    m.def("design_threshold", &design_threshold, "config"_a, "target_code"_a, "free_param"_a, "n"_a = 256,
          "norm"_a = per_curve);
    m.def("vgt_family",
          [](const PixelConfig& c, const std::vector<double>& vgt, int n, const NormalizationMode& norm) {
              return vgt_family(c, vgt, n, norm);
          },
          "config"_a, "vgt_values"_a, "n"_a = 256, "norm"_a = per_curve);

    py::class_<GrayImage>(m, "GrayImage")
        .def(py::init(&image_from_array), "pixels"_a)
        .def_readonly("width", &GrayImage::width)
        .def_readonly("height", &GrayImage::height)
        .def("to_numpy", &image_to_array)
        .def("__eq__", [](const GrayImage& a, const GrayImage& b) { return a == b; });

    py::class_<Histogram>(m, "Histogram")
        .def_property_readonly("bins",
                               [](const Histogram& h) { return std::vector<std::uint64_t>(h.bins.begin(), h.bins.end()); })
        .def_readonly("l_min", &Histogram::l_min)
        .def_readonly("l_max", &Histogram::l_max);
    py::class_<ContrastReport>(m, "ContrastReport")
        .def_readonly("cr_before", &ContrastReport::cr_before)
        .def_readonly("cr_after", &ContrastReport::cr_after)
        .def_readonly("improvement", &ContrastReport::improvement);

    m.def("read_pgm", [](const py::bytes& b) {
        const std::string s = b;
        return read_pgm(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    });
    m.def(
        "write_pgm",
        [](const GrayImage& img, const std::string& variant) {
            if (variant != "P2" && variant != "P5") throw py::value_error("variant must be 'P2' or 'P5'");
            const auto bytes = write_pgm(img, variant == "P2" ? PgmVariant::P2 : PgmVariant::P5);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        "image"_a, "variant"_a = "P5");
    m.def("apply_lut",
          [](const GrayImage& img, const std::vector<int>& lut) { return apply_lut(img, make_lut(lut)); }, "image"_a,
          "lut"_a);
    m.def("histogram", &histogram, "image"_a);
    m.def("michelson_cr", py::overload_cast<const GrayImage&>(&michelson_cr), "image"_a);
    m.def("enhancement_report", &enhancement_report, "before"_a, "after"_a);
    m.def("synth_low_contrast", &synth_low_contrast, "width"_a, "height"_a, "l_min"_a, "l_max"_a, "seed"_a);

    py::class_<VariationSpec>(m, "VariationSpec")
        .def(py::init<>())
        .def_readwrite("sigma_r_hrs", &VariationSpec::sigma_r_hrs)
        .def_readwrite("sigma_r_lrs", &VariationSpec::sigma_r_lrs)
        .def_readwrite("sigma_i_c_hlt", &VariationSpec::sigma_i_c_hlt)
        .def_readwrite("sigma_vth_x2", &VariationSpec::sigma_vth_x2);
    py::class_<McRow>(m, "McRow")
        .def_readonly("index", &McRow::index)
        .def_readonly("r_hrs", &McRow::r_hrs)
        .def_readonly("r_lrs", &McRow::r_lrs)
        .def_readonly("i_c_hlt", &McRow::i_c_hlt)
        .def_readonly("vth_x2", &McRow::vth_x2)
        .def_readonly("cr", &McRow::cr)
        .def_readonly("ok", &McRow::ok)
        .def_readonly("status", &McRow::status);
    py::class_<McSummary>(m, "McSummary")
        .def_readonly("n", &McSummary::n)
        .def_readonly("cr_min", &McSummary::cr_min)
        .def_readonly("cr_max", &McSummary::cr_max)
        .def_readonly("cr_mean", &McSummary::cr_mean)
        .def_readonly("cr_std", &McSummary::cr_std);
    m.def("sample_variant", &sample_variant, "nominal"_a, "spec"_a, "index"_a, "seed"_a);
    m.def(
        "run_monte_carlo",
        [](const PixelConfig& c, const VariationSpec& spec, std::size_t n, std::uint64_t seed, const GrayImage& img,
           unsigned workers) {
            McOptions opts;
            opts.workers = workers;
            py::gil_scoped_release release;
            return run_monte_carlo(c, spec, n, seed, img, opts);
        },
        "nominal"_a, "spec"_a, "n"_a, "seed"_a, "image"_a, "workers"_a = 1);
    m.def("mc_summary", [](const std::vector<McRow>& rows) { return mc_summary(rows); }, "rows"_a);

    m.def(
        "load_pixel_config",
        [](const std::string& json_text) { return parse_config(json_text).pixel; }, "json_text"_a,
        "Parse a run-configuration JSON document and return its pixel configuration.");
    m.def(
        "canonical_config", [](const std::string& json_text) { return serialize_config(parse_config(json_text)); },
        "json_text"_a, "Parse a run-configuration JSON document and re-serialize it with defaults filled in.");
}
