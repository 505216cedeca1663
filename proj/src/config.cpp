#include "ipfe/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <set>

#include "ipfe/error.hpp"
#include "json.hpp"

namespace ipfe {

using nlohmann::json;

namespace {

const char* kind_name(ConfigErrorKind k) {
    switch (k) {
        case ConfigErrorKind::SyntaxError: return "SyntaxError";
        case ConfigErrorKind::UnknownKey: return "UnknownKey";
        case ConfigErrorKind::InvalidValue: return "InvalidValue";
    }
    return "ConfigError";
}

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
    throw ConfigError(ConfigErrorKind::InvalidValue, path, reason);
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

/// A JSON object being consumed under a known key path.
class Node {
public:
    Node(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!keys.count(it.key()))
                throw ConfigError(ConfigErrorKind::UnknownKey, join(path_, it.key()), "not a recognised key");
        }
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    std::string path(const char* key) const { return join(path_, key); }
    const json& at(const char* key) const { return j_.at(key); }

    double number(const char* key, double fallback, bool required = false) const {
        if (!has(key)) {
            if (required) invalid(path(key), "required key is missing");
            return fallback;
        }
        const json& v = j_.at(key);
        if (!v.is_number()) invalid(path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) invalid(path(key), "must be finite");
        return d;
    }

    std::uint64_t count(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            invalid(path(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) invalid(path(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key, const std::vector<double>& fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array()) invalid(path(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) invalid(path(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& reason) {
    if (!ok) invalid(path, reason);
}

MosfetParams parse_mosfet(const Node& parent, const char* key, const MosfetParams& def) {
    if (!parent.has(key)) return def;
    const Node n(parent.at(key), parent.path(key), {"polarity", "vth", "kp"});
    MosfetParams m = def;
    const std::string pol = n.text("polarity", def.polarity == Polarity::P ? "P" : "N");
    if (pol == "P") {
        m.polarity = Polarity::P;
    } else if (pol == "N") {
        m.polarity = Polarity::N;
    } else {
        invalid(n.path("polarity"), "expected \"N\" or \"P\"");
    }
    m.vth = n.number("vth", def.vth);
    m.kp = n.number("kp", def.kp);
    require(m.vth >= 0.0, n.path("vth"), "must be >= 0 (magnitude)");
    require(m.kp > 0.0, n.path("kp"), "must be > 0");
    return m;
}

json mosfet_json(const MosfetParams& m) {
    return {{"polarity", m.polarity == Polarity::P ? "P" : "N"}, {"vth", m.vth}, {"kp", m.kp}};
}

}  // namespace

ConfigError::ConfigError(ConfigErrorKind kind, std::string path, const std::string& reason)
    : std::runtime_error(std::string(kind_name(kind)) + "(" + path + "): " + reason), kind_(kind),
      path_(std::move(path)) {}

RunConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigErrorKind::SyntaxError, "<root>", e.what());
    }

    const Node root(doc, "",
                    {"schema_version", "vdd", "ptm", "x2", "tc", "selector_r_on", "r_load", "pd", "latch_mode", "curve",
                     "baseline_3t", "sweep", "monte_carlo", "transient"});
    RunConfig rc;
    const PixelConfig def = ref_a_config();
    PixelConfig& px = rc.pixel;

    if (!root.has("schema_version")) invalid("schema_version", "required key is missing");
    if (!root.at("schema_version").is_number_integer() || root.at("schema_version").get<int>() != kSchemaVersion)
        invalid("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

    px.vdd = root.number("vdd", def.vdd, true);
    require(px.vdd > 0.0, "vdd", "must be > 0");

    if (!root.has("ptm")) invalid("ptm", "required key is missing");
    {
        const Node n(root.at("ptm"), "ptm", {"r_hrs", "r_lrs", "i_c_hlt", "i_c_lht", "l_ptm", "a_ptm"});
        px.ptm.r_hrs = n.number("r_hrs", 0.0, true);
        px.ptm.r_lrs = n.number("r_lrs", 0.0, true);
        px.ptm.i_c_hlt = n.number("i_c_hlt", 0.0, true);
        px.ptm.i_c_lht = n.number("i_c_lht", 0.0, true);
        px.ptm.l_ptm = n.number("l_ptm", def.ptm.l_ptm);
        px.ptm.a_ptm = n.number("a_ptm", def.ptm.a_ptm);
        require(px.ptm.r_lrs > 0.0, "ptm.r_lrs", "must be > 0");
        require(px.ptm.r_lrs < px.ptm.r_hrs, "ptm.r_lrs", "ordering: must be below ptm.r_hrs");
        require(px.ptm.i_c_hlt > 0.0, "ptm.i_c_hlt", "must be > 0");
        require(px.ptm.i_c_lht > 0.0, "ptm.i_c_lht", "must be > 0");
        require(px.ptm.l_ptm >= 0.0, "ptm.l_ptm", "must be >= 0");
        require(px.ptm.a_ptm >= 0.0, "ptm.a_ptm", "must be >= 0");
    }

    px.x2 = parse_mosfet(root, "x2", def.x2);
    if (px.x2.polarity != Polarity::P) invalid("x2.polarity", "the HyperFET transistor must be P-type");

    px.tc.reset();
    if (root.has("tc")) {
        const Node n(root.at("tc"), "tc", {"params", "v_gt"});
        TuningTransistor t;
        t.params = parse_mosfet(n, "params", MosfetParams{});
        if (t.params.polarity != Polarity::P) invalid("tc.params.polarity", "the tuning transistor must be P-type");
        t.v_gt = n.number("v_gt", 0.0, true);
        require(t.v_gt >= 0.0 && t.v_gt <= px.vdd, "tc.v_gt", "must lie in [0, vdd]");
        px.tc = t;
    }

    px.selector_r_on = root.number("selector_r_on", def.selector_r_on);
    require(px.selector_r_on >= 0.0, "selector_r_on", "must be >= 0");
    px.r_load = root.number("r_load", def.r_load);
    require(px.r_load > 0.0, "r_load", "must be > 0");

    if (root.has("pd")) {
        const Node n(root.at("pd"), "pd", {"c_pd", "t_int", "i_pd_max"});
        px.pd.c_pd = n.number("c_pd", def.pd.c_pd);
        px.pd.t_int = n.number("t_int", def.pd.t_int);
        px.pd.i_pd_max = n.number("i_pd_max", def.pd.i_pd_max);
        require(px.pd.c_pd > 0.0, "pd.c_pd", "must be > 0");
        require(px.pd.t_int > 0.0, "pd.t_int", "must be > 0");
        require(px.pd.i_pd_max > 0.0, "pd.i_pd_max", "must be > 0");
    }

    const std::string latch = root.text("latch_mode", "Latching");
    if (latch == "Latching") {
        px.latch_mode = LatchMode::Latching;
    } else if (latch == "BistableStrict") {
        px.latch_mode = LatchMode::BistableStrict;
    } else {
        invalid("latch_mode", "expected \"Latching\" or \"BistableStrict\"");
    }

    if (root.has("curve")) {
        const Node n(root.at("curve"), "curve", {"n", "normalization"});
        const std::uint64_t pts = n.count("n", 256);
        require(pts >= 2 && pts <= 65536, "curve.n", "must lie in [2, 65536]");
        rc.curve.n = static_cast<int>(pts);
        if (n.has("normalization")) {
            const Node m(n.at("normalization"), "curve.normalization", {"mode", "lo", "hi"});
            const std::string mode = m.text("mode", "PerCurveMinMax");
            if (mode == "PerCurveMinMax") {
                if (m.has("lo") || m.has("hi")) invalid("curve.normalization.lo", "only valid with FixedRange");
                rc.curve.norm = NormalizationMode::per_curve();
            } else if (mode == "FixedRange") {
                const double lo = m.number("lo", 0.0, true);
                const double hi = m.number("hi", 0.0, true);
                require(hi > lo, "curve.normalization.hi", "must exceed lo");
                rc.curve.norm = NormalizationMode::fixed(lo, hi);
            } else {
                invalid("curve.normalization.mode", "expected \"PerCurveMinMax\" or \"FixedRange\"");
            }
        }
    }

    rc.baseline.vdd = px.vdd;
    rc.baseline.pd = px.pd;
    if (root.has("baseline_3t")) {
        const Node n(root.at("baseline_3t"), "baseline_3t", {"reset_mode", "vth_x1", "sf"});
        const std::string mode = n.text("reset_mode", "Soft");
        if (mode == "Soft") {
            rc.baseline.reset_mode = ResetMode::Soft;
        } else if (mode == "Hard") {
            rc.baseline.reset_mode = ResetMode::Hard;
        } else {
            invalid("baseline_3t.reset_mode", "expected \"Soft\" or \"Hard\"");
        }
        rc.baseline.vth_x1 = n.number("vth_x1", rc.baseline.vth_x1);
        require(rc.baseline.vth_x1 >= 0.0 && rc.baseline.vth_x1 < px.vdd, "baseline_3t.vth_x1",
                "must lie in [0, vdd)");
        rc.baseline.sf = parse_mosfet(n, "sf", rc.baseline.sf);
    }

    if (root.has("sweep")) {
        const Node n(root.at("sweep"), "sweep", {"r_lrs", "r_hrs", "ic_hlt", "v_gt"});
        rc.sweep.r_lrs = n.numbers("r_lrs", rc.sweep.r_lrs);
        rc.sweep.r_hrs = n.numbers("r_hrs", rc.sweep.r_hrs);
        rc.sweep.ic_hlt = n.numbers("ic_hlt", rc.sweep.ic_hlt);
        rc.sweep.v_gt = n.numbers("v_gt", rc.sweep.v_gt);
        auto positive = [&](const char* key, const std::vector<double>& vals) {
            for (std::size_t i = 0; i < vals.size(); ++i)
                require(vals[i] > 0.0, n.path(key) + "[" + std::to_string(i) + "]", "must be > 0");
        };
        positive("r_lrs", rc.sweep.r_lrs);
        positive("r_hrs", rc.sweep.r_hrs);
        positive("ic_hlt", rc.sweep.ic_hlt);
        for (std::size_t i = 0; i < rc.sweep.v_gt.size(); ++i)
            require(rc.sweep.v_gt[i] >= 0.0 && rc.sweep.v_gt[i] <= px.vdd,
                    "sweep.v_gt[" + std::to_string(i) + "]", "must lie in [0, vdd]");
    }

    if (root.has("monte_carlo")) {
        const Node n(root.at("monte_carlo"), "monte_carlo",
                     {"samples", "seed", "workers", "sigma_r_hrs", "sigma_r_lrs", "sigma_i_c_hlt", "sigma_vth_x2"});
        rc.mc.samples = n.count("samples", rc.mc.samples);
        rc.mc.seed = n.count("seed", rc.mc.seed);
        const std::uint64_t workers = n.count("workers", rc.mc.workers);
        require(workers >= 1 && workers <= 1024, "monte_carlo.workers", "must lie in [1, 1024]");
        rc.mc.workers = static_cast<unsigned>(workers);
        auto& v = rc.mc.variation;
        v.sigma_r_hrs = n.number("sigma_r_hrs", v.sigma_r_hrs);
        v.sigma_r_lrs = n.number("sigma_r_lrs", v.sigma_r_lrs);
        v.sigma_i_c_hlt = n.number("sigma_i_c_hlt", v.sigma_i_c_hlt);
        v.sigma_vth_x2 = n.number("sigma_vth_x2", v.sigma_vth_x2);
        for (const char* key : {"sigma_r_hrs", "sigma_r_lrs", "sigma_i_c_hlt", "sigma_vth_x2"})
            require(n.number(key, 0.0) >= 0.0, n.path(key), "must be >= 0");
    }

    if (root.has("transient")) {
        const Node n(root.at("transient"), "transient", {"n_steps", "illum"});
        const std::uint64_t steps = n.count("n_steps", static_cast<std::uint64_t>(rc.transient.n_steps));
        require(steps >= 2 && steps <= 10'000'000, "transient.n_steps", "must lie in [2, 1e7]");
        rc.transient.n_steps = static_cast<int>(steps);
        rc.transient.illum = n.number("illum", rc.transient.illum);
        require(rc.transient.illum >= 0.0 && rc.transient.illum <= 1.0, "transient.illum", "must lie in [0, 1]");
    }

    try {
        rc.pixel.validate();
        rc.baseline.validate();
    } catch (const SimError& e) {
        invalid("<root>", e.what());
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigErrorKind::SyntaxError, path.string(), "cannot open file");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string serialize_config(const RunConfig& rc) {
    const PixelConfig& px = rc.pixel;
    json j;
    j["schema_version"] = rc.schema_version;
    j["vdd"] = px.vdd;
    j["ptm"] = {{"r_hrs", px.ptm.r_hrs}, {"r_lrs", px.ptm.r_lrs},   {"i_c_hlt", px.ptm.i_c_hlt},
                {"i_c_lht", px.ptm.i_c_lht}, {"l_ptm", px.ptm.l_ptm}, {"a_ptm", px.ptm.a_ptm}};
    j["x2"] = mosfet_json(px.x2);
    if (px.tc) {
        j["tc"] = {{"params", mosfet_json(px.tc->params)}, {"v_gt", px.tc->v_gt}};
    } else {
        j["tc"] = nullptr;
    }
    j["selector_r_on"] = px.selector_r_on;
    j["r_load"] = px.r_load;
    j["pd"] = {{"c_pd", px.pd.c_pd}, {"t_int", px.pd.t_int}, {"i_pd_max", px.pd.i_pd_max}};
    j["latch_mode"] = px.latch_mode == LatchMode::Latching ? "Latching" : "BistableStrict";

    json norm;
    if (rc.curve.norm.kind == NormalizationMode::Kind::PerCurveMinMax) {
        norm = {{"mode", "PerCurveMinMax"}};
    } else {
        norm = {{"mode", "FixedRange"}, {"lo", rc.curve.norm.lo}, {"hi", rc.curve.norm.hi}};
    }
    j["curve"] = {{"n", rc.curve.n}, {"normalization", norm}};
    j["baseline_3t"] = {{"reset_mode", rc.baseline.reset_mode == ResetMode::Soft ? "Soft" : "Hard"},
                        {"vth_x1", rc.baseline.vth_x1},
                        {"sf", mosfet_json(rc.baseline.sf)}};
    j["sweep"] = {{"r_lrs", rc.sweep.r_lrs}, {"r_hrs", rc.sweep.r_hrs}, {"ic_hlt", rc.sweep.ic_hlt},
                  {"v_gt", rc.sweep.v_gt}};
    const auto& v = rc.mc.variation;
    j["monte_carlo"] = {{"samples", rc.mc.samples},         {"seed", rc.mc.seed},
                        {"workers", rc.mc.workers},         {"sigma_r_hrs", v.sigma_r_hrs},
                        {"sigma_r_lrs", v.sigma_r_lrs},     {"sigma_i_c_hlt", v.sigma_i_c_hlt},
                        {"sigma_vth_x2", v.sigma_vth_x2}};
    j["transient"] = {{"n_steps", rc.transient.n_steps}, {"illum", rc.transient.illum}};
    return j.dump(2) + "\n";
}

}  // namespace ipfe
