#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipfe/circuit.hpp"
#include "ipfe/curve.hpp"
#include "ipfe/monte_carlo.hpp"

namespace ipfe {

inline constexpr int kSchemaVersion = 1;

struct CurveSettings {
    int n = 256;
    NormalizationMode norm;

    bool operator==(const CurveSettings&) const = default;
};

/// Default value lists for the sweep subcommands.
struct SweepSettings {
    std::vector<double> r_lrs{10e3, 15e3, 20e3, 30e3, 40e3};
    std::vector<double> r_hrs{60e3, 70e3, 80e3, 90e3, 100e3};
    std::vector<double> ic_hlt{3e-6, 3.5e-6, 4e-6, 4.5e-6, 5e-6};
    std::vector<double> v_gt{0.30, 0.38, 0.385, 0.388, 0.389, 0.390};

    bool operator==(const SweepSettings&) const = default;
};

struct McSettings {
    VariationSpec variation;
    std::uint64_t samples = 500;
    std::uint64_t seed = 42;
    unsigned workers = 1;

    bool operator==(const McSettings&) const = default;
};

struct TransientSettings {
    int n_steps = 256;
    double illum = 1.0;

    bool operator==(const TransientSettings&) const = default;
};

/// Everything a CLI run needs, loaded from one JSON document. The 3-T
/// baseline shares vdd and the photodiode with the pixel.
struct RunConfig {
    int schema_version = kSchemaVersion;
    PixelConfig pixel = ref_a_config();
    CurveSettings curve;
    ThreeTConfig baseline;
    SweepSettings sweep;
    McSettings mc;
    TransientSettings transient;

    bool operator==(const RunConfig&) const = default;
};

enum class ConfigErrorKind { SyntaxError, UnknownKey, InvalidValue };

class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind, std::string path, const std::string& reason);

    ConfigErrorKind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }

private:
    ConfigErrorKind kind_;
    std::string path_;
};

/// Strict parse: unknown keys are rejected, omitted optional fields take the
/// ref-A defaults, every invariant is checked. Error messages carry the full
/// dotted key path of the first violation.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with all defaults filled in; byte-stable for equal inputs.
std::string serialize_config(const RunConfig& config);

}  // namespace ipfe
