#include "ipfe/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "ipfe/error.hpp"

namespace ipfe {

void VariationSpec::validate() const {
    for (double s : {sigma_r_hrs, sigma_r_lrs, sigma_i_c_hlt, sigma_vth_x2}) {
        if (!(std::isfinite(s) && s >= 0.0))
            throw SimError(ErrorKind::InvalidParamValue, "variation sigmas must be finite and >= 0");
    }
}

namespace {

class Substream {
public:
    Substream(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        rng_.seed(seq);
    }

    // Standard normal truncated to +-kTruncationSigmas by redrawing.
    double truncated_normal() {
        for (int i = 0; i < kMaxRedraws; ++i) {
            const double z = normal_(rng_);
            if (std::abs(z) <= kTruncationSigmas) return z;
        }
        throw SimError(ErrorKind::ResampleExhausted, "truncated normal draw");
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

}  // namespace

PixelConfig sample_variant(const PixelConfig& nominal, const VariationSpec& spec, std::uint64_t index,
                           std::uint64_t seed) {
    spec.validate();
    Substream stream(seed, index);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        PixelConfig c = nominal;
        c.ptm.r_hrs = nominal.ptm.r_hrs * (1.0 + spec.sigma_r_hrs * stream.truncated_normal());
        c.ptm.r_lrs = nominal.ptm.r_lrs * (1.0 + spec.sigma_r_lrs * stream.truncated_normal());
        c.ptm.i_c_hlt = nominal.ptm.i_c_hlt * (1.0 + spec.sigma_i_c_hlt * stream.truncated_normal());
        c.x2.vth = nominal.x2.vth + spec.sigma_vth_x2 * stream.truncated_normal();
        try {
            c.validate();
            return c;
        } catch (const SimError&) {
            // redraw the whole set
        }
    }
    throw SimError(ErrorKind::ResampleExhausted,
                   "no valid parameter set after " + std::to_string(kMaxRedraws) + " redraws");
}

namespace {

McRow run_row(const PixelConfig& nominal, const VariationSpec& spec, std::uint64_t index, std::uint64_t seed,
              const GrayImage& image, const McOptions& opts) {
    McRow row;
    row.index = index;
    row.r_hrs = row.r_lrs = row.i_c_hlt = row.vth_x2 = std::nan("");
    try {
        const PixelConfig c = sample_variant(nominal, spec, index, seed);
        row.r_hrs = c.ptm.r_hrs;
        row.r_lrs = c.ptm.r_lrs;
        row.i_c_hlt = c.ptm.i_c_hlt;
        row.vth_x2 = c.x2.vth;
        const TransferCurve curve = extract_curve(c, opts.curve_points, opts.norm);
        row.cr = michelson_cr(apply_lut(image, make_lut(curve.lut)));
        row.ok = true;
        row.status = "ok";
    } catch (const SimError& e) {
        row.ok = false;
        row.status = to_string(e.kind());
    }
    return row;
}

}  // namespace

std::vector<McRow> run_monte_carlo(const PixelConfig& nominal, const VariationSpec& spec, std::size_t n,
                                   std::uint64_t seed, const GrayImage& image, const McOptions& opts) {
    spec.validate();
    nominal.validate();
    if (opts.curve_points != 256)
        throw SimError(ErrorKind::InvalidParamValue, "image scoring needs 256-point curves");

    std::vector<McRow> rows(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) rows[i] = run_row(nominal, spec, i, seed, image, opts);
        return rows;
    }

    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) rows[i] = run_row(nominal, spec, i, seed, image, opts);
            });
        }
    }
    return rows;
}

McSummary mc_summary(std::span<const McRow> rows) {
    McSummary s;
    double sum = 0.0;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        if (s.n == 0) {
            s.cr_min = s.cr_max = r.cr;
        } else {
            s.cr_min = std::min(s.cr_min, r.cr);
            s.cr_max = std::max(s.cr_max, r.cr);
        }
        sum += r.cr;
        ++s.n;
    }
    if (s.n == 0) throw SimError(ErrorKind::NoSuccessfulRows, "no successful Monte-Carlo rows");
    s.cr_mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (const auto& r : rows) {
        if (r.ok) ss += (r.cr - s.cr_mean) * (r.cr - s.cr_mean);
    }
    s.cr_std = std::sqrt(ss / static_cast<double>(s.n));
    // keep min <= mean <= max under rounding when all values coincide
    s.cr_mean = std::clamp(s.cr_mean, s.cr_min, s.cr_max);
    return s;
}

void write_mc_csv(std::ostream& os, std::span<const McRow> rows) {
    os << "index,r_hrs_ohm,r_lrs_ohm,ic_hlt_a,vth_x2_v,cr,status\n";
    char buf[256];
    for (const auto& r : rows) {
        if (r.ok) {
            std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%s\n",
                          static_cast<unsigned long long>(r.index), r.r_hrs, r.r_lrs, r.i_c_hlt, r.vth_x2, r.cr,
                          r.status.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.9g,%.9g,,%s\n", static_cast<unsigned long long>(r.index),
                          r.r_hrs, r.r_lrs, r.i_c_hlt, r.vth_x2, r.status.c_str());
        }
        os << buf;
    }
}

std::string summary_json(const McSummary& s) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "{\"n\":%zu,\"cr_min\":%.6f,\"cr_max\":%.6f,\"cr_mean\":%.6f,\"cr_std\":%.6f}", s.n,
                  s.cr_min, s.cr_max, s.cr_mean, s.cr_std);
    return buf;
}

}  // namespace ipfe
