#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

#include "ipfe/error.hpp"
#include "ipfe/image.hpp"

namespace ipfe {

namespace {

void check_dims(int w, int h) {
    if (w < 1 || h < 1) throw SimError(ErrorKind::InvalidParamValue, "image dimensions must be >= 1");
}

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    check_dims(w, h);
    data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> pixels) : width(w), height(h), data(std::move(pixels)) {
    check_dims(w, h);
    if (data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
        throw SimError(ErrorKind::InvalidParamValue, "pixel count does not match width * height");
}

Lut make_lut(std::span<const int> codes) {
    if (codes.size() != 256) throw SimError(ErrorKind::InvalidParamValue, "LUT needs exactly 256 entries");
    Lut lut{};
    for (std::size_t i = 0; i < 256; ++i) {
        if (codes[i] < 0 || codes[i] > 255) throw SimError(ErrorKind::InvalidParamValue, "LUT code out of range");
        lut[i] = static_cast<std::uint8_t>(codes[i]);
    }
    return lut;
}

Lut identity_lut() {
    Lut lut{};
    for (std::size_t i = 0; i < 256; ++i) lut[i] = static_cast<std::uint8_t>(i);
    return lut;
}

GrayImage apply_lut(const GrayImage& image, const Lut& lut) {
    GrayImage out = image;
    std::transform(image.data.begin(), image.data.end(), out.data.begin(), [&](std::uint8_t v) { return lut[v]; });
    return out;
}

Histogram histogram(const GrayImage& image) {
    Histogram h;
    for (std::uint8_t v : image.data) ++h.bins[v];
    int lo = 0;
    while (lo < 255 && h.bins[lo] == 0) ++lo;
    int hi = 255;
    while (hi > 0 && h.bins[hi] == 0) --hi;
    h.l_min = lo;
    h.l_max = hi;
    return h;
}

double michelson_cr(int l_min, int l_max) {
    const int sum = l_max + l_min;
    if (sum == 0) return 0.0;
    return static_cast<double>(l_max - l_min) / static_cast<double>(sum);
}

double michelson_cr(const Histogram& hist) { return michelson_cr(hist.l_min, hist.l_max); }

double michelson_cr(const GrayImage& image) { return michelson_cr(histogram(image)); }

ContrastReport enhancement_report(const GrayImage& before, const GrayImage& after) {
    if (before.width != after.width || before.height != after.height)
        throw SimError(ErrorKind::InvalidParamValue, "images differ in size");
    const Histogram hb = histogram(before);
    const Histogram ha = histogram(after);
    ContrastReport r;
    r.l_min_before = hb.l_min;
    r.l_max_before = hb.l_max;
    r.l_min_after = ha.l_min;
    r.l_max_after = ha.l_max;
    r.cr_before = michelson_cr(hb);
    r.cr_after = michelson_cr(ha);
    if (r.cr_before <= 0.0) throw SimError(ErrorKind::ZeroBaseContrast, "source image has zero contrast");
    r.improvement = r.cr_after / r.cr_before;
    return r;
}

GrayImage synth_low_contrast(int width, int height, int l_min, int l_max, std::uint64_t seed) {
    if (!(0 <= l_min && l_min <= l_max && l_max <= 255))
        throw SimError(ErrorKind::InvalidParamValue, "need 0 <= l_min <= l_max <= 255");
    GrayImage img(width, height);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(l_min, l_max);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(dist(rng));
    img.data[0] = static_cast<std::uint8_t>(l_min);
    if (img.data.size() > 1) img.data[1] = static_cast<std::uint8_t>(l_max);
    return img;
}

std::string histogram_json(const Histogram& hist) {
    std::string s = "{\"bins\":[";
    for (std::size_t i = 0; i < hist.bins.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(hist.bins[i]);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "],\"l_min\":%d,\"l_max\":%d,\"cr\":%.6f}", hist.l_min, hist.l_max,
                  michelson_cr(hist));
    return s + buf;
}

std::string report_json(const ContrastReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "{\"cr_before\":%.6f,\"cr_after\":%.6f,\"improvement\":%.6f}", report.cr_before,
                  report.cr_after, report.improvement);
    return buf;
}

}  // namespace ipfe
