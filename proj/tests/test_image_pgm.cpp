#include <ipfe/curve.hpp>
#include <ipfe/error.hpp>
#include <ipfe/image.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <string>

using namespace ipfe;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

GrayImage all_codes() {
    std::vector<std::uint8_t> px(256);
    std::iota(px.begin(), px.end(), 0);
    return GrayImage(16, 16, px);
}

PgmErrorKind error_of(const std::string& text) {
    try {
        read_pgm(bytes(text));
    } catch (const PgmError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for: " << text;
    return PgmErrorKind::BadMagic;
}

}  // namespace

TEST(Pgm, SmallestP5) {
    const auto out = write_pgm(GrayImage(1, 1, 0), PgmVariant::P5);
    auto expected = bytes("P5\n1 1\n255\n");
    expected.push_back(0);
    EXPECT_EQ(out, expected);
}

TEST(Pgm, RoundTripsAreByteLossless) {
    const auto img = all_codes();
    for (auto v : {PgmVariant::P2, PgmVariant::P5}) {
        const auto b = write_pgm(img, v);
        const auto back = read_pgm(b);
        EXPECT_EQ(back, img);
        EXPECT_EQ(write_pgm(back, v), b);
        EXPECT_EQ(write_pgm(img, v), b);
    }
}

TEST(Pgm, P2AndP5AgreeWithComments) {
    const auto p2 = read_pgm(bytes("P2\n# a comment\n3 1 # trailing\n255\n0 128\n255\n"));
    auto raw = bytes("P5 3\n#c\n1 255\n");
    raw.insert(raw.end(), {0, 128, 255});
    EXPECT_EQ(p2, read_pgm(raw));
    EXPECT_EQ(p2.data, (std::vector<std::uint8_t>{0, 128, 255}));
}

TEST(Pgm, SmallMaxvalIsRescaled) {
    const auto img = read_pgm(bytes("P2 3 1 15 0 7 15"));
    EXPECT_EQ(img.data, (std::vector<std::uint8_t>{0, 119, 255}));
}

TEST(Pgm, P2LinesStayShort) {
    GrayImage img(200, 2, 255);
    const auto b = write_pgm(img, PgmVariant::P2);
    std::size_t col = 0;
    for (auto c : b) {
        col = c == '\n' ? 0 : col + 1;
        EXPECT_LE(col, 70u);
    }
}

TEST(Pgm, ErrorTaxonomy) {
    EXPECT_EQ(error_of("P3\n1 1\n255\n0\n"), PgmErrorKind::BadMagic);
    EXPECT_EQ(error_of(""), PgmErrorKind::BadMagic);
    EXPECT_EQ(error_of("P55 1 1 255 0"), PgmErrorKind::BadMagic);
    EXPECT_EQ(error_of("P2\n1\n"), PgmErrorKind::BadHeader);
    EXPECT_EQ(error_of("P2\nx 1 255\n0\n"), PgmErrorKind::BadHeader);
    EXPECT_EQ(error_of("P2\n0 1 255\n"), PgmErrorKind::BadHeader);
    EXPECT_EQ(error_of("P2\n1 1 0\n0\n"), PgmErrorKind::BadHeader);
    EXPECT_EQ(error_of("P2\n2 1 100\n0 101\n"), PgmErrorKind::BadHeader);
    EXPECT_EQ(error_of("P2\n1 1 65535\n0\n"), PgmErrorKind::MaxvalTooLarge);
    EXPECT_EQ(error_of("P5\n2 2\n255\n\x01\x02"), PgmErrorKind::TruncatedData);
    EXPECT_EQ(error_of("P5\n2 2\n255"), PgmErrorKind::TruncatedData);
    EXPECT_EQ(error_of("P2\n2 2\n255\n1 2 3"), PgmErrorKind::TruncatedData);
}

TEST(Lut, IdentityAndConstant) {
    const auto img = all_codes();
    EXPECT_EQ(apply_lut(img, identity_lut()), img);
    std::vector<int> seven(256, 7);
    const auto out = apply_lut(img, make_lut(seven));
    for (auto v : out.data) EXPECT_EQ(v, 7);
    EXPECT_THROW(make_lut(std::vector<int>(255, 0)), SimError);
    EXPECT_THROW(make_lut(std::vector<int>(256, 256)), SimError);
}

TEST(Lut, RefASuppressesBackground) {
    const auto tc = extract_curve(ref_a_config());
    const auto out = apply_lut(GrayImage(1, 1, 131), make_lut(tc.lut));
    EXPECT_LE(out.data[0], 40);
}

TEST(Histogram, ConstantAndSynthetic) {
    const auto h = histogram(GrayImage(4, 4, 9));
    EXPECT_EQ(h.bins[9], 16u);
    EXPECT_EQ(h.l_min, 9);
    EXPECT_EQ(h.l_max, 9);
    const auto s = histogram(synth_low_contrast(64, 64, 131, 176, 3));
    EXPECT_EQ(s.l_min, 131);
    EXPECT_EQ(s.l_max, 176);
    EXPECT_EQ(std::accumulate(s.bins.begin(), s.bins.end(), std::uint64_t{0}), 64u * 64u);
}

TEST(Contrast, MichelsonValues) {
    EXPECT_NEAR(michelson_cr(131, 176), 45.0 / 307.0, 1e-12);
    EXPECT_NEAR(michelson_cr(131, 176), 0.1466, 1e-4);
    EXPECT_NEAR(michelson_cr(14, 255), 241.0 / 269.0, 1e-12);
    EXPECT_NEAR(michelson_cr(14, 255), 0.8959, 1e-4);
    EXPECT_EQ(michelson_cr(0, 0), 0.0);
    EXPECT_EQ(michelson_cr(GrayImage(3, 3, 200)), 0.0);
}

TEST(Contrast, EnhancementReport) {
    const auto before = synth_low_contrast(8, 8, 131, 176, 1);
    const auto after = synth_low_contrast(8, 8, 14, 255, 1);
    const auto r = enhancement_report(before, after);
    EXPECT_NEAR(r.improvement, (241.0 / 269.0) / (45.0 / 307.0), 1e-12);
    EXPECT_NEAR(r.improvement, 6.11, 0.01);
    EXPECT_EQ(r.l_min_before, 131);
    EXPECT_EQ(r.l_max_after, 255);
    EXPECT_DOUBLE_EQ(enhancement_report(before, before).improvement, 1.0);
    try {
        enhancement_report(GrayImage(8, 8, 5), after);
        FAIL();
    } catch (const SimError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroBaseContrast);
    }
}

TEST(Synth, RangeAndDeterminism) {
    const auto a = synth_low_contrast(32, 16, 131, 176, 42);
    EXPECT_EQ(a, synth_low_contrast(32, 16, 131, 176, 42));
    EXPECT_NE(a, synth_low_contrast(32, 16, 131, 176, 43));
    for (auto v : a.data) {
        EXPECT_GE(v, 131);
        EXPECT_LE(v, 176);
    }
    EXPECT_EQ(a.data[0], 131);
    EXPECT_EQ(a.data[1], 176);
    EXPECT_THROW(synth_low_contrast(4, 4, 200, 100, 1), SimError);
}

TEST(Json, Formats) {
    const auto h = histogram(GrayImage(1, 1, 3));
    const auto hj = histogram_json(h);
    EXPECT_EQ(hj.rfind("{\"bins\":[0,0,0,1,", 0), 0u);
    EXPECT_NE(hj.find("\"l_min\":3"), std::string::npos);
    EXPECT_NE(hj.find("\"cr\":0.000000"), std::string::npos);
    ContrastReport r;
    r.cr_before = 0.5;
    r.cr_after = 0.75;
    r.improvement = 1.5;
    EXPECT_EQ(report_json(r), "{\"cr_before\":0.500000,\"cr_after\":0.750000,\"improvement\":1.500000}");
}
