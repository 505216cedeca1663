#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "ipfe/image.hpp"

namespace ipfe {

const char* to_string(PgmErrorKind kind) {
    switch (kind) {
        case PgmErrorKind::BadMagic: return "BadMagic";
        case PgmErrorKind::BadHeader: return "BadHeader";
        case PgmErrorKind::TruncatedData: return "TruncatedData";
        case PgmErrorKind::MaxvalTooLarge: return "MaxvalTooLarge";
    }
    return "PgmError";
}

namespace {

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool eof() const { return pos_ >= bytes_.size(); }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::uint8_t peek() const { return bytes_[pos_]; }
    std::uint8_t get() { return bytes_[pos_++]; }

    // Whitespace and '#' comments, as allowed between header tokens.
    void skip_separators() {
        while (!eof()) {
            const std::uint8_t c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n' && peek() != '\r') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    // Unsigned decimal token; -1 when no digits are present, -2 on overflow.
    long long number() {
        long long v = -1;
        while (!eof() && std::isdigit(peek())) {
            v = (v < 0 ? 0 : v) * 10 + (get() - '0');
            if (v > (1LL << 40)) return -2;
        }
        return v;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

long long header_value(Reader& r, const char* name) {
    r.skip_separators();
    if (r.eof()) throw PgmError(PgmErrorKind::BadHeader, std::string("missing ") + name);
    const long long v = r.number();
    if (v < 0) throw PgmError(PgmErrorKind::BadHeader, std::string("invalid ") + name);
    if (!r.eof() && !std::isspace(r.peek()) && r.peek() != '#')
        throw PgmError(PgmErrorKind::BadHeader, std::string("invalid ") + name);
    return v;
}

std::uint8_t rescale(long long v, long long maxval) {
    if (maxval == 255) return static_cast<std::uint8_t>(v);
    return static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 255.0 / static_cast<double>(maxval)));
}

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw PgmError(PgmErrorKind::BadMagic, "expected P2 or P5");
    const bool binary = bytes[1] == '5';

    Reader r(bytes.subspan(2));
    if (!r.eof() && !std::isspace(r.peek()) && r.peek() != '#')
        throw PgmError(PgmErrorKind::BadMagic, "expected P2 or P5");

    const long long width = header_value(r, "width");
    const long long height = header_value(r, "height");
    const long long maxval = header_value(r, "maxval");
    if (width < 1 || height < 1) throw PgmError(PgmErrorKind::BadHeader, "width and height must be >= 1");
    if (width * height > (1LL << 31)) throw PgmError(PgmErrorKind::BadHeader, "image too large");
    if (maxval < 1) throw PgmError(PgmErrorKind::BadHeader, "maxval must be >= 1");
    if (maxval > 255) throw PgmError(PgmErrorKind::MaxvalTooLarge, "maxval " + std::to_string(maxval) + " > 255");

    const auto count = static_cast<std::size_t>(width * height);
    std::vector<std::uint8_t> pixels(count);

    if (binary) {
        // exactly one whitespace byte separates maxval from the raster
        if (r.eof()) throw PgmError(PgmErrorKind::TruncatedData, "no raster data");
        r.get();
        if (r.remaining() < count)
            throw PgmError(PgmErrorKind::TruncatedData,
                           "expected " + std::to_string(count) + " bytes, found " + std::to_string(r.remaining()));
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint8_t v = r.get();
            if (v > maxval) throw PgmError(PgmErrorKind::BadHeader, "sample exceeds maxval");
            pixels[i] = rescale(v, maxval);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            r.skip_separators();
            if (r.eof())
                throw PgmError(PgmErrorKind::TruncatedData,
                               "expected " + std::to_string(count) + " samples, found " + std::to_string(i));
            const long long v = r.number();
            if (v < 0) throw PgmError(PgmErrorKind::BadHeader, "non-numeric sample");
            if (v > maxval) throw PgmError(PgmErrorKind::BadHeader, "sample exceeds maxval");
            pixels[i] = rescale(v, maxval);
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::vector<std::uint8_t> write_pgm(const GrayImage& image, PgmVariant variant) {
    std::string header = (variant == PgmVariant::P5 ? "P5\n" : "P2\n") + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (variant == PgmVariant::P5) {
        out.insert(out.end(), image.data.begin(), image.data.end());
        return out;
    }
    // ASCII raster: one image row per line, wrapped to stay under 70 columns
    std::string line;
    for (int y = 0; y < image.height; ++y) {
        line.clear();
        for (int x = 0; x < image.width; ++x) {
            const std::string tok = std::to_string(image.at(x, y));
            if (!line.empty() && line.size() + 1 + tok.size() > 70) {
                line += '\n';
                out.insert(out.end(), line.begin(), line.end());
                line.clear();
            }
            if (!line.empty()) line += ' ';
            line += tok;
        }
        line += '\n';
        out.insert(out.end(), line.begin(), line.end());
    }
    return out;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_pgm(bytes);
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& image, PgmVariant variant) {
    const auto bytes = write_pgm(image, variant);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace ipfe
