#include "fcmdnn/image_io.hpp"

#include "fcmdnn/error.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace fcmdnn {
namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw Error(ErrorKind::ingestion, path.string() + ": " + what);
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    return token;
}

int pgm_int(std::istream& in, const std::filesystem::path& path, const char* field) {
    const std::string token = pgm_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        fail(path, std::string("bad PGM ") + field + " '" + token + "'");
    }
}

struct PngHandles {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngHandles() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

} // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    const std::string magic = pgm_token(in);
    if (magic != "P5" && magic != "P2") fail(path, "not a PGM file");

    GrayImage image;
    image.width = pgm_int(in, path, "width");
    image.height = pgm_int(in, path, "height");
    const int maxval = pgm_int(in, path, "maxval");
    if (image.width <= 0 || image.height <= 0) fail(path, "non-positive dimensions");
    if (maxval <= 0 || maxval > 255) fail(path, "only 8-bit PGM is supported");

    const auto count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    image.pixels.resize(count);
    if (magic == "P5") {
        // pgm_token consumed exactly one whitespace byte after maxval.
        in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) fail(path, "truncated pixel data");
    } else {
        for (auto& px : image.pixels) {
            const int v = pgm_int(in, path, "pixel");
            if (v < 0 || v > maxval) fail(path, "pixel out of range");
            px = static_cast<std::uint8_t>(v);
        }
    }
    for (const auto px : image.pixels) {
        if (px > maxval) fail(path, "pixel exceeds maxval");
    }
    return image;
}

GrayImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) fail(path, "cannot open");

    PngHandles h;
    h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) fail(path, "libpng initialisation failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) fail(path, "libpng initialisation failed");

    GrayImage image;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(h.png))) {
        fail(path, "corrupt PNG");
    }
    png_init_io(h.png, file.get());
    png_read_info(h.png, h.info);

    const auto color = png_get_color_type(h.png, h.info);
    const auto depth = png_get_bit_depth(h.png, h.info);
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
        fail(path, "PNG is not grayscale");
    }
    if (depth == 16) fail(path, "16-bit PNG is not supported");
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(h.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(h.png);
    png_read_update_info(h.png, h.info);

    image.width = static_cast<int>(png_get_image_width(h.png, h.info));
    image.height = static_cast<int>(png_get_image_height(h.png, h.info));
    image.pixels.resize(static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height));
    rows.resize(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = image.pixels.data() + static_cast<std::size_t>(y) * image.width;
    }
    png_read_image(h.png, rows.data());
    png_read_end(h.png, nullptr);
    return image;
}

GrayImage read_image(const std::filesystem::path& path) {
    std::array<unsigned char, 8> sig{};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(path, "cannot open");
        in.read(reinterpret_cast<char*>(sig.data()), sig.size());
        if (in.gcount() < 2) fail(path, "file too short");
    }
    if (png_sig_cmp(sig.data(), 0, sig.size()) == 0) return read_png(path);
    if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return read_pgm(path);
    fail(path, "unrecognised image format");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

} // namespace fcmdnn
