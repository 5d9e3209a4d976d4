#include "m2sdf/imagecore/image_io.hpp"

#include "m2sdf/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace m2sdf::imagecore {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    return f;
}

// libpng is C; errors unwind through png_longjmp, never through C++ exceptions.
void png_error_handler(png_structp png, png_const_charp msg) {
    auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
    if (slot) *slot = msg;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

float luma(double r, double g, double b) { return static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b); }

Image load_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png) throw FormatError("png: cannot allocate reader");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    std::vector<unsigned char> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0, depth = 0;
    if (setjmp(png_jmpbuf(png))) throw FormatError("png: " + message + " in '" + path.string() + "'");

    png_init_io(png, f.get());
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
    png_read_update_info(png, info);

    channels = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());

    const double maxval = depth == 16 ? 65535.0 : 255.0;
    auto sample = [&](png_uint_32 y, png_uint_32 x, int c) -> double {
        const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
        if (depth == 16) {
            std::uint16_t v;
            std::memcpy(&v, rows[y] + idx * 2, 2);
            return v / maxval;
        }
        return rows[y][idx] / maxval;
    };

    std::vector<float> data(static_cast<std::size_t>(width) * height);
    const bool gray = channels <= 2;
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            data[static_cast<std::size_t>(y) * width + x] =
                gray ? static_cast<float>(sample(y, x, 0)) : luma(sample(y, x, 0), sample(y, x, 1), sample(y, x, 2));
        }
    }
    return Image(static_cast<int>(height), static_cast<int>(width), std::move(data));
}

std::string next_pgm_token(std::istream& in) {
    std::string tok;
    while (in) {
        int c = in.peek();
        if (c == '#') {
            std::string skip;
            std::getline(in, skip);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    in >> tok;
    return tok;
}

Image load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    if (next_pgm_token(in) != "P5") throw FormatError("unsupported PGM variant (only binary P5 is read)");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_pgm_token(in));
        height = std::stoi(next_pgm_token(in));
        maxval = std::stoi(next_pgm_token(in));
    } catch (const std::exception&) {
        throw FormatError("PGM: malformed header in '" + path.string() + "'");
    }
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw FormatError("PGM: invalid header values");
    in.get();  // single whitespace before raster

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw FormatError("PGM: truncated raster");

    std::vector<float> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        // 16-bit PGM samples are big-endian
        const unsigned v = bytes == 2 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
        data[i] = static_cast<float>(static_cast<double>(v) / maxval);
    }
    return Image(height, width, std::move(data));
}

}  // namespace

unsigned char quantize_8bit(float intensity) noexcept {
    const double v = std::floor(static_cast<double>(intensity) * 255.0 + 0.5);
    return static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open '" + path.string() + "'");
    std::array<unsigned char, 8> sig{};
    probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
    const auto got = static_cast<std::size_t>(probe.gcount());
    probe.close();

    if (got == sig.size() && png_sig_cmp(sig.data(), 0, sig.size()) == 0) return load_png(path);
    if (got >= 2 && sig[0] == 'P') {
        if (sig[1] == '5') return load_pgm(path);
        throw FormatError(std::string("unsupported format: PNM variant P") + static_cast<char>(sig[1]));
    }
    throw FormatError("unsupported format in '" + path.string() + "' (expected PNG or PGM)");
}

void save_image(const Image& image, const std::filesystem::path& path) {
    if (image.empty()) throw ArgumentError("cannot save an empty image");
    FilePtr f = open_file(path, "wb");
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png) throw IoError("png: cannot allocate writer");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    std::vector<unsigned char> row(static_cast<std::size_t>(image.width()));
    if (setjmp(png_jmpbuf(png))) throw IoError("png: " + message + " writing '" + path.string() + "'");

    png_init_io(png, f.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) row[x] = quantize_8bit(image.at(y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    if (std::fflush(f.get()) != 0) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace m2sdf::imagecore
