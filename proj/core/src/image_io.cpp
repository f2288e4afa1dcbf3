#include "nucleo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace nucleo {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw ValidationError("cannot open file: " + path);
    return f;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { if (png) png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() { if (png) png_destroy_write_struct(&png, &info); }
};

std::vector<std::uint16_t> read_png_gray(const std::string& path, int& width, int& height,
                                         int& bit_depth) {
    FilePtr f = open_file(path, "rb");
    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw PipelineError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw PipelineError("libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw ValidationError("corrupt PNG: " + path);

    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    bit_depth = png_get_bit_depth(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw ValidationError("expected single-channel grayscale PNG: " + path);
    if (bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(r.png);
        bit_depth = 8;
    }
    if (bit_depth == 16) png_set_swap(r.png);  // stored big-endian in PNG
    png_read_update_info(r.png, r.info);

    std::vector<std::uint16_t> pixels(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(height);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * (bit_depth / 8));
    for (int y = 0; y < height; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * width * (bit_depth / 8);
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    if (bit_depth == 8) {
        for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = raw[i];
    } else {
        std::memcpy(pixels.data(), raw.data(), pixels.size() * 2);
    }
    return pixels;
}

void write_png_gray(const std::string& path, int width, int height, int bit_depth,
                    const std::vector<std::uint16_t>& pixels) {
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw PipelineError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw PipelineError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw PipelineError("PNG write failed: " + path);

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    if (bit_depth == 8) {
        std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
        for (std::size_t i = 0; i < raw.size(); ++i)
            raw[i] = static_cast<std::uint8_t>(pixels[i]);
        std::vector<png_bytep> rows(height);
        for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * width;
        png_write_image(w.png, rows.data());
    } else {
        png_set_swap(w.png);
        std::vector<std::uint16_t> raw = pixels;
        std::vector<png_bytep> rows(height);
        for (int y = 0; y < height; ++y)
            rows[y] = reinterpret_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * width);
        png_write_image(w.png, rows.data());
    }
    png_write_end(w.png, nullptr);
}

// ---------------------------------------------------------------------------
// TIFF: minimal baseline reader. Supports single-strip-set, uncompressed,
// single-sample grayscale at 8 or 16 bits, either byte order.
// ---------------------------------------------------------------------------

struct TiffBuf {
    std::vector<std::uint8_t> data;
    bool little = true;

    std::uint16_t u16(std::size_t off) const {
        if (off + 2 > data.size()) throw ValidationError("truncated TIFF");
        return little ? static_cast<std::uint16_t>(data[off] | (data[off + 1] << 8))
                      : static_cast<std::uint16_t>((data[off] << 8) | data[off + 1]);
    }
    std::uint32_t u32(std::size_t off) const {
        if (off + 4 > data.size()) throw ValidationError("truncated TIFF");
        return little ? (std::uint32_t(data[off]) | (std::uint32_t(data[off + 1]) << 8) |
                         (std::uint32_t(data[off + 2]) << 16) | (std::uint32_t(data[off + 3]) << 24))
                      : ((std::uint32_t(data[off]) << 24) | (std::uint32_t(data[off + 1]) << 16) |
                         (std::uint32_t(data[off + 2]) << 8) | std::uint32_t(data[off + 3]));
    }
};

struct TiffField {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t value_off = 0;  // offset of the inline value area
};

std::uint32_t tiff_field_value(const TiffBuf& b, const TiffField& f, std::uint32_t index) {
    std::size_t elem = (f.type == 3) ? 2 : 4;  // SHORT or LONG
    std::size_t base = f.value_off;
    if (f.count * elem > 4) base = b.u32(f.value_off);
    std::size_t off = base + index * elem;
    return (f.type == 3) ? b.u16(off) : b.u32(off);
}

std::vector<std::uint16_t> read_tiff_gray(const std::string& path, int& width, int& height,
                                          int& bit_depth) {
    FilePtr f = open_file(path, "rb");
    TiffBuf b;
    std::fseek(f.get(), 0, SEEK_END);
    long size = std::ftell(f.get());
    std::fseek(f.get(), 0, SEEK_SET);
    b.data.resize(static_cast<std::size_t>(size));
    if (std::fread(b.data.data(), 1, b.data.size(), f.get()) != b.data.size())
        throw ValidationError("cannot read TIFF: " + path);

    if (b.data.size() < 8) throw ValidationError("truncated TIFF: " + path);
    if (b.data[0] == 'I' && b.data[1] == 'I') b.little = true;
    else if (b.data[0] == 'M' && b.data[1] == 'M') b.little = false;
    else throw ValidationError("not a TIFF file: " + path);
    if (b.u16(2) != 42) throw ValidationError("not a TIFF file: " + path);

    std::size_t ifd = b.u32(4);
    std::uint16_t nfields = b.u16(ifd);
    std::uint32_t w = 0, h = 0, bps = 8, spp = 1, compression = 1, rows_per_strip = 0xFFFFFFFF;
    TiffField strip_offsets, strip_counts;
    bool have_offsets = false, have_counts = false;

    for (std::uint16_t i = 0; i < nfields; ++i) {
        std::size_t e = ifd + 2 + std::size_t(i) * 12;
        std::uint16_t tag = b.u16(e);
        TiffField fld;
        fld.type = b.u16(e + 2);
        fld.count = b.u32(e + 4);
        fld.value_off = e + 8;
        switch (tag) {
            case 256: w = tiff_field_value(b, fld, 0); break;
            case 257: h = tiff_field_value(b, fld, 0); break;
            case 258: bps = tiff_field_value(b, fld, 0); break;
            case 259: compression = tiff_field_value(b, fld, 0); break;
            case 277: spp = tiff_field_value(b, fld, 0); break;
            case 278: rows_per_strip = tiff_field_value(b, fld, 0); break;
            case 273: strip_offsets = fld; have_offsets = true; break;
            case 279: strip_counts = fld; have_counts = true; break;
            default: break;
        }
    }

    if (w == 0 || h == 0 || !have_offsets || !have_counts)
        throw ValidationError("unsupported TIFF layout: " + path);
    if (compression != 1)
        throw ValidationError("only uncompressed TIFF is supported: " + path);
    if (spp != 1)
        throw ValidationError("expected single-channel TIFF: " + path);
    if (bps != 8 && bps != 16)
        throw ValidationError("expected 8-bit or 16-bit TIFF: " + path);

    width = static_cast<int>(w);
    height = static_cast<int>(h);
    bit_depth = static_cast<int>(bps);
    std::size_t bytes_per_px = bps / 8;

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(w) * h * bytes_per_px);
    std::uint32_t nstrips = strip_offsets.count;
    (void)rows_per_strip;
    for (std::uint32_t s = 0; s < nstrips; ++s) {
        std::size_t off = tiff_field_value(b, strip_offsets, s);
        std::size_t cnt = tiff_field_value(b, strip_counts, s);
        if (off + cnt > b.data.size()) throw ValidationError("truncated TIFF: " + path);
        raw.insert(raw.end(), b.data.begin() + off, b.data.begin() + off + cnt);
    }
    if (raw.size() < static_cast<std::size_t>(w) * h * bytes_per_px)
        throw ValidationError("truncated TIFF pixel data: " + path);

    std::vector<std::uint16_t> pixels(static_cast<std::size_t>(w) * h);
    if (bps == 8) {
        for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            std::size_t o = i * 2;
            pixels[i] = b.little ? static_cast<std::uint16_t>(raw[o] | (raw[o + 1] << 8))
                                 : static_cast<std::uint16_t>((raw[o] << 8) | raw[o + 1]);
        }
    }
    return pixels;
}

std::uint16_t quantize(double v, double maxval) {
    double c = std::min(1.0, std::max(0.0, v));
    return static_cast<std::uint16_t>(std::lround(c * maxval));
}

} // namespace

GrayImage load_gray_image(const std::string& path) {
    FilePtr probe = open_file(path, "rb");
    std::uint8_t magic[4] = {0, 0, 0, 0};
    std::size_t got = std::fread(magic, 1, 4, probe.get());
    probe.reset();
    if (got < 4) throw ValidationError("file too short: " + path);

    int width = 0, height = 0, bit_depth = 0;
    std::vector<std::uint16_t> pixels;
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
        pixels = read_png_gray(path, width, height, bit_depth);
    } else if ((magic[0] == 'I' && magic[1] == 'I') || (magic[0] == 'M' && magic[1] == 'M')) {
        pixels = read_tiff_gray(path, width, height, bit_depth);
    } else {
        throw ValidationError("unrecognized image format (expected PNG or TIFF): " + path);
    }

    GrayImage img(width, height);
    double maxval = (bit_depth == 16) ? 65535.0 : 255.0;
    for (std::size_t i = 0; i < pixels.size(); ++i) img.values[i] = pixels[i] / maxval;
    return img;
}

void save_png_gray8(const std::string& path, const GrayImage& img) {
    std::vector<std::uint16_t> px(img.values.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(img.values[i], 255.0);
    write_png_gray(path, img.width, img.height, 8, px);
}

void save_png_gray16(const std::string& path, const GrayImage& img) {
    std::vector<std::uint16_t> px(img.values.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(img.values[i], 65535.0);
    write_png_gray(path, img.width, img.height, 16, px);
}

void save_label_png(const std::string& path, const InstanceLabelMap& map) {
    if (map.max_label() > 65535)
        throw PipelineError("label map has more than 65535 instances");
    std::vector<std::uint16_t> px(map.labels.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint16_t>(map.labels[i]);
    write_png_gray(path, map.width, map.height, 16, px);
}

InstanceLabelMap load_label_png(const std::string& path) {
    int width = 0, height = 0, bit_depth = 0;
    std::vector<std::uint16_t> px = read_png_gray(path, width, height, bit_depth);
    InstanceLabelMap map(width, height);
    for (std::size_t i = 0; i < px.size(); ++i) map.labels[i] = px[i];
    return map;
}

void save_png_rgb8(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw ValidationError("RGB buffer size does not match dimensions");
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw PipelineError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw PipelineError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw PipelineError("PNG write failed: " + path);

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, width, height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_bytep> rows(height);
    std::vector<std::uint8_t> raw = rgb;
    for (int y = 0; y < height; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * width * 3;
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

} // namespace nucleo
