#include "sr/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sr/errors.hpp"

namespace sr {

namespace {

namespace fs = std::filesystem;

struct FileCloser {
    std::FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

bool has_png_magic(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char magic[8] = {};
    in.read(reinterpret_cast<char*>(magic), 8);
    return in.gcount() == 8 && !png_sig_cmp(magic, 0, 8);
}

RgbImage read_png_rgb(const fs::path& path) {
    FileCloser file{std::fopen(path.string().c_str(), "rb")};
    if (!file.f) throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    RgbImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("malformed PNG: " + path.string());
    }
    png_init_io(png, file.f);
    png_read_info(png, info);

    png_set_expand(png);      // palette -> rgb, gray<8 -> 8, tRNS -> alpha
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.depth = 1;
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unexpected PNG row layout: " + path.string());
    }
    img.data.resize(img.pixel_count() * 3);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

int ppm_next_int(std::istream& in) {
    // Skips whitespace and '#' comments, per the PPM header grammar.
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c != EOF && std::isspace(static_cast<unsigned char>(c))) {
            in.get();
        } else {
            break;
        }
    }
    int v = -1;
    in >> v;
    return in ? v : -1;
}

RgbImage read_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '6') throw IoError("not a binary PPM (P6): " + path.string());
    const int w = ppm_next_int(in);
    const int h = ppm_next_int(in);
    const int maxval = ppm_next_int(in);
    if (w <= 0 || h <= 0) throw IoError("bad PPM header: " + path.string());
    if (maxval != 255) throw IoError("unsupported PPM maxval (want 255): " + path.string());
    in.get();  // single whitespace after maxval

    RgbImage img;
    img.width = w;
    img.height = h;
    img.depth = 1;
    img.data.resize(img.pixel_count() * 3);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
        throw IoError("truncated PPM: " + path.string());
    }
    return img;
}

std::vector<fs::path> sorted_slices(const fs::path& dir,
                                    std::initializer_list<const char*> exts) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        for (const char* e : exts) {
            if (ext == e) {
                files.push_back(entry.path());
                break;
            }
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no slices found in " + dir.string());
    return files;
}

void write_png_rgb(const RgbImage& img, const fs::path& path) {
    FileCloser file{std::fopen(path.string().c_str(), "wb")};
    if (!file.f) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path.string());
    }
    png_init_io(png, file.f);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(
                               img.data.data() +
                               static_cast<std::size_t>(y) * img.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_png_gray16(std::span<const std::int32_t> ids, int w, int h,
                      const fs::path& path) {
    FileCloser file{std::fopen(path.string().c_str(), "wb")};
    if (!file.f) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path.string());
    }
    png_init_io(png, file.f);
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int32_t v = ids[static_cast<std::size_t>(y) * w + x];
            row[2 * x] = static_cast<unsigned char>((v >> 8) & 0xff);
            row[2 * x + 1] = static_cast<unsigned char>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

LabelMap read_png_gray(const fs::path& path) {
    FileCloser file{std::fopen(path.string().c_str(), "rb")};
    if (!file.f) throw IoError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    LabelMap map;
    std::vector<unsigned char> raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("malformed PNG: " + path.string());
    }
    png_init_io(png, file.f);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("label map PNG must be grayscale: " + path.string());
    }
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    const int depth = png_get_bit_depth(png, info);

    map.width = static_cast<int>(png_get_image_width(png, info));
    map.height = static_cast<int>(png_get_image_height(png, info));
    map.depth = 1;
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.resize(stride * map.height);
    rows.resize(map.height);
    for (int y = 0; y < map.height; ++y) rows[y] = raw.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    map.ids.resize(static_cast<std::size_t>(map.width) * map.height);
    for (int y = 0; y < map.height; ++y) {
        const unsigned char* src = raw.data() + stride * y;
        for (int x = 0; x < map.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * map.width + x;
            map.ids[i] = depth == 16
                             ? static_cast<std::int32_t>(src[2 * x]) << 8 |
                                   static_cast<std::int32_t>(src[2 * x + 1])
                             : static_cast<std::int32_t>(src[x]);
        }
    }
    return map;
}

void write_csv(std::span<const std::int32_t> ids, int w, int h,
               const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x) out << ',';
            out << ids[static_cast<std::size_t>(y) * w + x];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

LabelMap read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    LabelMap map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                map.ids.push_back(std::stoi(cell));
            } catch (const std::exception&) {
                throw IoError("bad CSV cell '" + cell + "' in " + path.string());
            }
            ++count;
        }
        if (map.width == 0) {
            map.width = count;
        } else if (count != map.width) {
            throw IoError("ragged CSV rows in " + path.string());
        }
        ++map.height;
    }
    if (map.width == 0 || map.height == 0) throw IoError("empty CSV: " + path.string());
    map.depth = 1;
    return map;
}

std::vector<std::int32_t> densify(std::span<const std::int32_t> ids) {
    std::vector<std::int32_t> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    // Keep ids that are already dense untouched so Rag round-trips are exact.
    bool dense = true;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<std::int32_t>(i)) {
            dense = false;
            break;
        }
    }
    std::vector<std::int32_t> out(ids.size());
    if (dense) {
        std::copy(ids.begin(), ids.end(), out.begin());
        return out;
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out[i] = static_cast<std::int32_t>(
            std::lower_bound(sorted.begin(), sorted.end(), ids[i]) - sorted.begin());
    }
    return out;
}

std::vector<std::uint8_t> boundary_mask_2d(std::span<const std::int32_t> ids, int w,
                                           int h) {
    std::vector<std::uint8_t> mask(ids.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const std::int32_t v = ids[p];
            if ((x + 1 < w && ids[p + 1] != v) || (x > 0 && ids[p - 1] != v) ||
                (y + 1 < h && ids[p + w] != v) || (y > 0 && ids[p - w] != v)) {
                mask[p] = 1;
            }
        }
    }
    return mask;
}

}  // namespace

RgbImage read_image(const fs::path& path) {
    if (fs::is_directory(path)) {
        const auto slices = sorted_slices(path, {".png", ".ppm"});
        RgbImage vol = read_image(slices[0]);
        vol.depth = static_cast<int>(slices.size());
        vol.data.reserve(vol.pixel_count() * 3);
        for (std::size_t z = 1; z < slices.size(); ++z) {
            RgbImage slice = read_image(slices[z]);
            if (slice.width != vol.width || slice.height != vol.height) {
                throw IoError("slice dimensions differ in " + path.string());
            }
            vol.data.insert(vol.data.end(), slice.data.begin(), slice.data.end());
        }
        return vol;
    }
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
    if (has_png_magic(path)) return read_png_rgb(path);

    std::ifstream probe(path, std::ios::binary);
    char m[2] = {};
    probe.read(m, 2);
    if (m[0] == 'P' && m[1] == '6') return read_ppm(path);
    throw IoError("unsupported image format (want PNG or binary PPM): " +
                  path.string());
}

void write_image(const RgbImage& img, const fs::path& path) {
    if (img.depth != 1) throw ConfigError("write_image supports 2D images only");
    write_png_rgb(img, path);
}

void write_label_map(std::span<const std::int32_t> ids, int width, int height,
                     int depth, const fs::path& path) {
    if (ids.size() != static_cast<std::size_t>(width) * height * depth) {
        throw ConfigError("label map size does not match its dimensions");
    }
    const std::vector<std::int32_t> dense = densify(ids);
    const std::int32_t max_id =
        dense.empty() ? 0 : *std::max_element(dense.begin(), dense.end());

    const std::size_t plane = static_cast<std::size_t>(width) * height;
    if (depth > 1) {
        if (max_id > 65535) {
            throw IoError("more than 65536 regions cannot be written as 16-bit "
                          "PNG slices; write per-slice CSV label maps instead");
        }
        fs::create_directories(path);
        for (int z = 0; z < depth; ++z) {
            char name[32];
            std::snprintf(name, sizeof(name), "slice_%05d.png", z);
            write_png_gray16({dense.data() + plane * z, plane}, width, height,
                             path / name);
        }
        return;
    }
    if (path.extension() == ".csv") {
        write_csv(dense, width, height, path);
        return;
    }
    if (max_id > 65535) {
        throw IoError("more than 65536 regions cannot be written as a 16-bit "
                      "grayscale PNG; use a .csv label map instead");
    }
    write_png_gray16(dense, width, height, path);
}

void write_label_map(const Rag& rag, const fs::path& path) {
    write_label_map(rag.pixel_map, rag.width, rag.height, rag.depth, path);
}

LabelMap read_label_map(const fs::path& path) {
    if (fs::is_directory(path)) {
        const auto slices = sorted_slices(path, {".png", ".csv"});
        LabelMap vol = read_label_map(slices[0]);
        vol.depth = static_cast<int>(slices.size());
        for (std::size_t z = 1; z < slices.size(); ++z) {
            LabelMap slice = read_label_map(slices[z]);
            if (slice.width != vol.width || slice.height != vol.height) {
                throw IoError("slice dimensions differ in " + path.string());
            }
            vol.ids.insert(vol.ids.end(), slice.ids.begin(), slice.ids.end());
        }
        return vol;
    }
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
    if (path.extension() == ".csv") return read_csv(path);
    if (has_png_magic(path)) return read_png_gray(path);
    throw IoError("unsupported label map format (want PNG or CSV): " + path.string());
}

void write_overlay(const RgbImage& img, std::span<const std::int32_t> ids,
                   const fs::path& path, bool boundary_only) {
    if (img.depth != 1) throw ConfigError("write_overlay supports 2D images only");
    if (ids.size() != img.pixel_count()) {
        throw ConfigError("overlay label map does not match the image dimensions");
    }
    const auto mask = boundary_mask_2d(ids, img.width, img.height);

    RgbImage out;
    out.width = img.width;
    out.height = img.height;
    out.depth = 1;
    out.data.assign(img.pixel_count() * 3, 0);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        if (boundary_only) {
            const std::uint8_t v = mask[p] ? 255 : 0;
            out.data[3 * p] = out.data[3 * p + 1] = out.data[3 * p + 2] = v;
        } else if (mask[p]) {
            out.data[3 * p] = 255;
            out.data[3 * p + 1] = 0;
            out.data[3 * p + 2] = 0;
        } else {
            out.data[3 * p] = img.data[3 * p];
            out.data[3 * p + 1] = img.data[3 * p + 1];
            out.data[3 * p + 2] = img.data[3 * p + 2];
        }
    }
    write_png_rgb(out, path);
}

}  // namespace sr
