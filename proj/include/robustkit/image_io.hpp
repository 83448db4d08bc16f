#pragma once

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <jpeglib.h>
#include <png.h>

#include "robustkit/image.hpp"

namespace robustkit {

// ---- JPEG round trip (in memory) -------------------------------------------

namespace detail {

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

}  // namespace detail

inline std::vector<std::uint8_t> jpeg_encode(const Image& img, int quality) {
    auto bytes = to_bytes(img);
    jpeg_compress_struct cinfo;
    detail::JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = detail::jpeg_error_exit;
    unsigned char* buf = nullptr;
    unsigned long buflen = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (buf) free(buf);
        throw CodecFailure("JPEG encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buflen);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = bytes.data() + cinfo.next_scanline * stride;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::vector<std::uint8_t> out(buf, buf + buflen);
    free(buf);
    return out;
}

inline Image jpeg_decode(const std::vector<std::uint8_t>& data, std::string id) {
    jpeg_decompress_struct cinfo;
    detail::JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = detail::jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw CodecFailure("JPEG decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
    const std::size_t stride = static_cast<std::size_t>(w) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = bytes.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_bytes(bytes.data(), w, h, std::move(id));
}

// ---- PNG -------------------------------------------------------------------

inline Image read_png(const std::string& path) {
    png_image pimg;
    std::memset(&pimg, 0, sizeof pimg);
    pimg.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pimg, path.c_str()))
        throw CodecFailure("cannot read PNG: " + path);
    pimg.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(pimg));
    if (!png_image_finish_read(&pimg, nullptr, bytes.data(), 0, nullptr)) {
        png_image_free(&pimg);
        throw CodecFailure("cannot decode PNG: " + path);
    }
    return from_bytes(bytes.data(), static_cast<int>(pimg.width),
                      static_cast<int>(pimg.height),
                      std::filesystem::path(path).stem().string());
}

inline void write_png(const Image& img, const std::string& path) {
    png_image pimg;
    std::memset(&pimg, 0, sizeof pimg);
    pimg.version = PNG_IMAGE_VERSION;
    pimg.width = static_cast<png_uint_32>(img.width);
    pimg.height = static_cast<png_uint_32>(img.height);
    pimg.format = PNG_FORMAT_RGB;
    auto bytes = to_bytes(img);
    if (!png_image_write_to_file(&pimg, path.c_str(), 0, bytes.data(), 0, nullptr))
        throw CodecFailure("cannot write PNG: " + path);
}

// ---- PPM (P6), codec-free fallback -----------------------------------------

inline Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CodecFailure("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ParseError("not a P6 PPM: " + path);
    auto skip = [&] {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string line;
            std::getline(in, line);
            in >> std::ws;
        }
    };
    int w, h, maxval;
    skip();
    in >> w;
    skip();
    in >> h;
    skip();
    in >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw ParseError("bad PPM header: " + path);
    in.get();  // single whitespace after maxval
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!in) throw ParseError("truncated PPM: " + path);
    return from_bytes(bytes.data(), w, h,
                      std::filesystem::path(path).stem().string());
}

inline void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CodecFailure("cannot open for write: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    auto bytes = to_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

inline Image read_image(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return read_png(path);
    if (ext == ".ppm") return read_ppm(path);
    throw CodecFailure("unsupported image format: " + path);
}

}  // namespace robustkit
