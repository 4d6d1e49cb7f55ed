#include "cubemix/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace cubemix {

namespace {

// next whitespace-separated token, skipping '#' comment lines
std::string next_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw IoError(path + ": truncated PPM header");
    return tok;
}

int parse_int(const std::string& tok, const std::string& path, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ": malformed PPM " + what + " '" + tok + "'");
    }
}

} // namespace

unsigned char quantize8(double v) {
    double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    double q = std::floor(clamped * 255.0 + 0.5);
    return static_cast<unsigned char>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
}

Tensor image_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string magic = next_token(in, path);
    if (magic != "P6") throw IoError(path + ": expected P6 magic, got '" + magic + "'");
    int w = parse_int(next_token(in, path), path, "width");
    int h = parse_int(next_token(in, path), path, "height");
    int maxval = parse_int(next_token(in, path), path, "maxval");
    if (w < 1 || h < 1) throw IoError(path + ": invalid PPM dimensions");
    if (maxval != 255) throw IoError(path + ": only maxval 255 is supported, got " + std::to_string(maxval));
    // the single whitespace byte after maxval was already consumed by next_token

    std::size_t need = static_cast<std::size_t>(w) * h * 3;
    std::vector<unsigned char> raw(need);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(need));
    std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got != need)
        throw IoError(path + ": truncated pixel data, expected " + std::to_string(need) +
                      " bytes, got " + std::to_string(got));

    Tensor img({w, h, 3});
    // PPM is row-major top-to-bottom; our layout is {W,H,C}
    std::size_t idx = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = raw[idx++] / 255.0;
    return img;
}

void image_write(const std::string& path, const Tensor& image) {
    if (image.rank() != 3 || image.dim(2) != 3)
        throw DimensionError("image_write expects a {W,H,3} tensor, got " + shape_str(image.shape()));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    int w = image.dim(0), h = image.dim(1);
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
    std::size_t idx = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) raw[idx++] = quantize8(image.at(x, y, c));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError(path + ": write failed");
}

} // namespace cubemix
