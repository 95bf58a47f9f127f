#include "assetlens/io/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "assetlens/common/error.hpp"

namespace assetlens::io {

void write_pgm(const std::string& path, const nn::Tensor& image) {
    std::size_t h, w;
    if (image.shape.size() == 2) {
        h = image.shape[0];
        w = image.shape[1];
    } else if (image.shape.size() == 3 && image.shape[0] == 1) {
        h = image.shape[1];
        w = image.shape[2];
    } else {
        throw InputError("pgm writer expects a single-channel image");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write pgm file: " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    for (double v : image.data) {
        const int px = static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
        out.put(static_cast<char>(px));
    }
    if (!out) throw IoError("failed writing pgm file: " + path);
}

nn::Tensor read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pgm file: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw InputError("not a binary pgm file: " + path);
    // Header tokens may be separated by whitespace and '#' comments.
    auto next_int = [&]() {
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        std::size_t v;
        in >> v;
        return v;
    };
    const std::size_t w = next_int();
    const std::size_t h = next_int();
    const std::size_t maxval = next_int();
    if (maxval != 255) throw InputError("pgm maxval must be 255: " + path);
    in.get();  // single whitespace after header
    nn::Tensor img({1, h, w});
    for (std::size_t i = 0; i < h * w; ++i) {
        const int c = in.get();
        if (c == EOF) throw InputError("pgm file truncated: " + path);
        img.data[i] = static_cast<double>(static_cast<unsigned char>(c));
    }
    return img;
}

}  // namespace assetlens::io
