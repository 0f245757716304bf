#include <cctype>
#include <fstream>
#include <string>

#include "deepfuse/error.hpp"
#include "deepfuse/imgprep.hpp"

namespace deepfuse::imgprep {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) {
                return tok;
            }
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

std::size_t parse_positive(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
        throw FormatError(std::string("PGM ") + what + " is not a positive integer: '" + tok + "'");
    }
    std::size_t v = std::stoul(tok);
    if (v == 0) {
        throw FormatError(std::string("PGM ") + what + " must be positive");
    }
    return v;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    if (next_token(in) != "P5") {
        throw FormatError(path.string() + " is not a binary PGM (P5)");
    }
    const std::size_t width = parse_positive(next_token(in), "width");
    const std::size_t height = parse_positive(next_token(in), "height");
    const std::size_t maxval = parse_positive(next_token(in), "maxval");
    if (maxval != 255) {
        throw FormatError("only maxval 255 is supported, got " + std::to_string(maxval));
    }
    // next_token consumed exactly one whitespace byte after maxval.
    std::vector<std::uint8_t> pixels(width * height);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size()) {
        throw FormatError(path.string() + ": pixel data truncated");
    }
    return GrayImage(height, width, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot write " + path.string());
    }
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()), static_cast<std::streamsize>(img.pixels().size()));
}

}  // namespace deepfuse::imgprep
