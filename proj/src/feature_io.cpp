#include "deepfuse/feature_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deepfuse/error.hpp"

namespace deepfuse {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxHeaderBytes = 4096;

template <typename T>
bool parse_integer(const std::string& text, T& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

FeatureSetHeader parse_header(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) {
        tokens.push_back(tok);
    }
    if (tokens.empty() || tokens[0] != FeatureSetHeader::kMagic) {
        throw FormatError("bad magic, expected '" + std::string(FeatureSetHeader::kMagic) + "'");
    }
    if (tokens.size() != 5) {
        throw FormatError("header needs 5 fields, found " + std::to_string(tokens.size()));
    }
    FeatureSetHeader h;
    h.extractor_id = tokens[1];
    if (!parse_integer(tokens[2], h.rows) || !parse_integer(tokens[3], h.cols) || h.rows == 0 || h.cols == 0) {
        throw FormatError("header rows/cols must be positive integers");
    }
    if (tokens[4] != FeatureSetHeader::kDtype) {
        throw FormatError("unsupported dtype '" + tokens[4] + "'");
    }
    return h;
}

}  // namespace

std::string FeatureSetHeader::to_line() const {
    return std::string(kMagic) + " " + extractor_id + " " + std::to_string(rows) + " " + std::to_string(cols) +
           " " + kDtype + "\n";
}

fs::path labels_path_for(const fs::path& feature_path) {
    fs::path p = feature_path;
    p.replace_extension(".labels");
    return p;
}

std::vector<std::int64_t> read_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open labels file " + path.string());
    }
    std::vector<std::int64_t> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        auto last = line.find_last_not_of(" \t\r");
        std::string tok = line.substr(first, last - first + 1);
        std::int64_t v = 0;
        if (!parse_integer(tok, v)) {
            throw ParseError(line_no, "label '" + tok + "' is not an integer");
        }
        labels.push_back(v);
    }
    return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FormatError("cannot write labels file " + path.string());
    }
    for (int l : labels) {
        out << l << '\n';
    }
}

LabeledDataset load_feature_set(const fs::path& path) {
    return load_feature_set(path, labels_path_for(path));
}

LabeledDataset load_feature_set(const fs::path& path, const fs::path& labels_file) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open feature file " + path.string());
    }
    std::string line;
    for (char c; line.size() < kMaxHeaderBytes && in.get(c);) {
        if (c == '\n') {
            break;
        }
        line.push_back(c);
    }
    FeatureSetHeader header = parse_header(line);

    const std::size_t count = header.rows * header.cols;
    std::vector<unsigned char> bytes(count * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw FormatError("payload truncated: expected " + std::to_string(bytes.size()) + " bytes, read " +
                          std::to_string(in.gcount()));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after payload");
    }

    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* b = bytes.data() + 4 * i;
        std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                          (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
        float f = std::bit_cast<float>(u);
        if (!std::isfinite(f)) {
            throw DataError("non-finite value at row " + std::to_string(i / header.cols) + ", column " +
                            std::to_string(i % header.cols) + " of " + path.string());
        }
        values[i] = static_cast<double>(f);
    }

    std::vector<std::int64_t> raw = read_labels(labels_file);
    if (raw.size() != header.rows) {
        throw ConsistencyError(labels_file.string() + " has " + std::to_string(raw.size()) + " labels for " +
                               std::to_string(header.rows) + " rows");
    }
    LabelEncoding enc = encode_labels(raw);
    const int k = static_cast<int>(enc.classes.size());
    return LabeledDataset(FeatureMatrix(header.rows, header.cols, std::move(values)), std::move(enc.dense), k,
                          header.extractor_id);
}

void save_feature_set(const fs::path& path, const LabeledDataset& ds) {
    const std::string& id = ds.source_tag();
    if (id.empty() || std::any_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw FormatError("extractor id must be non-empty and free of whitespace: '" + id + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot write feature file " + path.string());
    }
    FeatureSetHeader header{id, ds.rows(), ds.cols()};
    const std::string line = header.to_line();
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    std::vector<unsigned char> bytes(ds.rows() * ds.cols() * 4);
    auto values = ds.features().values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        bytes[4 * i + 0] = static_cast<unsigned char>(u & 0xffu);
        bytes[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xffu);
        bytes[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xffu);
        bytes[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xffu);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("short write to " + path.string());
    }
    write_labels(labels_path_for(path), ds.labels());
}

std::vector<fs::path> list_feature_sets(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw ConfigError("feature directory does not exist: " + dir.string());
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".fset") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return out;
}

}  // namespace deepfuse
